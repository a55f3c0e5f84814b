#include "gandse/engine_config.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

EngineConfig EngineConfig::defaults(Variant variant, std::string_view profile) {
    EngineConfig c;
    c.set_variant(variant);
    c.set_profile(profile);
    return c;
}

void EngineConfig::set_variant(Variant v) {
    variant = v;
    space = ConfigSpace::defaults(v);
    arch = ArchProfile::named(profile, v);
    train.lr_g = arch.lr_g;
    train.lr_d = arch.lr_d;
}

void EngineConfig::set_profile(std::string_view name) {
    arch = ArchProfile::named(name, variant);
    profile = std::string(name);
    train.lr_g = arch.lr_g;
    train.lr_d = arch.lr_d;
}

ExploreOptions EngineConfig::explore_options(std::uint64_t explore_seed) const {
    ExploreOptions o;
    o.threshold = train.threshold;
    o.cap = candidate_cap;
    o.noise_length = train.noise_length;
    o.seed = explore_seed;
    return o;
}

void EngineConfig::validate() const {
    power.validate();
    train.validate();
    sa.validate();
    if (dnnweaver_bandwidth < 1) throw InputError("dnnweaver.bandwidth must be >= 1");
    if (train_size < 2) throw InputError("dataset.train_size must be >= 2");
    if (candidate_cap < 1) throw InputError("explore.cap must be >= 1");
    if (arch.g_hidden_layers < 1 || arch.d_hidden_layers < 1 || arch.g_width < 1 || arch.d_width < 1)
        throw InputError("model sizes must be >= 1");
    if (tasks.mode == TaskMode::relaxed && (!(tasks.factor_min > 0.0) || tasks.factor_max < tasks.factor_min))
        throw InputError("tasks.factor_min/max must satisfy 0 < min <= max");
}

namespace {

std::size_t as_size(const KvText::Entry& e) {
    const auto v = parse_int(e.value, e.key, e.line);
    if (v < 0) throw ParseError(e.key + " must be >= 0", e.line);
    return static_cast<std::size_t>(v);
}

double as_double(const KvText::Entry& e) { return parse_double(e.value, e.key, e.line); }

void apply(EngineConfig& c, const KvText::Entry& e) {
    const std::string& k = e.key;
    if (k == "variant" || k == "profile") return;
    if (k == "seed") {
        c.seed = parse_uint(e.value, k, e.line);
        c.train.seed = c.seed;
        return;
    }
    if (k.starts_with("space.")) {
        const auto var = parse_config_var(std::string_view(k).substr(6));
        if (!var || !c.space.has(*var)) throw ParseError("unknown key '" + k + "' for this variant", e.line);
        auto vars = c.space.variables();
        vars[static_cast<std::size_t>(c.space.position_of(*var))].choices = parse_int_list(e.value, k, e.line);
        c.space = ConfigSpace(c.variant, std::move(vars));
        return;
    }
    if (k.starts_with("layers.")) {
        const auto name = std::string_view(k).substr(7);
        for (std::size_t d = 0; d < 6; ++d) {
            if (name == kLayerFieldNames[d]) {
                c.layers.dims[d] = parse_int_list(e.value, k, e.line);
                return;
            }
        }
        throw ParseError("unknown key '" + k + "'", e.line);
    }

    auto& p = c.power;
    if (k == "power.e_mac") p.e_mac = as_double(e);
    else if (k == "power.e_sram") p.e_sram = as_double(e);
    else if (k == "power.e_dram") p.e_dram = as_double(e);
    else if (k == "power.c_pe") p.c_pe = as_double(e);
    else if (k == "power.c_sram") p.c_sram = as_double(e);
    else if (k == "power.c_base") p.c_base = as_double(e);
    else if (k == "dnnweaver.bandwidth") c.dnnweaver_bandwidth = parse_int(e.value, k, e.line);
    else if (k == "dataset.train_size") c.train_size = as_size(e);
    else if (k == "dataset.test_size") c.test_size = as_size(e);
    else if (k == "model.g_hidden_layers") c.arch.g_hidden_layers = as_size(e);
    else if (k == "model.g_width") c.arch.g_width = as_size(e);
    else if (k == "model.d_hidden_layers") c.arch.d_hidden_layers = as_size(e);
    else if (k == "model.d_width") c.arch.d_width = as_size(e);
    else if (k == "model.lr_g") c.train.lr_g = c.arch.lr_g = as_double(e);
    else if (k == "model.lr_d") c.train.lr_d = c.arch.lr_d = as_double(e);
    else if (k == "train.epochs") c.train.epochs = as_size(e);
    else if (k == "train.batch_size") c.train.batch_size = as_size(e);
    else if (k == "train.w_critic") c.train.w_critic = as_double(e);
    else if (k == "train.clip_norm") c.train.clip_norm = as_double(e);
    else if (k == "train.noise_length") c.train.noise_length = as_size(e);
    else if (k == "explore.threshold") c.train.threshold = as_double(e);
    else if (k == "explore.cap") c.candidate_cap = as_size(e);
    else if (k == "tasks.mode") {
        if (e.value == "exact") c.tasks.mode = TaskMode::exact;
        else if (e.value == "relaxed") c.tasks.mode = TaskMode::relaxed;
        else throw ParseError("tasks.mode must be exact or relaxed", e.line);
    }
    else if (k == "tasks.factor_min") c.tasks.factor_min = as_double(e);
    else if (k == "tasks.factor_max") c.tasks.factor_max = as_double(e);
    else if (k == "sa.t0") c.sa.t0 = as_double(e);
    else if (k == "sa.alpha") c.sa.alpha = as_double(e);
    else if (k == "sa.steps_per_temperature") c.sa.steps_per_temperature = as_size(e);
    else if (k == "sa.stop_ratio") c.sa.stop_ratio = as_double(e);
    else if (k == "paths.data_dir") c.data_dir = e.value;
    else if (k == "paths.run_dir") c.run_dir = e.value;
    else throw ParseError("unknown key '" + k + "'", e.line);
}

}  // namespace

EngineConfig EngineConfig::parse(std::istream& in) {
    const auto kv = KvText::parse(in);
    EngineConfig c;
    if (const auto* v = kv.find("variant")) c.variant = parse_variant(v->value);
    if (const auto* p = kv.find("profile")) c.profile = p->value;
    c = defaults(c.variant, c.profile);
    for (const auto& e : kv.entries()) apply(c, e);
    c.validate();
    return c;
}

EngineConfig EngineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in);
}

void write_engine_config(std::ostream& out, const EngineConfig& c) {
    out << "variant = " << to_string(c.variant) << '\n';
    out << "profile = " << c.profile << '\n';
    out << "seed = " << c.seed << '\n';
    for (const auto& v : c.space.variables()) {
        out << "space." << name_of(v.var) << " = ";
        for (std::size_t i = 0; i < v.choices.size(); ++i) out << (i ? "," : "") << v.choices[i];
        out << '\n';
    }
    out << "power.e_mac = " << format_double(c.power.e_mac) << '\n';
    out << "power.e_sram = " << format_double(c.power.e_sram) << '\n';
    out << "power.e_dram = " << format_double(c.power.e_dram) << '\n';
    out << "power.c_pe = " << format_double(c.power.c_pe) << '\n';
    out << "power.c_sram = " << format_double(c.power.c_sram) << '\n';
    out << "power.c_base = " << format_double(c.power.c_base) << '\n';
    out << "dnnweaver.bandwidth = " << c.dnnweaver_bandwidth << '\n';
    for (std::size_t d = 0; d < 6; ++d) {
        out << "layers." << kLayerFieldNames[d] << " = ";
        for (std::size_t i = 0; i < c.layers.dims[d].size(); ++i) out << (i ? "," : "") << c.layers.dims[d][i];
        out << '\n';
    }
    out << "dataset.train_size = " << c.train_size << '\n';
    out << "dataset.test_size = " << c.test_size << '\n';
    out << "model.g_hidden_layers = " << c.arch.g_hidden_layers << '\n';
    out << "model.g_width = " << c.arch.g_width << '\n';
    out << "model.d_hidden_layers = " << c.arch.d_hidden_layers << '\n';
    out << "model.d_width = " << c.arch.d_width << '\n';
    out << "model.lr_g = " << format_double(c.train.lr_g) << '\n';
    out << "model.lr_d = " << format_double(c.train.lr_d) << '\n';
    out << "train.epochs = " << c.train.epochs << '\n';
    out << "train.batch_size = " << c.train.batch_size << '\n';
    out << "train.w_critic = " << format_double(c.train.w_critic) << '\n';
    out << "train.clip_norm = " << format_double(c.train.clip_norm) << '\n';
    out << "train.noise_length = " << c.train.noise_length << '\n';
    out << "explore.threshold = " << format_double(c.train.threshold) << '\n';
    out << "explore.cap = " << c.candidate_cap << '\n';
    out << "tasks.mode = " << (c.tasks.mode == TaskMode::exact ? "exact" : "relaxed") << '\n';
    out << "tasks.factor_min = " << format_double(c.tasks.factor_min) << '\n';
    out << "tasks.factor_max = " << format_double(c.tasks.factor_max) << '\n';
    out << "sa.t0 = " << format_double(c.sa.t0) << '\n';
    out << "sa.alpha = " << format_double(c.sa.alpha) << '\n';
    out << "sa.steps_per_temperature = " << c.sa.steps_per_temperature << '\n';
    out << "sa.stop_ratio = " << format_double(c.sa.stop_ratio) << '\n';
    out << "paths.data_dir = " << c.data_dir << '\n';
    out << "paths.run_dir = " << c.run_dir << '\n';
}

}  // namespace gandse
