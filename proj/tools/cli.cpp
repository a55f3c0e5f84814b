#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gandse/baselines.hpp"
#include "gandse/error.hpp"
#include "gandse/eval.hpp"
#include "gandse/kv_text.hpp"
#include "gandse/rtl.hpp"

namespace gandse::cli {

namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// Seed streams; fixed so artifacts stay reproducible across releases.
enum Stream : std::uint64_t {
    kSampleStream = 1,
    kSplitStream = 2,
    kInitStream = 3,
    kTrainStream = 4,
    kTaskStream = 5,
    kExploreStream = 6,
    kSaStream = 7,
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    return f;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw InputError(what + " '" + path.string() + "' not found");
}

struct Globals {
    std::string config;
    std::uint64_t seed = 0;
    std::string variant;
    std::string profile;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* variant_opt = nullptr;
    CLI::Option* profile_opt = nullptr;
};

// Defaults, then the config file, then command-line flags.
EngineConfig resolve(const Globals& g) {
    EngineConfig c = g.config.empty() ? EngineConfig::defaults(Variant::im2col) : EngineConfig::load(g.config);
    if (*g.profile_opt) c.set_profile(g.profile);
    if (*g.variant_opt) {
        const auto v = parse_variant(g.variant);
        if (v != c.variant) c.set_variant(v);
    }
    if (*g.seed_opt) {
        c.seed = g.seed;
        c.train.seed = g.seed;
    }
    c.validate();
    return c;
}

fs::path train_csv(const EngineConfig& c) { return fs::path(c.data_dir) / "train.csv"; }
fs::path test_csv(const EngineConfig& c) { return fs::path(c.data_dir) / "test.csv"; }

// ---- gen-data ------------------------------------------------------------------------

void cmd_gen_data(const EngineConfig& c, std::ostream& out) {
    const auto model = c.model();
    const auto all = generate_dataset(model, c.layers, c.train_size + c.test_size, derive_seed(c.seed, kSampleStream));
    const auto [train, test] = split(all, c.test_size, derive_seed(c.seed, kSplitStream));
    fs::create_directories(c.data_dir);
    write_csv(train, train_csv(c).string());
    write_csv(test, test_csv(c).string());
    out << "wrote " << train.size() << " training and " << test.size() << " test samples to " << c.data_dir << '\n';
}

// ---- train ---------------------------------------------------------------------------

struct TrainArgs {
    std::string kind = "gan";
    double w_critic = 0.0;
    std::size_t epochs = 0;
    std::string out;
    CLI::Option* w_opt = nullptr;
    CLI::Option* epochs_opt = nullptr;
};

struct TrainInfo {
    std::string kind;
    Variant variant = Variant::im2col;
};

TrainInfo read_train_info(const fs::path& run) {
    require_file(run / RunFiles::info, "training record");
    const auto kv = KvText::parse_file((run / RunFiles::info).string());
    return {kv.get("kind"), parse_variant(kv.get("variant"))};
}

void cmd_train(const EngineConfig& c, const TrainArgs& a, std::ostream& out) {
    if (a.kind != "gan" && a.kind != "mlp") throw InputError("--kind must be gan or mlp");
    require_file(train_csv(c), "training set");
    const auto train = read_csv(train_csv(c).string(), c.space);
    if (train.variant != c.variant) throw InputError("training set variant does not match the configuration");
    const auto model = c.model();

    TrainConfig tc = c.train;
    if (*a.w_opt) tc.w_critic = a.w_critic;
    if (*a.epochs_opt) tc.epochs = a.epochs;
    tc.seed = derive_seed(c.seed, kTrainStream);
    tc.validate();

    const fs::path run = a.out.empty() ? fs::path(c.run_dir) / a.kind : fs::path(a.out);
    fs::create_directories(run);
    auto gan = make_gan(c.space, c.arch, derive_seed(c.seed, kInitStream), tc.noise_length);
    std::vector<LossRecord> history;
    std::size_t params = 0;
    if (a.kind == "gan") {
        history = train_gan(train, gan.generator, gan.discriminator, model, tc);
        nn::save_weights(gan.generator, (run / RunFiles::generator).string());
        nn::save_weights(gan.discriminator, (run / RunFiles::discriminator).string());
        params = gan.generator.parameter_count() + gan.discriminator.parameter_count();
    } else {
        const auto target = gan.generator.parameter_count() + gan.discriminator.parameter_count();
        auto mlp = make_large_mlp(c.space, c.arch.g_hidden_layers, target, derive_seed(c.seed, kInitStream),
                                  tc.noise_length);
        history = train_mlp_only(train, mlp, model, tc);
        nn::save_weights(mlp, (run / RunFiles::generator).string());
        params = mlp.parameter_count();
    }
    {
        auto f = open_out(run / RunFiles::stats);
        write_norm_stats(f, train.stats);
    }
    {
        auto f = open_out(run / RunFiles::losses);
        write_loss_history(f, history);
    }
    {
        auto f = open_out(run / RunFiles::info);
        f << "kind = " << a.kind << '\n';
        f << "variant = " << to_string(c.variant) << '\n';
        f << "w_critic = " << format_double(a.kind == "gan" ? tc.w_critic : 0.0) << '\n';
        f << "epochs = " << tc.epochs << '\n';
        f << "seed = " << c.seed << '\n';
        f << "parameters = " << params << '\n';
    }
    const auto& last = history.back();
    out << "trained " << a.kind << " for " << tc.epochs << " epochs (" << params << " parameters); final losses config "
        << format_double(last.loss_config) << " critic " << format_double(last.loss_critic) << " dis "
        << format_double(last.loss_dis) << "; wrote " << run.string() << '\n';
}

struct LoadedGenerator {
    nn::Mlp generator;
    NormStats stats;
};

LoadedGenerator load_run(const EngineConfig& c, const fs::path& run) {
    const auto info = read_train_info(run);
    if (info.variant != c.variant) throw InputError("run '" + run.string() + "' was trained for a different variant");
    require_file(run / RunFiles::generator, "generator checkpoint");
    require_file(run / RunFiles::stats, "normalization statistics");
    auto g = nn::load_weights((run / RunFiles::generator).string(), nn::Head::grouped(c.space));
    if (g.input_size() != kConditionFeatures + c.train.noise_length)
        throw InputError("checkpoint input size does not match train.noise_length");
    return {std::move(g), read_stats_file((run / RunFiles::stats).string())};
}

// ---- parse / explore / implement -----------------------------------------------------

void cmd_parse(const std::string& network, std::ostream& out) {
    const auto net = parse_network_file(network);
    out << render_network(net);
}

struct ExploreArgs {
    std::string network;
    std::vector<double> latency;
    std::vector<double> power;
    std::string run;
    std::string out;
    double threshold = 0.0;
    CLI::Option* threshold_opt = nullptr;
};

double objective_for(const std::vector<double>& values, std::size_t i, std::size_t layers, const char* flag) {
    if (values.size() == 1) return values.front();
    if (values.size() != layers)
        throw InputError(std::string(flag) + " needs one value or one per layer (" + std::to_string(layers) + ")");
    return values[i];
}

void cmd_explore(EngineConfig c, const ExploreArgs& a, std::ostream& out) {
    if (*a.threshold_opt) c.train.threshold = a.threshold;
    c.validate();
    const auto net = parse_network_file(a.network);
    const fs::path run = a.run.empty() ? fs::path(c.run_dir) / "gan" : fs::path(a.run);
    const auto loaded = load_run(c, run);
    const auto model = c.model();
    const fs::path dir = a.out.empty() ? fs::path(c.run_dir) / "selections" : fs::path(a.out);

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& nl = net.layers[i];
        SelectionRecord rec;
        rec.layer_name = nl.name;
        rec.variant = c.variant;
        rec.layer = nl.layer;
        rec.lo = objective_for(a.latency, i, net.layers.size(), "--latency");
        rec.po = objective_for(a.power, i, net.layers.size(), "--power");
        if (!(rec.lo > 0.0) || !(rec.po > 0.0)) throw InputError("objectives must be > 0");
        const DseTask task{rec.layer, rec.lo, rec.po};
        rec.result = explore(loaded.generator, task, loaded.stats, model,
                             c.explore_options(derive_seed(derive_seed(c.seed, kExploreStream), i)));
        const auto path = dir / (nl.name + ".sel");
        {
            auto f = open_out(path);
            write_selection(f, rec);
        }
        {
            auto f = open_out(path.string() + ".timing");
            f << "seconds = " << format_double(rec.result.seconds) << '\n';
        }
        out << nl.name << ": " << (rec.result.satisfied ? "satisfied" : "not satisfied")
            << " latency=" << format_double(rec.result.latency) << " power=" << format_double(rec.result.power)
            << " candidates=" << rec.result.candidates_examined << " -> " << path.string() << '\n';
    }
}

void cmd_implement(const std::string& selection, const std::string& templ, const std::string& out_path,
                   std::ostream& out) {
    const auto rec = read_selection_file(selection);
    const std::string text = templ.empty() ? default_rtl_template(rec.variant) : slurp(templ);
    const auto rtl = emit_rtl_params(text, rec.result.config, rec.variant);
    fs::path target = out_path;
    if (target.empty()) target = fs::path(selection).replace_extension(".vh");
    auto f = open_out(target);
    f << rtl;
    out << "wrote " << target.string() << '\n';
}

// ---- evaluate ------------------------------------------------------------------------

struct EvaluateArgs {
    std::vector<std::string> methods{"gan", "mlp", "sa"};
    std::string out;
    double threshold = 0.0;
    CLI::Option* threshold_opt = nullptr;
};

void cmd_evaluate(EngineConfig c, const EvaluateArgs& a, std::ostream& out) {
    if (*a.threshold_opt) c.train.threshold = a.threshold;
    c.validate();
    require_file(train_csv(c), "training set");
    require_file(test_csv(c), "test set");
    const auto train = read_csv(train_csv(c).string(), c.space);
    const auto test = read_csv(test_csv(c).string(), c.space);
    if (!(train.stats == test.stats)) throw InputError("training and test sets use different normalization");
    const auto model = c.model();
    const auto tasks = make_tasks(test, c.tasks, derive_seed(c.seed, kTaskStream));

    std::vector<MethodResults> all;
    for (const auto& spec : a.methods) {
        MethodResults mr;
        const auto eq = spec.find('=');
        mr.name = spec.substr(0, eq);
        if (mr.name.empty()) throw InputError("empty method label in --methods");
        if (eq == std::string::npos && mr.name == "sa") {
            for (std::size_t i = 0; i < tasks.size(); ++i)
                mr.results.push_back(
                    sa_search(tasks[i], model, train.stats, c.sa, derive_seed(derive_seed(c.seed, kSaStream), i))
                        .selection);
        } else {
            if (eq == std::string::npos && mr.name != "gan" && mr.name != "mlp")
                throw InputError("unknown method '" + mr.name + "' (expected gan, mlp, sa or label=run_dir)");
            const fs::path run = eq == std::string::npos ? fs::path(c.run_dir) / mr.name : fs::path(spec.substr(eq + 1));
            const auto loaded = load_run(c, run);
            if (!(loaded.stats == train.stats))
                throw InputError("run '" + run.string() + "' was trained on a different dataset");
            for (std::size_t i = 0; i < tasks.size(); ++i)
                mr.results.push_back(explore(loaded.generator, tasks[i], loaded.stats, model,
                                             c.explore_options(derive_seed(derive_seed(c.seed, kExploreStream), i))));
        }
        all.push_back(std::move(mr));
    }

    auto points = objective_points(train);
    const auto test_points = objective_points(test);
    points.insert(points.end(), test_points.begin(), test_points.end());
    const auto report = build_report(all, tasks, points);

    const fs::path dir = a.out.empty() ? fs::path(c.run_dir) / "eval" : fs::path(a.out);
    {
        auto f = open_out(dir / "report.txt");
        write_report_text(f, report);
    }
    {
        auto f = open_out(dir / "report.kv");
        write_report_kv(f, report);
    }
    {
        auto f = open_out(dir / "difficulty.txt");
        write_difficulty_curves(f, report);
    }
    {
        auto f = open_out(dir / "report.timing");
        write_report_timing(f, report);
    }
    write_report_text(out, report);
}

}  // namespace

// ---- selection records ---------------------------------------------------------------

void write_selection(std::ostream& out, const SelectionRecord& r) {
    out << "layer = " << r.layer_name << '\n';
    out << "variant = " << to_string(r.variant) << '\n';
    const auto dims = r.layer.as_array();
    for (std::size_t d = 0; d < dims.size(); ++d) out << "layer." << kLayerFieldNames[d] << " = " << dims[d] << '\n';
    out << "objective.latency = " << format_double(r.lo) << '\n';
    out << "objective.power = " << format_double(r.po) << '\n';
    for (const auto var : ConfigSpace::variables_of(r.variant))
        out << "config." << name_of(var) << " = " << r.result.config[var] << '\n';
    out << "latency = " << format_double(r.result.latency) << '\n';
    out << "power = " << format_double(r.result.power) << '\n';
    out << "latency_cycles = " << r.result.raw.latency << '\n';
    out << "power_raw = " << format_double(r.result.raw.power) << '\n';
    out << "satisfied = " << (r.result.satisfied ? "true" : "false") << '\n';
    out << "candidates = " << r.result.candidates_examined << '\n';
}

SelectionRecord read_selection(std::istream& in) {
    const auto kv = KvText::parse(in);
    SelectionRecord r;
    r.layer_name = kv.get("layer");
    r.variant = parse_variant(kv.get("variant"));
    std::array<std::int64_t, 6> dims{};
    for (std::size_t d = 0; d < dims.size(); ++d) dims[d] = kv.get_int("layer." + std::string(kLayerFieldNames[d]));
    r.layer = ConvLayer::from_array(dims);
    r.lo = kv.get_double("objective.latency");
    r.po = kv.get_double("objective.power");
    for (const auto var : ConfigSpace::variables_of(r.variant)) {
        const auto v = kv.get_int("config." + std::string(name_of(var)));
        if (v < 1) throw ParseError("config." + std::string(name_of(var)) + " must be >= 1");
        r.result.config[var] = v;
    }
    r.result.latency = kv.get_double("latency");
    r.result.power = kv.get_double("power");
    r.result.raw.latency = kv.get_int("latency_cycles");
    r.result.raw.power = kv.get_double("power_raw");
    const auto& sat = kv.get("satisfied");
    if (sat != "true" && sat != "false") throw ParseError("satisfied must be true or false");
    r.result.satisfied = sat == "true";
    const auto cand = kv.get_int("candidates");
    if (cand < 1) throw ParseError("candidates must be >= 1");
    r.result.candidates_examined = static_cast<std::size_t>(cand);
    return r;
}

SelectionRecord read_selection_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open selection record '" + path + "'");
    return read_selection(in);
}

// ---- entry point ---------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GAN-based design space exploration for DNN accelerators", "gandse"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "Engine configuration file (see config/defaults.conf)");
    g.seed_opt = app.add_option("--seed", g.seed, "Master seed");
    g.variant_opt = app.add_option("--variant", g.variant, "Accelerator template")->check(CLI::IsMember({"im2col", "dnnweaver"}));
    g.profile_opt = app.add_option("--profile", g.profile, "Network sizes")->check(CLI::IsMember({"desk", "paper"}));

    auto* gen = app.add_subcommand("gen-data", "Sample a dataset and split it into train/test CSVs");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train a generator (GAN or supervised MLP baseline)");
    train->add_option("--kind", ta.kind, "gan or mlp")->check(CLI::IsMember({"gan", "mlp"}));
    ta.w_opt = train->add_option("--w-critic", ta.w_critic, "Weight of the critic loss in the generator update");
    ta.epochs_opt = train->add_option("--epochs", ta.epochs, "Override train.epochs");
    train->add_option("--out", ta.out, "Run directory (default <run_dir>/<kind>)");

    std::string network;
    auto* parse = app.add_subcommand("parse", "Parse a network description and print its layers");
    parse->add_option("network", network, "Network description file")->required();

    ExploreArgs ea;
    auto* expl = app.add_subcommand("explore", "Search a design for every layer of a network");
    expl->add_option("--network", ea.network, "Network description file")->required();
    expl->add_option("--latency", ea.latency, "Normalized latency objective(s), one or one per layer")
        ->required()->delimiter(',');
    expl->add_option("--power", ea.power, "Normalized power objective(s), one or one per layer")
        ->required()->delimiter(',');
    expl->add_option("--run", ea.run, "Trained run directory (default <run_dir>/gan)");
    expl->add_option("--out", ea.out, "Selection record directory (default <run_dir>/selections)");
    ea.threshold_opt = expl->add_option("--threshold", ea.threshold, "Probability threshold");

    std::string selection, templ, rtl_out;
    auto* impl = app.add_subcommand("implement", "Emit RTL parameters for a selected design");
    impl->add_option("--selection", selection, "Selection record written by explore")->required();
    impl->add_option("--template", templ, "Template with {{NAME}} placeholders (default: one localparam per field)");
    impl->add_option("--out", rtl_out, "Output file (default: the record path with .vh)");

    EvaluateArgs va;
    auto* evaluate = app.add_subcommand("evaluate", "Run methods over test-set tasks and write the report");
    evaluate->add_option("--methods", va.methods, "gan, mlp, sa, or label=run_dir")->delimiter(',');
    evaluate->add_option("--out", va.out, "Report directory (default <run_dir>/eval)");
    va.threshold_opt = evaluate->add_option("--threshold", va.threshold, "Probability threshold");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUser;
    }

    try {
        if (parse->parsed()) {
            cmd_parse(network, out);
        } else if (impl->parsed()) {
            cmd_implement(selection, templ, rtl_out, out);
        } else {
            const auto config = resolve(g);
            if (gen->parsed()) cmd_gen_data(config, out);
            else if (train->parsed()) cmd_train(config, ta, out);
            else if (expl->parsed()) cmd_explore(config, ea, out);
            else if (evaluate->parsed()) cmd_evaluate(config, va, out);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitOk;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    if (args.empty()) args.emplace_back("gandse");
    return run(args, std::cout, std::cerr);
}

}  // namespace gandse::cli
