#include "gandse/config_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

std::vector<ConfigVar> ConfigSpace::variables_of(Variant variant) {
    if (variant == Variant::dnnweaver) return {ConfigVar::pen, ConfigVar::iss, ConfigVar::wss, ConfigVar::oss};
    std::vector<ConfigVar> all;
    for (std::size_t i = 0; i < kNumConfigVars; ++i) all.push_back(static_cast<ConfigVar>(i));
    return all;
}

ConfigSpace::ConfigSpace(Variant variant, std::vector<SpaceVariable> variables)
    : variant_(variant), variables_(std::move(variables)) {
    const auto expected = variables_of(variant);
    if (variables_.size() != expected.size())
        throw InputError(std::string(to_string(variant)) + " space needs " + std::to_string(expected.size()) +
                         " variables, got " + std::to_string(variables_.size()));
    positions_.fill(-1);
    for (std::size_t p = 0; p < variables_.size(); ++p) {
        const auto& v = variables_[p];
        if (v.var != expected[p])
            throw InputError("variable " + std::to_string(p) + " must be " + std::string(name_of(expected[p])) +
                             ", got " + std::string(name_of(v.var)));
        if (v.choices.empty()) throw InputError(std::string(name_of(v.var)) + ": empty choice list");
        for (std::size_t k = 0; k < v.choices.size(); ++k) {
            if (v.choices[k] < 1) throw InputError(std::string(name_of(v.var)) + ": choices must be >= 1");
            if (k > 0 && v.choices[k] <= v.choices[k - 1])
                throw InputError(std::string(name_of(v.var)) + ": choices must be strictly increasing");
        }
        positions_[index_of(v.var)] = static_cast<int>(p);
        offsets_.push_back(width_);
        width_ += v.choices.size();
    }
}

ConfigSpace ConfigSpace::defaults(Variant variant) {
    using V = ConfigVar;
    if (variant == Variant::dnnweaver) {
        const std::vector<std::int64_t> sram = {128, 256, 512, 1024, 2048, 4096};
        return ConfigSpace(variant, {{V::pen, {8, 16, 32, 64, 128}}, {V::iss, sram}, {V::wss, sram}, {V::oss, sram}});
    }
    const std::vector<std::int64_t> bw = {16, 32, 64, 128, 256, 512};
    const std::vector<std::int64_t> sram = {256, 512, 1024, 2048, 4096, 8192};
    const std::vector<std::int64_t> channel_tile = {1, 4, 16, 64, 256};
    const std::vector<std::int64_t> spatial_tile = {4, 16, 64, 128, 256};
    const std::vector<std::int64_t> kernel_tile = {1, 2, 3, 4, 5};
    return ConfigSpace(variant, {{V::pen, {128, 256, 512, 1024, 2048, 4096}},
                                 {V::sdb, bw},
                                 {V::dsb, bw},
                                 {V::iss, sram},
                                 {V::wss, sram},
                                 {V::oss, sram},
                                 {V::tic, channel_tile},
                                 {V::toc, channel_tile},
                                 {V::tow, spatial_tile},
                                 {V::toh, spatial_tile},
                                 {V::tkw, kernel_tile},
                                 {V::tkh, kernel_tile}});
}

std::vector<std::size_t> ConfigSpace::block_lengths() const {
    std::vector<std::size_t> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) out.push_back(v.choices.size());
    return out;
}

const std::vector<std::int64_t>& ConfigSpace::choices(ConfigVar var) const {
    const int p = position_of(var);
    if (p < 0) throw InputError(std::string(name_of(var)) + " is not part of the " + std::string(to_string(variant_)) + " space");
    return variables_[static_cast<std::size_t>(p)].choices;
}

int ConfigSpace::choice_index(std::size_t position, std::int64_t value) const {
    const auto& c = variables_[position].choices;
    const auto it = std::lower_bound(c.begin(), c.end(), value);
    if (it == c.end() || *it != value) return -1;
    return static_cast<int>(it - c.begin());
}

std::int64_t ConfigSpace::padded_dim(ConfigVar tile, std::int64_t dim) const {
    const int p = position_of(tile);
    if (p < 0) return dim;
    const auto& c = variables_[static_cast<std::size_t>(p)].choices;
    const auto it = std::lower_bound(c.begin(), c.end(), dim);
    return it == c.end() ? dim : *it;
}

bool ConfigSpace::contains(const Configuration& config) const {
    for (std::size_t i = 0; i < kNumConfigVars; ++i) {
        const auto var = static_cast<ConfigVar>(i);
        const int p = position_of(var);
        if (p < 0) {
            if (config.has(var)) return false;
        } else if (choice_index(static_cast<std::size_t>(p), config[var]) < 0) {
            return false;
        }
    }
    return true;
}

Configuration ConfigSpace::make(std::span<const std::size_t> indices) const {
    if (indices.size() != variables_.size()) throw InputError("choice index count does not match the space");
    Configuration c;
    for (std::size_t p = 0; p < variables_.size(); ++p) {
        const auto& v = variables_[p];
        if (indices[p] >= v.choices.size()) throw InputError(std::string(name_of(v.var)) + ": choice index out of range");
        c[v.var] = v.choices[indices[p]];
    }
    return c;
}

std::uint64_t ConfigSpace::size() const {
    std::uint64_t n = 1;
    for (const auto& v : variables_) {
        if (n > std::numeric_limits<std::uint64_t>::max() / v.choices.size()) return std::numeric_limits<std::uint64_t>::max();
        n *= v.choices.size();
    }
    return n;
}

void write_space(std::ostream& out, const ConfigSpace& space) {
    out << "variant = " << to_string(space.variant()) << '\n';
    for (const auto& v : space.variables()) {
        out << name_of(v.var) << " = ";
        for (std::size_t k = 0; k < v.choices.size(); ++k) out << (k ? "," : "") << v.choices[k];
        out << '\n';
    }
}

ConfigSpace read_space(std::istream& in) {
    const auto kv = KvText::parse(in);
    const auto variant = parse_variant(kv.get("variant"));
    std::vector<SpaceVariable> vars;
    for (const auto var : ConfigSpace::variables_of(variant)) vars.push_back({var, kv.get_int_list(name_of(var))});
    for (const auto& e : kv.entries()) {
        if (e.key == "variant") continue;
        const auto var = parse_config_var(e.key);
        if (!var || std::none_of(vars.begin(), vars.end(), [&](const SpaceVariable& v) { return v.var == *var; }))
            throw ParseError("unexpected key '" + e.key + "' for " + std::string(to_string(variant)) + " space", e.line);
    }
    return ConfigSpace(variant, std::move(vars));
}

namespace {
constexpr std::array<std::string_view, 8> kStatsKeys = {"IC", "OC", "OW", "OH", "KW", "KH", "L", "P"};
}

void write_norm_stats(std::ostream& out, const NormStats& stats) {
    for (std::size_t i = 0; i < 6; ++i) out << kStatsKeys[i] << " = " << format_double(stats.layer[i]) << '\n';
    out << "L = " << format_double(stats.latency) << '\n';
    out << "P = " << format_double(stats.power) << '\n';
}

NormStats read_norm_stats(std::istream& in) {
    const auto kv = KvText::parse(in);
    NormStats s;
    for (std::size_t i = 0; i < 6; ++i) s.layer[i] = kv.get_double(kStatsKeys[i]);
    s.latency = kv.get_double("L");
    s.power = kv.get_double("P");
    for (std::size_t i = 0; i < 6; ++i)
        if (!(s.layer[i] > 0.0)) throw ParseError(std::string(kStatsKeys[i]) + " standard deviation must be > 0");
    if (!(s.latency > 0.0) || !(s.power > 0.0)) throw ParseError("objective standard deviations must be > 0");
    return s;
}

double draw_noise(Rng& rng) {
    constexpr double kUpper = 0.1;
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * kUpper;
    return u < kUpper ? u : std::nextafter(kUpper, 0.0);
}

namespace {

void check_stats(const NormStats& stats) {
    for (double s : stats.layer)
        if (!(s > 0.0)) throw InputError("normalization statistics missing or non-positive");
    if (!(stats.latency > 0.0) || !(stats.power > 0.0)) throw InputError("normalization statistics missing or non-positive");
}

std::vector<double> conditioning(const ConvLayer& layer, double lo_norm, double po_norm, const NormStats& stats,
                                 std::size_t noise_length, Rng& rng) {
    std::vector<double> v;
    v.reserve(kConditionFeatures + noise_length);
    const auto dims = layer.as_array();
    for (std::size_t i = 0; i < 6; ++i) v.push_back(static_cast<double>(dims[i]) / stats.layer[i]);
    v.push_back(lo_norm);
    v.push_back(po_norm);
    for (std::size_t i = 0; i < noise_length; ++i) v.push_back(draw_noise(rng));
    return v;
}

}  // namespace

std::vector<double> encode_conditioning(const ConvLayer& layer, double latency, double power,
                                        const NormStats& stats, std::size_t noise_length, Rng& rng) {
    check_stats(stats);
    if (!(latency > 0.0) || !(power > 0.0)) throw InputError("objectives must be > 0");
    return conditioning(layer, latency / stats.latency, power / stats.power, stats, noise_length, rng);
}

std::vector<double> encode_task_conditioning(const DseTask& task, const NormStats& stats,
                                             std::size_t noise_length, Rng& rng) {
    check_stats(stats);
    if (!(task.lo > 0.0) || !(task.po > 0.0)) throw InputError("objectives must be > 0");
    return conditioning(task.layer, task.lo, task.po, stats, noise_length, rng);
}

std::vector<double> encode_onehot(const Configuration& config, const ConfigSpace& space) {
    std::vector<double> out(space.onehot_width(), 0.0);
    for (std::size_t p = 0; p < space.num_variables(); ++p) {
        const auto var = space.variables()[p].var;
        const int idx = space.choice_index(p, config[var]);
        if (idx < 0)
            throw EncodingError(std::string(name_of(var)) + " = " + std::to_string(config[var]) + " is not in its choice list");
        out[space.block_offset(p) + static_cast<std::size_t>(idx)] = 1.0;
    }
    return out;
}

ChoiceSets decode_onehot(std::span<const double> probs, const ConfigSpace& space, double threshold) {
    if (probs.size() != space.onehot_width())
        throw InputError("probability vector has length " + std::to_string(probs.size()) + ", expected " +
                         std::to_string(space.onehot_width()));
    ChoiceSets sets(space.num_variables());
    for (std::size_t p = 0; p < space.num_variables(); ++p) {
        const std::size_t off = space.block_offset(p);
        const std::size_t len = space.variables()[p].choices.size();
        std::size_t best = 0;
        for (std::size_t k = 0; k < len; ++k) {
            if (probs[off + k] > threshold) sets[p].push_back({k, probs[off + k]});
            if (probs[off + k] > probs[off + best]) best = k;
        }
        if (sets[p].empty()) sets[p].push_back({best, probs[off + best]});
    }
    return sets;
}

Configuration decode_argmax(std::span<const double> probs, const ConfigSpace& space) {
    if (probs.size() != space.onehot_width()) throw InputError("probability vector length does not match the space");
    std::vector<std::size_t> idx(space.num_variables());
    for (std::size_t p = 0; p < space.num_variables(); ++p) {
        const std::size_t off = space.block_offset(p);
        std::size_t best = 0;
        for (std::size_t k = 1; k < space.variables()[p].choices.size(); ++k)
            if (probs[off + k] > probs[off + best]) best = k;
        idx[p] = best;
    }
    return space.make(idx);
}

namespace {

using Tuple = std::array<std::size_t, kNumConfigVars>;

struct Ranked {
    double score;
    Tuple ranks;
    Tuple indices;
};

// Best-first enumeration of the product in descending score. Each tuple has a unique
// parent (decrement its last non-zero rank), so no visited set is needed.
std::vector<Tuple> top_combinations(const ChoiceSets& sorted, std::size_t cap) {
    const std::size_t n = sorted.size();
    auto make = [&](const Tuple& ranks) {
        Ranked r{1.0, ranks, {}};
        for (std::size_t p = 0; p < n; ++p) {
            r.score *= sorted[p][ranks[p]].probability;
            r.indices[p] = sorted[p][ranks[p]].index;
        }
        return r;
    };
    auto worse = [](const Ranked& a, const Ranked& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.indices > b.indices;
    };
    std::vector<Ranked> storage;
    storage.reserve(cap * 2);
    std::priority_queue<Ranked, std::vector<Ranked>, decltype(worse)> heap(worse, std::move(storage));
    heap.push(make(Tuple{}));
    std::vector<Tuple> out;
    out.reserve(cap);
    while (!heap.empty() && out.size() < cap) {
        const Ranked top = heap.top();
        heap.pop();
        std::size_t last = 0;
        for (std::size_t p = 0; p < n; ++p)
            if (top.ranks[p] != 0) last = p;
        for (std::size_t p = last; p < n; ++p) {
            if (top.ranks[p] + 1 >= sorted[p].size()) continue;
            auto next = top.ranks;
            ++next[p];
            heap.push(make(next));
        }
        out.push_back(top.indices);
    }
    return out;
}

}  // namespace

std::vector<Configuration> candidate_product(const ChoiceSets& choices, const ConfigSpace& space, std::size_t cap) {
    if (choices.size() != space.num_variables()) throw InputError("choice sets do not match the space");
    std::uint64_t total = 1;
    bool overflow = false;
    for (const auto& c : choices) {
        if (c.empty()) throw InputError("every variable needs at least one choice");
        if (total > std::numeric_limits<std::uint64_t>::max() / c.size()) overflow = true;
        else total *= c.size();
    }

    const std::size_t n = choices.size();
    std::vector<Tuple> tuples;
    if (!overflow && total <= cap) {
        ChoiceSets ascending = choices;
        for (auto& c : ascending)
            std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
        Tuple pos{};
        tuples.reserve(static_cast<std::size_t>(total));
        while (true) {
            Tuple idx{};
            for (std::size_t p = 0; p < n; ++p) idx[p] = ascending[p][pos[p]].index;
            tuples.push_back(idx);
            bool wrapped = true;
            for (std::size_t p = n; p-- > 0;) {
                if (++pos[p] < ascending[p].size()) {
                    wrapped = false;
                    break;
                }
                pos[p] = 0;
            }
            if (wrapped) break;
        }
    } else {
        ChoiceSets sorted = choices;
        for (auto& c : sorted)
            std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
                return a.probability != b.probability ? a.probability > b.probability : a.index < b.index;
            });
        tuples = top_combinations(sorted, cap);
        std::sort(tuples.begin(), tuples.end());
    }

    std::vector<Configuration> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) out.push_back(space.make(std::span<const std::size_t>(t.data(), n)));
    return out;
}

}  // namespace gandse
