#include "gandse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

namespace {

// Exhaustive enumeration below this many (layer, configuration) points.
constexpr std::uint64_t kEnumerationLimit = 2'000'000;
constexpr std::uint64_t kMinDrawBudget = 2'000'000;

using Key = std::pair<ConvLayer, Configuration>;

bool by_key(const Sample& a, const Sample& b) {
    return std::tie(a.layer, a.config) < std::tie(b.layer, b.config);
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

Sample make_sample(const ConvLayer& layer, const Configuration& config, const DesignMetrics& m) {
    Sample s;
    s.layer = layer;
    s.config = config;
    s.latency = m.latency;
    s.power = m.power;
    return s;
}

std::vector<Sample> enumerate_all(const DesignModel& model, const LayerRanges& ranges) {
    const auto& space = model.space();
    std::vector<Sample> out;
    std::array<std::size_t, 6> li{};
    while (true) {
        ConvLayer layer;
        std::array<std::int64_t, 6> dims{};
        for (std::size_t d = 0; d < 6; ++d) dims[d] = ranges.dims[d][li[d]];
        layer = ConvLayer::from_array(dims);

        std::vector<std::size_t> ci(space.num_variables(), 0);
        while (true) {
            const auto config = space.make(ci);
            if (const auto m = model.metrics(layer, config)) out.push_back(make_sample(layer, config, *m));
            std::size_t p = ci.size();
            while (p-- > 0) {
                if (++ci[p] < space.variables()[p].choices.size()) break;
                ci[p] = 0;
            }
            if (p == static_cast<std::size_t>(-1)) break;
        }

        std::size_t d = 6;
        while (d-- > 0) {
            if (++li[d] < ranges.dims[d].size()) break;
            li[d] = 0;
        }
        if (d == static_cast<std::size_t>(-1)) break;
    }
    return out;
}

}  // namespace

LayerRanges LayerRanges::defaults() {
    LayerRanges r;
    r.dims[0] = r.dims[1] = {16, 32, 64, 128, 256};
    r.dims[2] = r.dims[3] = {8, 16, 32, 64, 128};
    r.dims[4] = r.dims[5] = {1, 3, 5, 7};
    return r;
}

std::uint64_t LayerRanges::size() const {
    std::uint64_t n = 1;
    for (const auto& d : dims) n = saturating_mul(n, d.size());
    return n;
}

std::vector<Sample> sample_feasible_points(const DesignModel& model, const LayerRanges& ranges, std::size_t n,
                                           std::uint64_t seed) {
    for (std::size_t d = 0; d < 6; ++d) {
        if (ranges.dims[d].empty()) throw InputError(std::string(kLayerFieldNames[d]) + ": empty layer range");
        for (auto v : ranges.dims[d])
            if (v < 1) throw InputError(std::string(kLayerFieldNames[d]) + ": layer range values must be >= 1");
    }
    const auto& space = model.space();
    const std::uint64_t total = saturating_mul(ranges.size(), space.size());
    Rng rng(seed);
    std::vector<Sample> out;

    if (total <= kEnumerationLimit) {
        auto all = enumerate_all(model, ranges);
        if (all.size() < n)
            throw InputError("only " + std::to_string(all.size()) + " feasible points exist, " + std::to_string(n) +
                             " requested");
        std::vector<std::size_t> order(all.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Partial Fisher-Yates: the first n entries are a uniform n-subset.
        for (std::size_t i = 0; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
            std::swap(order[i], order[pick(rng)]);
        }
        for (std::size_t i = 0; i < n; ++i) out.push_back(all[order[i]]);
    } else {
        const std::uint64_t budget = std::max<std::uint64_t>(kMinDrawBudget, saturating_mul(n, 2000));
        std::set<Key> seen;
        std::uint64_t draws = 0;
        std::vector<std::size_t> ci(space.num_variables());
        while (out.size() < n && draws < budget) {
            ++draws;
            std::array<std::int64_t, 6> dims{};
            for (std::size_t d = 0; d < 6; ++d) {
                std::uniform_int_distribution<std::size_t> pick(0, ranges.dims[d].size() - 1);
                dims[d] = ranges.dims[d][pick(rng)];
            }
            for (std::size_t p = 0; p < ci.size(); ++p) {
                std::uniform_int_distribution<std::size_t> pick(0, space.variables()[p].choices.size() - 1);
                ci[p] = pick(rng);
            }
            const auto layer = ConvLayer::from_array(dims);
            const auto config = space.make(ci);
            const auto m = model.metrics(layer, config);
            if (!m) continue;
            if (!seen.emplace(layer, config).second) continue;
            out.push_back(make_sample(layer, config, *m));
        }
        if (out.size() < n)
            throw InputError("found only " + std::to_string(out.size()) + " distinct feasible points in " +
                             std::to_string(draws) + " draws, " + std::to_string(n) + " requested");
    }
    std::sort(out.begin(), out.end(), by_key);
    return out;
}

Dataset generate_dataset(const DesignModel& model, const LayerRanges& ranges, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InputError("a dataset needs at least 2 samples");
    Dataset ds;
    ds.variant = model.variant();
    ds.seed = seed;
    ds.samples = sample_feasible_points(model, ranges, n, seed);
    ds.stats = compute_norm_stats(ds.samples);
    apply_norm_stats(ds.samples, ds.stats);
    return ds;
}

namespace {

double population_std(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / n);
}

}  // namespace

NormStats compute_norm_stats(std::span<const Sample> samples) {
    if (samples.size() < 2) throw InputError("normalization needs at least 2 rows");
    constexpr std::array<std::string_view, 8> kNames = {"IC", "OC", "OW", "OH", "KW", "KH", "L", "P"};
    std::array<std::vector<double>, 8> columns;
    for (const auto& s : samples) {
        const auto dims = s.layer.as_array();
        for (std::size_t d = 0; d < 6; ++d) columns[d].push_back(static_cast<double>(dims[d]));
        columns[6].push_back(static_cast<double>(s.latency));
        columns[7].push_back(s.power);
    }
    std::array<double, 8> std_devs{};
    for (std::size_t f = 0; f < 8; ++f) {
        const auto& col = columns[f];
        if (std::all_of(col.begin(), col.end(), [&](double x) { return x == col.front(); }))
            throw InputError("feature " + std::string(kNames[f]) + " is constant; cannot normalize");
        std_devs[f] = population_std(col);
    }
    NormStats stats;
    std::copy_n(std_devs.begin(), 6, stats.layer.begin());
    stats.latency = std_devs[6];
    stats.power = std_devs[7];
    return stats;
}

void apply_norm_stats(std::vector<Sample>& samples, const NormStats& stats) {
    for (auto& s : samples) {
        s.latency_norm = static_cast<double>(s.latency) / stats.latency;
        s.power_norm = s.power / stats.power;
    }
}

std::vector<std::string> csv_header(Variant variant) {
    std::vector<std::string> h(kLayerFieldNames.begin(), kLayerFieldNames.end());
    for (const auto var : ConfigSpace::variables_of(variant)) h.emplace_back(name_of(var));
    h.emplace_back("L");
    h.emplace_back("P");
    return h;
}

std::string stats_path(const std::string& csv_path) { return csv_path + ".stats"; }

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    const auto header = csv_header(dataset.variant);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    const auto vars = ConfigSpace::variables_of(dataset.variant);
    for (const auto& s : dataset.samples) {
        for (auto v : s.layer.as_array()) out << v << ',';
        for (auto var : vars) out << s.config[var] << ',';
        out << format_double(s.latency_norm) << ',' << format_double(s.power_norm) << '\n';
    }
    if (!out) throw InputError("error writing '" + path + "'");

    std::ofstream side(stats_path(path), std::ios::binary);
    if (!side) throw InputError("cannot write '" + stats_path(path) + "'");
    write_norm_stats(side, dataset.stats);
    side << "seed = " << dataset.seed << '\n';
}

NormStats read_stats_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open statistics file '" + path + "'");
    return read_norm_stats(in);
}

Dataset read_csv(const std::string& path, const ConfigSpace& space) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");

    Dataset ds;
    ds.variant = space.variant();
    {
        const auto kv = KvText::parse_file(stats_path(path));
        std::ifstream side(stats_path(path));
        ds.stats = read_norm_stats(side);
        if (const auto* e = kv.find("seed")) ds.seed = parse_uint(e->value, "seed", e->line);
    }

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
    const auto expected = csv_header(space.variant());
    {
        std::vector<std::string> got;
        std::stringstream ss(std::string(trim(line)));
        std::string cell;
        while (std::getline(ss, cell, ',')) got.emplace_back(trim(cell));
        for (std::size_t i = 0; i < got.size(); ++i)
            if (i >= expected.size() || got[i] != expected[i])
                throw ParseError("unknown column '" + got[i] + "'", 1);
        if (got.size() != expected.size()) throw ParseError("missing columns in header", 1);
    }

    const auto vars = ConfigSpace::variables_of(space.variant());
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            cells.push_back(trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (cells.size() != expected.size())
            throw ParseError("expected " + std::to_string(expected.size()) + " cells, got " + std::to_string(cells.size()), row);

        Sample s;
        std::array<std::int64_t, 6> dims{};
        for (std::size_t d = 0; d < 6; ++d) {
            dims[d] = parse_int(cells[d], expected[d], row);
            if (dims[d] < 1) throw ParseError(expected[d] + " must be >= 1", row);
        }
        s.layer = ConvLayer::from_array(dims);
        for (std::size_t p = 0; p < vars.size(); ++p) {
            const auto value = parse_int(cells[6 + p], expected[6 + p], row);
            if (space.choice_index(p, value) < 0)
                throw ParseError(expected[6 + p] + " = " + std::to_string(value) + " is not in its choice list", row);
            s.config[vars[p]] = value;
        }
        s.latency_norm = parse_double(cells[6 + vars.size()], "L", row);
        s.power_norm = parse_double(cells[7 + vars.size()], "P", row);
        if (!(s.latency_norm > 0.0) || !(s.power_norm > 0.0) || !std::isfinite(s.latency_norm) || !std::isfinite(s.power_norm))
            throw ParseError("L and P must be finite and > 0", row);
        s.latency = std::llround(s.latency_norm * ds.stats.latency);
        s.power = s.power_norm * ds.stats.power;
        ds.samples.push_back(s);
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t n_test, std::uint64_t seed) {
    if (n_test >= dataset.size())
        throw InputError("test size " + std::to_string(n_test) + " must be smaller than the dataset (" +
                         std::to_string(dataset.size()) + ")");
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < n_test; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    std::vector<bool> is_test(dataset.size(), false);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

    Dataset train{dataset.variant, {}, {}, dataset.seed};
    Dataset test{dataset.variant, {}, {}, dataset.seed};
    for (std::size_t i = 0; i < dataset.size(); ++i) (is_test[i] ? test : train).samples.push_back(dataset.samples[i]);
    train.stats = compute_norm_stats(train.samples);
    test.stats = train.stats;
    apply_norm_stats(train.samples, train.stats);
    apply_norm_stats(test.samples, test.stats);
    return {std::move(train), std::move(test)};
}

}  // namespace gandse
