#include "gandse/accel_model.hpp"

#include <algorithm>
#include <array>

#include "gandse/error.hpp"

namespace gandse {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

struct TileDim {
    ConfigVar tile;
    std::int64_t ConvLayer::*dim;
    std::string_view dim_name;
};

constexpr std::array<TileDim, 6> kTileDims = {{
    {ConfigVar::tic, &ConvLayer::ic, "IC"},
    {ConfigVar::toc, &ConvLayer::oc, "OC"},
    {ConfigVar::tow, &ConvLayer::ow, "OW"},
    {ConfigVar::toh, &ConvLayer::oh, "OH"},
    {ConfigVar::tkw, &ConvLayer::kw, "KW"},
    {ConfigVar::tkh, &ConvLayer::kh, "KH"},
}};

void append_sram_violations(const TileGeometry& g, const Configuration& c, std::vector<std::string>& out) {
    if (2 * g.input_words > c[ConfigVar::iss]) out.emplace_back("input tile overflows ISS");
    if (2 * g.weight_words > c[ConfigVar::wss]) out.emplace_back("weight tile overflows WSS");
    if (2 * g.output_words > c[ConfigVar::oss]) out.emplace_back("output tile overflows OSS");
}

}  // namespace

void PowerCoefficients::validate() const {
    for (double v : {e_mac, e_sram, e_dram, c_pe, c_sram, c_base})
        if (!(v > 0.0)) throw InputError("power coefficients must all be > 0");
}

TileGeometry tile_geometry(const ConvLayer& layer, const Configuration& c) {
    using V = ConfigVar;
    for (const auto& td : kTileDims)
        if (c[td.tile] < 1) throw InfeasibleError(std::string(name_of(td.tile)) + " must be >= 1");
    if (!layer.valid()) throw InfeasibleError("layer parameters must be >= 1");
    TileGeometry g;
    g.input_words = c[V::tow] * c[V::toh] * c[V::tic] * c[V::tkw] * c[V::tkh];
    g.weight_words = c[V::tic] * c[V::tkw] * c[V::tkh] * c[V::toc];
    g.output_words = c[V::tow] * c[V::toh] * c[V::toc];
    g.tile_macs = g.output_words * c[V::tic] * c[V::tkw] * c[V::tkh];
    g.reduction_tiles = ceil_div(layer.ic, c[V::tic]) * ceil_div(layer.kw, c[V::tkw]) * ceil_div(layer.kh, c[V::tkh]);
    g.output_tiles = ceil_div(layer.oc, c[V::toc]) * ceil_div(layer.ow, c[V::tow]) * ceil_div(layer.oh, c[V::toh]);
    return g;
}

Feasibility check_feasible(const ConvLayer& layer, const Configuration& config, const ConfigSpace& space) {
    Feasibility f;
    if (!layer.valid()) f.violations.emplace_back("layer parameters must be >= 1");
    for (std::size_t i = 0; i < kNumConfigVars; ++i) {
        const auto var = static_cast<ConfigVar>(i);
        if (config[var] < 1) f.violations.push_back(std::string(name_of(var)) + " not populated");
    }
    if (!f.ok()) return f;

    for (std::size_t p = 0; p < space.num_variables(); ++p) {
        const auto var = space.variables()[p].var;
        if (space.choice_index(p, config[var]) < 0)
            f.violations.push_back(std::string(name_of(var)) + " = " + std::to_string(config[var]) + " not in choice list");
    }
    for (const auto& td : kTileDims) {
        const auto padded = space.padded_dim(td.tile, layer.*td.dim);
        if (config[td.tile] > padded)
            f.violations.push_back(std::string(name_of(td.tile)) + " exceeds padded " + std::string(td.dim_name) + " (" +
                                   std::to_string(config[td.tile]) + " > " + std::to_string(padded) + ")");
    }
    append_sram_violations(tile_geometry(layer, config), config, f.violations);
    return f;
}

std::int64_t im2col_latency(const ConvLayer& layer, const Configuration& c) {
    using V = ConfigVar;
    for (const auto var : {V::pen, V::sdb, V::dsb, V::iss, V::wss, V::oss})
        if (c[var] < 1) throw InfeasibleError(std::string(name_of(var)) + " must be >= 1");
    const auto g = tile_geometry(layer, c);
    std::vector<std::string> overflow;
    append_sram_violations(g, c, overflow);
    if (!overflow.empty()) throw InfeasibleError(overflow.front());

    const std::int64_t load = ceil_div(kWordBytes * (g.input_words + g.weight_words), c[V::dsb]);
    const std::int64_t compute = ceil_div(g.tile_macs, c[V::pen]);
    const std::int64_t writeback = ceil_div(kWordBytes * g.output_words, c[V::sdb]);

    const std::int64_t finalizing = g.output_tiles;
    const std::int64_t accumulating = g.output_tiles * (g.reduction_tiles - 1);
    return load + finalizing * std::max({load, compute, writeback}) + accumulating * std::max(load, compute) + writeback;
}

double im2col_power(const ConvLayer& layer, const Configuration& c, std::int64_t latency,
                    const PowerCoefficients& k) {
    using V = ConfigVar;
    if (latency <= 0) throw InputError("latency must be > 0");
    const auto g = tile_geometry(layer, c);
    const double macs = static_cast<double>(g.padded_macs());
    const double out_writes = static_cast<double>(g.output_tiles) * static_cast<double>(g.output_words);
    const double dram_words =
        static_cast<double>(g.total_tiles()) * static_cast<double>(g.input_words + g.weight_words) + out_writes;

    const double p_static = k.c_base + k.c_pe * static_cast<double>(c[V::pen]) +
                            k.c_sram * static_cast<double>(c[V::iss] + c[V::wss] + c[V::oss]);
    const double e_dyn = k.e_mac * macs + k.e_sram * (2.0 * macs + out_writes) + k.e_dram * dram_words;
    return p_static + e_dyn / static_cast<double>(latency);
}

std::optional<Configuration> dnnweaver_derive_tiling(const ConvLayer& layer, const Configuration& config,
                                                     const ConfigSpace& space, std::int64_t bandwidth) {
    using V = ConfigVar;
    Configuration c = config;
    c[V::sdb] = bandwidth;
    c[V::dsb] = bandwidth;
    for (const auto& td : kTileDims) c[td.tile] = 1;
    if (!check_feasible(layer, c, space).ok()) return std::nullopt;

    constexpr std::array<std::size_t, 6> kGrowthOrder = {1, 3, 2, 0, 5, 4};  // TOC TOH TOW TIC TKH TKW
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto i : kGrowthOrder) {
            const auto& td = kTileDims[i];
            const auto cap = space.padded_dim(td.tile, layer.*td.dim);
            const auto current = c[td.tile];
            const auto next = std::min(current * 2, cap);
            if (next <= current) continue;
            c[td.tile] = next;
            if (check_feasible(layer, c, space).ok()) grew = true;
            else c[td.tile] = current;
        }
    }
    return c;
}

DesignModel::DesignModel(ConfigSpace space, PowerCoefficients coeffs, std::int64_t dnnweaver_bandwidth)
    : space_(std::move(space)), coeffs_(coeffs), bandwidth_(dnnweaver_bandwidth) {
    coeffs_.validate();
    if (bandwidth_ < 1) throw InputError("bandwidth must be >= 1");
}

std::optional<Configuration> DesignModel::complete(const ConvLayer& layer, const Configuration& config) const {
    if (space_.variant() == Variant::dnnweaver) {
        for (const auto var : ConfigSpace::variables_of(Variant::dnnweaver))
            if (config[var] < 1) return std::nullopt;
        return dnnweaver_derive_tiling(layer, config, space_, bandwidth_);
    }
    return config;
}

Evaluation DesignModel::evaluate(const ConvLayer& layer, const Configuration& config) const {
    Evaluation ev;
    if (space_.variant() == Variant::dnnweaver) {
        for (const auto var : ConfigSpace::variables_of(Variant::dnnweaver))
            if (config[var] < 1) ev.violations.push_back(std::string(name_of(var)) + " not populated");
        if (!ev.violations.empty()) return ev;
    }
    const auto full = complete(layer, config);
    if (!full) {
        ev.violations.emplace_back("no feasible tiling fits the SRAMs");
        return ev;
    }
    auto f = check_feasible(layer, *full, space_);
    if (!f.ok()) {
        ev.violations = std::move(f.violations);
        return ev;
    }
    const auto latency = im2col_latency(layer, *full);
    ev.metrics = DesignMetrics{latency, im2col_power(layer, *full, latency, coeffs_)};
    return ev;
}

std::optional<DesignMetrics> DesignModel::metrics(const ConvLayer& layer, const Configuration& config) const {
    return evaluate(layer, config).metrics;
}

bool DesignModel::feasible(const ConvLayer& layer, const Configuration& config) const {
    return evaluate(layer, config).feasible();
}

Evaluation design_metrics(const ConfigSpace& space, const ConvLayer& layer, const Configuration& config,
                          const PowerCoefficients& coeffs) {
    return DesignModel(space, coeffs).evaluate(layer, config);
}

}  // namespace gandse
