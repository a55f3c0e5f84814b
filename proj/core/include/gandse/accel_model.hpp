#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gandse/config_space.hpp"
#include "gandse/types.hpp"

namespace gandse {

/// Energy and static-power constants of the power model, in arbitrary consistent units.
struct PowerCoefficients {
    double e_mac = 1.0;      ///< energy per MAC
    double e_sram = 0.5;     ///< energy per SRAM word access
    double e_dram = 10.0;    ///< energy per DRAM word transfer
    double c_pe = 0.002;     ///< static power per PE
    double c_sram = 0.0001;  ///< static power per SRAM word of capacity
    double c_base = 1.0;     ///< constant static power

    /// Throws InputError unless every coefficient is > 0.
    void validate() const;

    bool operator==(const PowerCoefficients&) const = default;
};

struct DesignMetrics {
    std::int64_t latency = 0;  ///< cycles
    double power = 0.0;

    bool operator==(const DesignMetrics&) const = default;
};

/// Result of a feasibility check. Infeasibility is a verdict, not an error.
struct Feasibility {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Bytes per data word.
inline constexpr std::int64_t kWordBytes = 2;
/// DRAM<->SRAM bandwidth of the systolic template, bytes per cycle in both directions.
inline constexpr std::int64_t kDnnWeaverBandwidth = 64;

/// Tile footprint and iteration counts of an output-stationary tiled convolution.
struct TileGeometry {
    std::int64_t input_words = 0;   ///< tow*toh*tic*tkw*tkh
    std::int64_t weight_words = 0;  ///< tic*tkw*tkh*toc
    std::int64_t output_words = 0;  ///< tow*toh*toc
    std::int64_t tile_macs = 0;     ///< tow*toh*toc*tic*tkw*tkh
    std::int64_t reduction_tiles = 0;  ///< ceil(ic/tic)*ceil(kw/tkw)*ceil(kh/tkh)
    std::int64_t output_tiles = 0;     ///< ceil(oc/toc)*ceil(ow/tow)*ceil(oh/toh)

    std::int64_t total_tiles() const { return reduction_tiles * output_tiles; }
    /// MACs of the layer zero-padded up to whole tiles.
    std::int64_t padded_macs() const { return total_tiles() * tile_macs; }
};

/// Requires every tile field to be >= 1; throws InfeasibleError otherwise.
TileGeometry tile_geometry(const ConvLayer& layer, const Configuration& config);

/// Checks that the twelve fields are populated, that members of `space` come from their
/// choice lists, that tiles do not exceed the padded layer dimensions and that
/// double-buffered tiles fit their SRAMs.
Feasibility check_feasible(const ConvLayer& layer, const Configuration& config, const ConfigSpace& space);

/// Three-stage (load, compute, writeback) pipelined tile schedule:
/// T = L1 + sum of per-tile stage maxima + L3, with writeback only on tiles that finish
/// a reduction. Throws InfeasibleError when fields are missing or tiles overflow SRAM.
std::int64_t im2col_latency(const ConvLayer& layer, const Configuration& config);

/// Static plus dynamic power. Throws InputError when latency <= 0.
double im2col_power(const ConvLayer& layer, const Configuration& config, std::int64_t latency,
                    const PowerCoefficients& coeffs);

/// Completes a PEN/ISS/WSS/OSS configuration with fixed bandwidths and a greedy tiling:
/// starting from all-ones, tiles are doubled round-robin in the order TOC, TOH, TOW, TIC,
/// TKH, TKW (each capped at its layer dimension) while the result stays feasible.
/// Returns nullopt when even the all-ones tiling does not fit.
std::optional<Configuration> dnnweaver_derive_tiling(const ConvLayer& layer, const Configuration& config,
                                                     const ConfigSpace& space,
                                                     std::int64_t bandwidth = kDnnWeaverBandwidth);

struct Evaluation {
    std::optional<DesignMetrics> metrics;
    std::vector<std::string> violations;  ///< populated when metrics is empty

    bool feasible() const { return metrics.has_value(); }
};

/// Latency and power models of one accelerator template over one design space.
class DesignModel {
public:
    explicit DesignModel(ConfigSpace space, PowerCoefficients coeffs = {},
                         std::int64_t dnnweaver_bandwidth = kDnnWeaverBandwidth);

    const ConfigSpace& space() const { return space_; }
    Variant variant() const { return space_.variant(); }
    const PowerCoefficients& coefficients() const { return coeffs_; }
    std::int64_t dnnweaver_bandwidth() const { return bandwidth_; }

    Evaluation evaluate(const ConvLayer& layer, const Configuration& config) const;
    /// Metrics of a feasible pair, nullopt otherwise.
    std::optional<DesignMetrics> metrics(const ConvLayer& layer, const Configuration& config) const;
    bool feasible(const ConvLayer& layer, const Configuration& config) const;

    /// The fully populated configuration the formulas are applied to (derived tiling for
    /// the systolic template), or nullopt when no feasible tiling exists.
    std::optional<Configuration> complete(const ConvLayer& layer, const Configuration& config) const;

private:
    ConfigSpace space_;
    PowerCoefficients coeffs_;
    std::int64_t bandwidth_;
};

/// Free-function form of DesignModel::evaluate.
Evaluation design_metrics(const ConfigSpace& space, const ConvLayer& layer, const Configuration& config,
                          const PowerCoefficients& coeffs = {});

}  // namespace gandse
