#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gandse/accel_model.hpp"
#include "gandse/config_space.hpp"

namespace gandse {

/// One dataset row: a feasible (layer, configuration) pair and its metrics.
struct Sample {
    ConvLayer layer;
    Configuration config;
    std::int64_t latency = 0;   ///< raw cycles
    double power = 0.0;         ///< raw model units
    double latency_norm = 0.0;  ///< latency / stats.latency
    double power_norm = 0.0;    ///< power / stats.power
};

/// Choice list per layer dimension, in IC, OC, OW, OH, KW, KH order.
struct LayerRanges {
    std::array<std::vector<std::int64_t>, 6> dims;

    static LayerRanges defaults();
    std::uint64_t size() const;
};

struct Dataset {
    Variant variant = Variant::im2col;
    std::vector<Sample> samples;
    NormStats stats;
    std::uint64_t seed = 0;

    std::size_t size() const { return samples.size(); }
};

/// `n` distinct feasible points drawn uniformly over ranges x space, raw metrics only,
/// sorted by (layer, configuration). Small products are enumerated exhaustively; large
/// ones are sampled with rejection. Throws InputError when fewer than `n` points exist.
std::vector<Sample> sample_feasible_points(const DesignModel& model, const LayerRanges& ranges, std::size_t n,
                                           std::uint64_t seed);

/// sample_feasible_points followed by normalization over the drawn rows. Requires n >= 2.
Dataset generate_dataset(const DesignModel& model, const LayerRanges& ranges, std::size_t n, std::uint64_t seed);

/// Population standard deviation of each layer parameter and of the raw metrics.
/// Throws InputError for fewer than two rows or a constant feature.
NormStats compute_norm_stats(std::span<const Sample> samples);

/// Recomputes every normalized metric from the raw values and `stats`.
void apply_norm_stats(std::vector<Sample>& samples, const NormStats& stats);

/// Column names of the dataset CSV for a variant.
std::vector<std::string> csv_header(Variant variant);

/// Writes `path` and the statistics sidecar `path + ".stats"`.
void write_csv(const Dataset& dataset, const std::string& path);
/// Reads a dataset written by write_csv. Throws ParseError with the row number on bad input.
Dataset read_csv(const std::string& path, const ConfigSpace& space);
std::string stats_path(const std::string& csv_path);
/// Reads the statistics sidecar next to a dataset CSV (or any stats file).
NormStats read_stats_file(const std::string& path);

/// Disjoint (train, test) partition with `n_test` rows drawn uniformly for the test part.
/// Statistics are recomputed on the training part and applied to both.
std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t n_test, std::uint64_t seed);

}  // namespace gandse
