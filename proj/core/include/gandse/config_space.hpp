#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gandse/types.hpp"

namespace gandse {

using Rng = std::mt19937_64;

struct SpaceVariable {
    ConfigVar var;
    std::vector<std::int64_t> choices;  ///< strictly increasing, all >= 1

    bool operator==(const SpaceVariable&) const = default;
};

/// Discrete design space: an ordered list of variables with their choice lists.
///
/// The im2col variant carries all twelve variables in dataset column order; the
/// dnnweaver variant carries PEN, ISS, WSS and OSS only. The one-hot layout is the
/// concatenation of one block per variable, in variable order.
class ConfigSpace {
public:
    ConfigSpace(Variant variant, std::vector<SpaceVariable> variables);

    static ConfigSpace defaults(Variant variant);
    /// Variables a variant must carry, in order.
    static std::vector<ConfigVar> variables_of(Variant variant);

    Variant variant() const { return variant_; }
    const std::vector<SpaceVariable>& variables() const { return variables_; }
    std::size_t num_variables() const { return variables_.size(); }

    std::size_t onehot_width() const { return width_; }
    std::vector<std::size_t> block_lengths() const;
    std::size_t block_offset(std::size_t position) const { return offsets_[position]; }

    /// Position of a variable in this space, or -1 when the variant lacks it.
    int position_of(ConfigVar var) const { return positions_[index_of(var)]; }
    bool has(ConfigVar var) const { return position_of(var) >= 0; }
    const std::vector<std::int64_t>& choices(ConfigVar var) const;

    /// Index of `value` in the choice list, or -1.
    int choice_index(std::size_t position, std::int64_t value) const;

    /// A layer dimension rounded up to the tile choice list: the smallest choice >= dim,
    /// or dim itself when no such choice exists or the space has no list for the tile.
    std::int64_t padded_dim(ConfigVar tile, std::int64_t dim) const;

    /// True when every variable of the space is populated with a member of its choice
    /// list and no other variable is populated.
    bool contains(const Configuration& config) const;

    /// Configuration built from one choice index per variable (space order).
    Configuration make(std::span<const std::size_t> indices) const;

    /// Number of points, saturating at UINT64_MAX.
    std::uint64_t size() const;

    bool operator==(const ConfigSpace&) const = default;

private:
    Variant variant_;
    std::vector<SpaceVariable> variables_;
    std::vector<std::size_t> offsets_;
    std::array<int, kNumConfigVars> positions_{};
    std::size_t width_ = 0;
};

void write_space(std::ostream& out, const ConfigSpace& space);
ConfigSpace read_space(std::istream& in);

/// Population standard deviations used to normalize network parameters and objectives.
struct NormStats {
    std::array<double, 6> layer{};  ///< IC, OC, OW, OH, KW, KH
    double latency = 0.0;
    double power = 0.0;

    bool operator==(const NormStats&) const = default;
};

void write_norm_stats(std::ostream& out, const NormStats& stats);
NormStats read_norm_stats(std::istream& in);

/// Default noise length appended to the conditioning vector.
inline constexpr std::size_t kDefaultNoiseLength = 16;
/// Number of conditioning features before the noise.
inline constexpr std::size_t kConditionFeatures = 8;

/// Uniform draw from [0, 0.1).
double draw_noise(Rng& rng);

/// [ic, oc, ow, oh, kw, kh, LO, PO] each divided by its standard deviation, followed by
/// `noise_length` uniform draws from [0, 0.1). `latency` and `power` are raw model units.
std::vector<double> encode_conditioning(const ConvLayer& layer, double latency, double power,
                                        const NormStats& stats, std::size_t noise_length, Rng& rng);

/// Same layout, for objectives already expressed in normalized units.
std::vector<double> encode_task_conditioning(const DseTask& task, const NormStats& stats,
                                             std::size_t noise_length, Rng& rng);

/// One-hot encoding. Throws EncodingError naming the variable when a value is not a choice.
std::vector<double> encode_onehot(const Configuration& config, const ConfigSpace& space);

struct WeightedChoice {
    std::size_t index;  ///< position in the variable's choice list
    double probability;

    bool operator==(const WeightedChoice&) const = default;
};

/// Per-variable choices, in space order.
using ChoiceSets = std::vector<std::vector<WeightedChoice>>;

/// Probability-threshold extraction: per variable, every choice with probability strictly
/// above `threshold`, in ascending index order; the argmax alone (lowest index on ties)
/// when none qualifies.
ChoiceSets decode_onehot(std::span<const double> probs, const ConfigSpace& space, double threshold);

/// Argmax choice per variable.
Configuration decode_argmax(std::span<const double> probs, const ConfigSpace& space);

inline constexpr std::size_t kDefaultCandidateCap = 100000;

/// Cartesian product of the per-variable choices. When the product exceeds `cap`, only
/// the `cap` combinations with the highest product of probabilities are kept (ties go to
/// the lexicographically smaller index tuple). Output is in lexicographic index order.
std::vector<Configuration> candidate_product(const ChoiceSets& choices, const ConfigSpace& space,
                                             std::size_t cap = kDefaultCandidateCap);

}  // namespace gandse
