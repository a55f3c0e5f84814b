#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gandse/accel_model.hpp"
#include "gandse/config_space.hpp"
#include "gandse/dataset.hpp"
#include "gandse/neuralnet.hpp"

namespace gandse {

/// Network sizes and learning rates of the generator/discriminator pair.
struct ArchProfile {
    std::size_t g_hidden_layers = 4;
    std::size_t g_width = 256;
    std::size_t d_hidden_layers = 4;
    std::size_t d_width = 256;
    double lr_g = 1e-4;
    double lr_d = 1e-4;

    /// 4 x 256 networks for desktop-scale runs.
    static ArchProfile desk();
    /// Full-scale sizes for a variant (2048-wide, 11 or 14 hidden layers).
    static ArchProfile paper(Variant variant);
    static ArchProfile named(std::string_view name, Variant variant);
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    double w_critic = 0.5;
    double lr_g = 1e-4;
    double lr_d = 1e-4;
    double threshold = 0.2;
    std::uint64_t seed = 1;
    std::size_t noise_length = kDefaultNoiseLength;
    double clip_norm = 5.0;

    /// Throws InputError when a field is out of range.
    void validate() const;
};

/// Per-epoch means of the configuration, critic and discriminator losses.
struct LossRecord {
    std::size_t epoch = 0;
    double loss_config = 0.0;
    double loss_critic = 0.0;
    double loss_dis = 0.0;

    bool operator==(const LossRecord&) const = default;
};

void write_loss_history(std::ostream& out, std::span<const LossRecord> history);

std::vector<std::size_t> generator_sizes(const ConfigSpace& space, std::size_t hidden_layers, std::size_t width,
                                         std::size_t noise_length = kDefaultNoiseLength);
std::vector<std::size_t> discriminator_sizes(const ConfigSpace& space, std::size_t hidden_layers, std::size_t width);

struct GanPair {
    nn::Mlp generator;
    nn::Mlp discriminator;
};

GanPair make_gan(const ConfigSpace& space, const ArchProfile& profile, std::uint64_t seed,
                 std::size_t noise_length = kDefaultNoiseLength);

/// What one training step did, for logging and instrumentation.
struct BatchTrace {
    std::vector<std::size_t> samples;  ///< dataset indices in the batch
    std::vector<bool> satisfied;       ///< branch taken per sample (argmax config met both objectives)
    double loss_config = 0.0;
    double loss_critic = 0.0;
    double loss_dis = 0.0;
};

using BatchObserver = std::function<void(const BatchTrace&)>;

enum class TrainingMode : std::uint8_t {
    adversarial,  ///< generator + discriminator with the satisfaction branch
    supervised,   ///< configuration loss on every sample, no discriminator
};

/// Mini-batch trainer shared by the adversarial scheme and the supervised MLP baseline.
///
/// Every epoch shuffles the training set with the trainer's seeded stream; each sample's
/// conditioning noise is redrawn on every forward pass.
class Trainer {
public:
    /// `discriminator` may be null only in supervised mode.
    Trainer(const Dataset& train, nn::Mlp& generator, nn::Mlp* discriminator, const DesignModel& model,
            TrainConfig config, TrainingMode mode);

    /// One optimizer step on the given dataset rows.
    BatchTrace step(std::span<const std::size_t> batch);
    LossRecord run_epoch(std::size_t epoch);
    std::vector<LossRecord> run(const BatchObserver& observer = {});

    const TrainConfig& config() const { return config_; }

private:
    const Dataset& train_;
    nn::Mlp& g_;
    nn::Mlp* d_;
    const DesignModel& model_;
    TrainConfig config_;
    TrainingMode mode_;
    Rng rng_;
    nn::AdamState g_state_;
    nn::AdamState d_state_;
    std::vector<std::vector<double>> targets_;  ///< one-hot configuration per sample
    BatchObserver observer_;
};

/// Adversarial training. Returns one loss record per epoch.
std::vector<LossRecord> train_gan(const Dataset& train, nn::Mlp& generator, nn::Mlp& discriminator,
                                  const DesignModel& model, const TrainConfig& config,
                                  const BatchObserver& observer = {});

/// Normalized metrics of a configuration, or nullopt when infeasible.
struct NormalizedMetrics {
    double latency = 0.0;
    double power = 0.0;
    DesignMetrics raw;
};

std::optional<NormalizedMetrics> normalized_metrics(const DesignModel& model, const NormStats& stats,
                                                    const ConvLayer& layer, const Configuration& config);

/// Smallest choice for every tile variable; always fits the default SRAM and tile lists.
Configuration with_minimal_tiles(const Configuration& config, const ConfigSpace& space);

struct ExploreOptions {
    double threshold = 0.2;
    std::size_t cap = kDefaultCandidateCap;
    std::size_t noise_length = kDefaultNoiseLength;
    std::uint64_t seed = 1;
};

/// Runs the generator on a task, applies probability-threshold extraction, expands the
/// product, and drops infeasible combinations. Never empty: falls back to the argmax
/// configuration, then to the argmax with minimal tiles.
std::vector<Configuration> generate_candidates(const nn::Mlp& generator, const DseTask& task, const NormStats& stats,
                                               const DesignModel& model, const ExploreOptions& options);

struct SelectionResult {
    Configuration config;
    double latency = 0.0;  ///< normalized
    double power = 0.0;    ///< normalized
    DesignMetrics raw;
    bool satisfied = false;  ///< latency <= LO and power <= PO
    std::size_t candidates_examined = 0;
    double seconds = 0.0;    ///< wall clock of the exploration, when measured
};

/// Latency/power of one candidate, in the task's units.
struct MetricPair {
    double latency = 0.0;
    double power = 0.0;
};

/// Running-optimum selection over precomputed metrics: the first pair seeds the optimum;
/// a later pair replaces it when (1) both optima miss, or both meet, their objectives and
/// the pair is strictly better in both; (2) only latency misses and the pair has lower
/// latency with power within PO; (3) the mirror for power. Returns the chosen index.
/// Throws InputError on an empty list.
std::size_t select_index(std::span<const MetricPair> metrics, double lo, double po);

/// Running-optimum design selector. Candidates are scanned in order; the first feasible one
/// seeds the optimum, later ones replace it under the three update scenarios.
/// Throws InputError when no candidate is feasible.
SelectionResult select_design(std::span<const Configuration> candidates, const DseTask& task,
                              const DesignModel& model, const NormStats& stats);

/// generate_candidates followed by select_design, with timing.
SelectionResult explore(const nn::Mlp& generator, const DseTask& task, const NormStats& stats,
                        const DesignModel& model, const ExploreOptions& options);

}  // namespace gandse
