#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "gandse/gan_dse.hpp"

namespace gandse {

/// Geometric cooling schedule. Annealing stops once T < stop_ratio * t0.
struct SaSchedule {
    double t0 = 1.0;
    double alpha = 0.95;
    std::size_t steps_per_temperature = 10;
    double stop_ratio = 3e-8;

    void validate() const;
};

/// Sum of relative objective violations; zero exactly when both objectives are met.
double sa_energy(double latency, double power, double lo, double po);

inline constexpr double kInfeasibleEnergy = std::numeric_limits<double>::infinity();

/// One Metropolis decision, reported to an optional observer.
struct SaMove {
    double temperature;
    double delta;   ///< proposed energy minus current energy
    bool accepted;
};

struct SaResult {
    SelectionResult selection;
    double energy = 0.0;             ///< energy of the returned configuration
    double final_temperature = 0.0;
    bool stopped_on_satisfaction = false;
    std::size_t moves = 0;
};

/// Simulated annealing over the model's design space for one task. Neighbors change one
/// uniformly chosen variable to an adjacent choice; infeasible points have infinite energy.
/// Throws InputError when 1000 uniform draws find no feasible start.
SaResult sa_search(const DseTask& task, const DesignModel& model, const NormStats& stats, const SaSchedule& schedule,
                   std::uint64_t seed, const std::function<void(const SaMove&)>& observer = {});

/// Smallest hidden width whose MLP has at least `target_parameters` parameters.
std::size_t parity_width(std::size_t input, std::size_t output, std::size_t hidden_layers,
                         std::size_t target_parameters);

/// Supervised generator sized to match the parameter count of a GAN pair.
nn::Mlp make_large_mlp(const ConfigSpace& space, std::size_t hidden_layers, std::size_t target_parameters,
                       std::uint64_t seed, std::size_t noise_length = kDefaultNoiseLength);

/// Configuration loss on every sample; same batching, noise and optimizer as train_gan.
std::vector<LossRecord> train_mlp_only(const Dataset& train, nn::Mlp& mlp, const DesignModel& model,
                                       const TrainConfig& config, const BatchObserver& observer = {});

}  // namespace gandse
