#include "gandse/baselines.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "gandse/error.hpp"

namespace gandse {

void SaSchedule::validate() const {
    if (!(t0 > 0.0)) throw InputError("initial temperature must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("cooling factor must be in (0, 1)");
    if (steps_per_temperature < 1) throw InputError("steps per temperature must be >= 1");
    if (!(stop_ratio > 0.0 && stop_ratio < 1.0)) throw InputError("stop ratio must be in (0, 1)");
}

double sa_energy(double latency, double power, double lo, double po) {
    return std::max(0.0, (latency - lo) / lo) + std::max(0.0, (power - po) / po);
}

namespace {

struct State {
    std::vector<std::size_t> indices;
    Configuration config;
    std::optional<NormalizedMetrics> metrics;
    double energy = kInfeasibleEnergy;
};

bool better(const State& a, const State& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.metrics->latency != b.metrics->latency) return a.metrics->latency < b.metrics->latency;
    return a.metrics->power < b.metrics->power;
}

}  // namespace

SaResult sa_search(const DseTask& task, const DesignModel& model, const NormStats& stats, const SaSchedule& schedule,
                   std::uint64_t seed, const std::function<void(const SaMove&)>& observer) {
    schedule.validate();
    if (!(task.lo > 0.0) || !(task.po > 0.0)) throw InputError("objectives must be > 0");
    const auto start_time = std::chrono::steady_clock::now();
    const auto& space = model.space();
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto evaluate = [&](std::vector<std::size_t> idx) {
        State s;
        s.config = space.make(idx);
        s.indices = std::move(idx);
        s.metrics = normalized_metrics(model, stats, task.layer, s.config);
        if (s.metrics) s.energy = sa_energy(s.metrics->latency, s.metrics->power, task.lo, task.po);
        return s;
    };

    State current;
    for (int attempt = 0; attempt < 1000 && !current.metrics; ++attempt) {
        std::vector<std::size_t> idx(space.num_variables());
        for (std::size_t p = 0; p < idx.size(); ++p) {
            std::uniform_int_distribution<std::size_t> pick(0, space.variables()[p].choices.size() - 1);
            idx[p] = pick(rng);
        }
        current = evaluate(std::move(idx));
    }
    if (!current.metrics) throw InputError("no feasible starting configuration found in 1000 draws");

    std::vector<std::size_t> movable;
    for (std::size_t p = 0; p < space.num_variables(); ++p)
        if (space.variables()[p].choices.size() > 1) movable.push_back(p);

    SaResult result;
    State best = current;
    double temperature = schedule.t0;
    const double stop = schedule.stop_ratio * schedule.t0;
    while (current.energy > 0.0 && temperature >= stop && !movable.empty()) {
        for (std::size_t k = 0; k < schedule.steps_per_temperature && current.energy > 0.0; ++k) {
            std::uniform_int_distribution<std::size_t> pick_var(0, movable.size() - 1);
            const std::size_t p = movable[pick_var(rng)];
            const std::size_t len = space.variables()[p].choices.size();
            auto idx = current.indices;
            if (idx[p] == 0) idx[p] = 1;
            else if (idx[p] + 1 == len) idx[p] -= 1;
            else idx[p] += (rng() & 1U) ? 1 : -1;

            State proposal = evaluate(std::move(idx));
            const double delta = proposal.energy - current.energy;
            bool accept = delta <= 0.0;
            if (!accept && proposal.metrics) accept = unit(rng) < std::exp(-delta / temperature);
            ++result.moves;
            if (observer) observer({temperature, delta, accept});
            if (!accept) continue;
            current = std::move(proposal);
            if (better(current, best)) best = current;
        }
        if (current.energy > 0.0) temperature *= schedule.alpha;
    }

    result.stopped_on_satisfaction = best.energy == 0.0;
    result.final_temperature = temperature;
    result.energy = best.energy;
    auto& sel = result.selection;
    sel.config = best.config;
    sel.latency = best.metrics->latency;
    sel.power = best.metrics->power;
    sel.raw = best.metrics->raw;
    sel.satisfied = sel.latency <= task.lo && sel.power <= task.po;
    sel.candidates_examined = result.moves + 1;
    sel.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return result;
}

std::size_t parity_width(std::size_t input, std::size_t output, std::size_t hidden_layers,
                         std::size_t target_parameters) {
    if (hidden_layers == 0) throw InputError("a width-matched MLP needs at least one hidden layer");
    auto count = [&](std::size_t w) {
        return input * w + w + (hidden_layers - 1) * (w * w + w) + w * output + output;
    };
    std::size_t width = 1;
    while (count(width) < target_parameters) ++width;
    return width;
}

nn::Mlp make_large_mlp(const ConfigSpace& space, std::size_t hidden_layers, std::size_t target_parameters,
                       std::uint64_t seed, std::size_t noise_length) {
    const std::size_t input = kConditionFeatures + noise_length;
    const std::size_t width = parity_width(input, space.onehot_width(), hidden_layers, target_parameters);
    Rng rng(seed);
    return nn::Mlp::random(generator_sizes(space, hidden_layers, width, noise_length), nn::Head::grouped(space), rng);
}

std::vector<LossRecord> train_mlp_only(const Dataset& train, nn::Mlp& mlp, const DesignModel& model,
                                       const TrainConfig& config, const BatchObserver& observer) {
    Trainer trainer(train, mlp, nullptr, model, config, TrainingMode::supervised);
    return trainer.run(observer);
}

}  // namespace gandse
