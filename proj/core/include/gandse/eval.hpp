#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gandse/dataset.hpp"
#include "gandse/gan_dse.hpp"

namespace gandse {

enum class TaskMode : std::uint8_t { exact, relaxed };

struct TaskOptions {
    TaskMode mode = TaskMode::exact;
    double factor_min = 1.0;  ///< relaxed mode: objectives scaled by U[factor_min, factor_max]
    double factor_max = 1.0;
};

/// One task per test sample with that sample's normalized metrics as objectives, each
/// objective optionally scaled by an independent seeded factor.
std::vector<DseTask> make_tasks(const Dataset& test, const TaskOptions& options, std::uint64_t seed);

inline constexpr double kSatisfactionNoise = 0.01;

bool is_satisfied(double latency, double power, double lo, double po, double noise = kSatisfactionNoise);

/// RMS relative margin sqrt(((L-LO)/LO)^2/2 + ((P-PO)/PO)^2/2); only defined when both
/// objectives are met without tolerance.
std::optional<double> improvement_ratio(double latency, double power, double lo, double po);

struct ErrorStats {
    double latency_std = 0.0;
    double power_std = 0.0;
};

/// Population standard deviation of (L-LO)/LO and (P-PO)/PO over all results.
ErrorStats error_stats(std::span<const SelectionResult> results, std::span<const DseTask> tasks);

struct ObjectivePoint {
    double latency = 0.0;
    double power = 0.0;

    auto operator<=>(const ObjectivePoint&) const = default;
};

std::vector<ObjectivePoint> objective_points(const Dataset& dataset);

/// Points not dominated by any other point (another point no worse in both objectives and
/// better in one). Duplicates collapse to one. Sorted by ascending latency.
std::vector<ObjectivePoint> pareto_frontiers(std::span<const ObjectivePoint> points);

/// Euclidean distance from (LO, PO) to the nearest frontier point, divided by that point's
/// norm. Ties (distances within kDistanceTieTolerance, relative) go to the
/// lexicographically smallest point. Smaller means harder.
inline constexpr double kDistanceTieTolerance = 1e-12;
double task_difficulty(const DseTask& task, std::span<const ObjectivePoint> frontiers);

/// Percentages at which the difficulty curve is sampled.
inline constexpr std::array<int, 10> kCurvePercents = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};

struct MethodReport {
    std::string name;
    std::size_t satisfied = 0;
    std::size_t tasks = 0;
    std::optional<double> mean_improvement;  ///< over results satisfying without tolerance
    ErrorStats errors;
    double mean_candidates = 0.0;
    double mean_seconds = 0.0;
    std::array<double, kCurvePercents.size()> difficulty_curve{};  ///< satisfaction rate over top-n% hardest

    double satisfaction_rate() const { return tasks ? static_cast<double>(satisfied) / static_cast<double>(tasks) : 0.0; }
};

struct EvalReport {
    std::vector<MethodReport> methods;
};

struct MethodResults {
    std::string name;
    std::vector<SelectionResult> results;  ///< aligned with the task list
};

EvalReport build_report(std::span<const MethodResults> methods, std::span<const DseTask> tasks,
                        std::span<const ObjectivePoint> dataset_points);

/// Aligned table with satisfied count, improvement ratio, error spreads and candidate counts.
void write_report_text(std::ostream& out, const EvalReport& report);
/// `method.key = value` lines.
void write_report_kv(std::ostream& out, const EvalReport& report);
/// Difficulty percentage followed by one satisfaction-rate column per method.
void write_difficulty_curves(std::ostream& out, const EvalReport& report);
/// Mean DSE wall clock per method (kept apart so the other report files are reproducible).
void write_report_timing(std::ostream& out, const EvalReport& report);

}  // namespace gandse
