#include "gandse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <tuple>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

std::vector<DseTask> make_tasks(const Dataset& test, const TaskOptions& options, std::uint64_t seed) {
    if (test.samples.empty()) throw InputError("cannot build tasks from an empty test set");
    std::vector<DseTask> tasks;
    tasks.reserve(test.samples.size());
    if (options.mode == TaskMode::exact) {
        for (const auto& s : test.samples) tasks.push_back({s.layer, s.latency_norm, s.power_norm});
        return tasks;
    }
    if (!(options.factor_min > 0.0) || options.factor_max < options.factor_min)
        throw InputError("relaxation factors must satisfy 0 < min <= max");
    Rng rng(seed);
    std::uniform_real_distribution<double> factor(options.factor_min, options.factor_max);
    for (const auto& s : test.samples) {
        double fl = options.factor_min, fp = options.factor_min;
        if (options.factor_max > options.factor_min) {
            fl = factor(rng);
            fp = factor(rng);
        }
        tasks.push_back({s.layer, s.latency_norm * fl, s.power_norm * fp});
    }
    return tasks;
}

bool is_satisfied(double latency, double power, double lo, double po, double noise) {
    return latency <= (1.0 + noise) * lo && power <= (1.0 + noise) * po;
}

std::optional<double> improvement_ratio(double latency, double power, double lo, double po) {
    if (!(latency <= lo && power <= po)) return std::nullopt;
    const double dl = (latency - lo) / lo;
    const double dp = (power - po) / po;
    return std::sqrt(0.5 * (dl * dl + dp * dp));
}

namespace {

double sorted_sum(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

double population_std(std::vector<double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = sorted_sum(xs) / n;
    for (auto& x : xs) x = (x - mean) * (x - mean);
    return std::sqrt(sorted_sum(std::move(xs)) / n);
}

}  // namespace

ErrorStats error_stats(std::span<const SelectionResult> results, std::span<const DseTask> tasks) {
    if (results.size() != tasks.size()) throw InputError("results and tasks are misaligned");
    if (results.size() < 2) throw InputError("error statistics need at least 2 results");
    std::vector<double> le, pe;
    for (std::size_t i = 0; i < results.size(); ++i) {
        le.push_back((results[i].latency - tasks[i].lo) / tasks[i].lo);
        pe.push_back((results[i].power - tasks[i].po) / tasks[i].po);
    }
    return {population_std(std::move(le)), population_std(std::move(pe))};
}

std::vector<ObjectivePoint> objective_points(const Dataset& dataset) {
    std::vector<ObjectivePoint> pts;
    pts.reserve(dataset.samples.size());
    for (const auto& s : dataset.samples) pts.push_back({s.latency_norm, s.power_norm});
    return pts;
}

std::vector<ObjectivePoint> pareto_frontiers(std::span<const ObjectivePoint> points) {
    std::vector<ObjectivePoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<ObjectivePoint> front;
    double min_power = std::numeric_limits<double>::infinity();
    for (const auto& p : sorted) {
        // Every earlier point has latency <= p.latency, so p survives only with strictly lower power.
        if (p.power < min_power) {
            front.push_back(p);
            min_power = p.power;
        }
    }
    return front;
}

double task_difficulty(const DseTask& task, std::span<const ObjectivePoint> frontiers) {
    if (frontiers.empty()) throw InputError("difficulty needs at least one frontier point");
    const ObjectivePoint* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    // Distances within a relative 1e-12 count as tied, so rounding cannot break a tie
    // differently once the data is rescaled.
    for (const auto& f : frontiers) {
        const double d = std::hypot(task.lo - f.latency, task.po - f.power);
        const bool tied = nearest && std::abs(d - best) <= kDistanceTieTolerance * std::max(d, best);
        if ((d < best && !tied) || (tied && f < *nearest)) {
            best = d;
            nearest = &f;
        }
    }
    return best / std::hypot(nearest->latency, nearest->power);
}

EvalReport build_report(std::span<const MethodResults> methods, std::span<const DseTask> tasks,
                        std::span<const ObjectivePoint> dataset_points) {
    if (tasks.empty()) throw InputError("no tasks to report on");
    const auto frontiers = pareto_frontiers(dataset_points);

    // Hardest first; ties resolved by the task's own values so the ranking ignores input order.
    std::vector<std::tuple<double, double, double, std::size_t>> ranked;
    ranked.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i)
        ranked.emplace_back(task_difficulty(tasks[i], frontiers), tasks[i].lo, tasks[i].po, i);

    EvalReport report;
    for (const auto& m : methods) {
        if (m.results.size() != tasks.size())
            throw InputError("method '" + m.name + "' has " + std::to_string(m.results.size()) + " results for " +
                             std::to_string(tasks.size()) + " tasks");
        MethodReport r;
        r.name = m.name;
        r.tasks = tasks.size();
        std::vector<bool> sat(tasks.size());
        std::vector<double> ratios, candidates, seconds;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            const auto& res = m.results[i];
            const auto& t = tasks[i];
            sat[i] = is_satisfied(res.latency, res.power, t.lo, t.po);
            if (sat[i]) ++r.satisfied;
            if (const auto ratio = improvement_ratio(res.latency, res.power, t.lo, t.po)) ratios.push_back(*ratio);
            candidates.push_back(static_cast<double>(res.candidates_examined));
            seconds.push_back(res.seconds);
        }
        if (!ratios.empty()) r.mean_improvement = sorted_sum(ratios) / static_cast<double>(ratios.size());
        if (tasks.size() >= 2) r.errors = error_stats(m.results, tasks);
        r.mean_candidates = sorted_sum(candidates) / static_cast<double>(tasks.size());
        r.mean_seconds = sorted_sum(seconds) / static_cast<double>(tasks.size());

        auto order = ranked;
        std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            const auto ka = std::make_tuple(std::get<0>(a), std::get<1>(a), std::get<2>(a),
                                            m.results[std::get<3>(a)].latency, m.results[std::get<3>(a)].power);
            const auto kb = std::make_tuple(std::get<0>(b), std::get<1>(b), std::get<2>(b),
                                            m.results[std::get<3>(b)].latency, m.results[std::get<3>(b)].power);
            return ka < kb;
        });
        for (std::size_t c = 0; c < kCurvePercents.size(); ++c) {
            const auto k = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(static_cast<double>(kCurvePercents[c]) / 100.0 *
                                                      static_cast<double>(tasks.size()))));
            std::size_t hits = 0;
            for (std::size_t j = 0; j < k; ++j) hits += sat[std::get<3>(order[j])] ? 1 : 0;
            r.difficulty_curve[c] = static_cast<double>(hits) / static_cast<double>(k);
        }
        report.methods.push_back(std::move(r));
    }
    return report;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
    out << std::left << std::setw(14) << "Method" << std::right << std::setw(16) << "# Sat. Results" << std::setw(14)
        << "Improvement" << std::setw(12) << "Std(L err)" << std::setw(12) << "Std(P err)" << std::setw(14)
        << "# Cand." << '\n';
    out << std::fixed;
    for (const auto& m : report.methods) {
        const std::string sat = std::to_string(m.satisfied) + "/" + std::to_string(m.tasks);
        out << std::left << std::setw(14) << m.name << std::right << std::setw(16) << sat << std::setw(14);
        if (m.mean_improvement) out << std::setprecision(4) << *m.mean_improvement;
        else out << "-";
        out << std::setw(12) << std::setprecision(4) << m.errors.latency_std << std::setw(12) << m.errors.power_std
            << std::setw(14) << std::setprecision(2) << m.mean_candidates << '\n';
    }
    out << std::defaultfloat;
}

void write_report_kv(std::ostream& out, const EvalReport& report) {
    for (const auto& m : report.methods) {
        const auto& n = m.name;
        out << n << ".satisfied = " << m.satisfied << '\n';
        out << n << ".tasks = " << m.tasks << '\n';
        out << n << ".satisfaction_rate = " << format_double(m.satisfaction_rate()) << '\n';
        out << n << ".improvement_ratio = " << (m.mean_improvement ? format_double(*m.mean_improvement) : "none") << '\n';
        out << n << ".latency_error_std = " << format_double(m.errors.latency_std) << '\n';
        out << n << ".power_error_std = " << format_double(m.errors.power_std) << '\n';
        out << n << ".mean_candidates = " << format_double(m.mean_candidates) << '\n';
        out << n << ".difficulty_curve = ";
        for (std::size_t c = 0; c < kCurvePercents.size(); ++c)
            out << (c ? "," : "") << format_double(m.difficulty_curve[c]);
        out << '\n';
    }
}

void write_difficulty_curves(std::ostream& out, const EvalReport& report) {
    out << "# percent";
    for (const auto& m : report.methods) out << ' ' << m.name;
    out << '\n';
    for (std::size_t c = 0; c < kCurvePercents.size(); ++c) {
        out << kCurvePercents[c];
        for (const auto& m : report.methods) out << ' ' << format_double(m.difficulty_curve[c]);
        out << '\n';
    }
}

void write_report_timing(std::ostream& out, const EvalReport& report) {
    for (const auto& m : report.methods) out << m.name << ".mean_dse_seconds = " << format_double(m.mean_seconds) << '\n';
}

}  // namespace gandse
