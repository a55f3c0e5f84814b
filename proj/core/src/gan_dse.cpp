#include "gandse/gan_dse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gandse/error.hpp"
#include "gandse/kv_text.hpp"

namespace gandse {

ArchProfile ArchProfile::desk() { return {}; }

ArchProfile ArchProfile::paper(Variant variant) {
    ArchProfile p;
    p.g_width = p.d_width = 2048;
    p.d_hidden_layers = 11;
    if (variant == Variant::im2col) {
        p.g_hidden_layers = 11;
        p.lr_g = p.lr_d = 2e-5;
    } else {
        p.g_hidden_layers = 14;
        p.lr_g = p.lr_d = 2.5e-5;
    }
    return p;
}

ArchProfile ArchProfile::named(std::string_view name, Variant variant) {
    if (name == "desk") return desk();
    if (name == "paper") return paper(variant);
    throw InputError("unknown profile '" + std::string(name) + "' (expected desk or paper)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InputError("epochs must be >= 1");
    if (batch_size < 1) throw InputError("batch size must be >= 1");
    if (!(w_critic >= 0.0)) throw InputError("w_critic must be >= 0");
    if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw InputError("learning rates must be > 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must be in (0, 1)");
    if (!(clip_norm > 0.0)) throw InputError("clip norm must be > 0");
}

void write_loss_history(std::ostream& out, std::span<const LossRecord> history) {
    out << "# epoch loss_config loss_critic loss_dis\n";
    for (const auto& r : history)
        out << r.epoch << ' ' << format_double(r.loss_config) << ' ' << format_double(r.loss_critic) << ' '
            << format_double(r.loss_dis) << '\n';
}

std::vector<std::size_t> generator_sizes(const ConfigSpace& space, std::size_t hidden_layers, std::size_t width,
                                         std::size_t noise_length) {
    std::vector<std::size_t> sizes{kConditionFeatures + noise_length};
    sizes.insert(sizes.end(), hidden_layers, width);
    sizes.push_back(space.onehot_width());
    return sizes;
}

std::vector<std::size_t> discriminator_sizes(const ConfigSpace& space, std::size_t hidden_layers, std::size_t width) {
    std::vector<std::size_t> sizes{kConditionFeatures + space.onehot_width()};
    sizes.insert(sizes.end(), hidden_layers, width);
    sizes.push_back(2);
    return sizes;
}

GanPair make_gan(const ConfigSpace& space, const ArchProfile& profile, std::uint64_t seed, std::size_t noise_length) {
    Rng rng(seed);
    auto g = nn::Mlp::random(generator_sizes(space, profile.g_hidden_layers, profile.g_width, noise_length),
                             nn::Head::grouped(space), rng);
    auto d = nn::Mlp::random(discriminator_sizes(space, profile.d_hidden_layers, profile.d_width),
                             nn::Head::satisfaction(), rng);
    return {std::move(g), std::move(d)};
}

std::optional<NormalizedMetrics> normalized_metrics(const DesignModel& model, const NormStats& stats,
                                                    const ConvLayer& layer, const Configuration& config) {
    const auto m = model.metrics(layer, config);
    if (!m) return std::nullopt;
    return NormalizedMetrics{static_cast<double>(m->latency) / stats.latency, m->power / stats.power, *m};
}

Trainer::Trainer(const Dataset& train, nn::Mlp& generator, nn::Mlp* discriminator, const DesignModel& model,
                 TrainConfig config, TrainingMode mode)
    : train_(train), g_(generator), d_(discriminator), model_(model), config_(config), mode_(mode), rng_(config.seed) {
    config_.validate();
    const auto& space = model.space();
    if (train.variant != space.variant()) throw InputError("dataset variant does not match the design model");
    if (train.samples.empty()) throw InputError("training set is empty");
    if (!(g_.head() == nn::Head::grouped(space))) throw InputError("generator head does not match the design space");
    if (g_.input_size() != kConditionFeatures + config_.noise_length)
        throw InputError("generator input size does not match the conditioning layout");
    if (mode == TrainingMode::adversarial) {
        if (d_ == nullptr) throw InputError("adversarial training needs a discriminator");
        if (!(d_->head() == nn::Head::satisfaction()) || d_->input_size() != kConditionFeatures + space.onehot_width())
            throw InputError("discriminator shape does not match the design space");
        d_state_ = nn::AdamState::for_model(*d_);
    }
    g_state_ = nn::AdamState::for_model(g_);
    targets_.reserve(train.samples.size());
    for (const auto& s : train.samples) targets_.push_back(encode_onehot(s.config, space));
}

BatchTrace Trainer::step(std::span<const std::size_t> batch) {
    using nn::Matrix;
    const auto& space = model_.space();
    const auto blocks = space.block_lengths();
    const auto bsz = static_cast<Eigen::Index>(batch.size());
    const double bs = static_cast<double>(batch.size());
    const auto width = static_cast<Eigen::Index>(space.onehot_width());
    const auto cond = static_cast<Eigen::Index>(kConditionFeatures);

    Matrix g_in(static_cast<Eigen::Index>(g_.input_size()), bsz);
    Matrix targets(width, bsz);
    for (Eigen::Index j = 0; j < bsz; ++j) {
        const auto& s = train_.samples[batch[static_cast<std::size_t>(j)]];
        const DseTask task{s.layer, s.latency_norm, s.power_norm};
        const auto x = encode_task_conditioning(task, train_.stats, config_.noise_length, rng_);
        g_in.col(j) = Eigen::Map<const nn::Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
        targets.col(j) = Eigen::Map<const nn::Vector>(targets_[batch[static_cast<std::size_t>(j)]].data(), width);
    }
    const auto g_fwd = nn::forward(g_, g_in);

    BatchTrace trace;
    trace.samples.assign(batch.begin(), batch.end());
    trace.satisfied.resize(batch.size());
    Matrix config_mask = Matrix::Zero(1, bsz);
    for (Eigen::Index j = 0; j < bsz; ++j) {
        const auto& s = train_.samples[batch[static_cast<std::size_t>(j)]];
        bool sat = false;
        if (mode_ == TrainingMode::adversarial) {
            const nn::Vector p = g_fwd.probs.col(j);
            const auto config = decode_argmax(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), space);
            if (const auto m = normalized_metrics(model_, train_.stats, s.layer, config))
                sat = m->latency <= s.latency_norm && m->power <= s.power_norm;
        }
        trace.satisfied[static_cast<std::size_t>(j)] = sat;
        config_mask(0, j) = sat ? 0.0 : 1.0;
    }

    // Configuration loss: only where the generated configuration misses an objective.
    Matrix dg_logits = (g_fwd.probs - targets) / static_cast<double>(blocks.size());
    dg_logits.array().rowwise() *= config_mask.row(0).array() / bs;
    {
        Eigen::Index off = 0;
        for (const auto len : blocks) {
            const auto n = static_cast<Eigen::Index>(len);
            for (Eigen::Index j = 0; j < bsz; ++j) {
                if (config_mask(0, j) == 0.0) continue;
                Eigen::Index hot = 0;
                targets.col(j).segment(off, n).maxCoeff(&hot);
                trace.loss_config -= std::log(std::max(g_fwd.probs(off + hot, j), nn::kProbabilityFloor)) /
                                     static_cast<double>(blocks.size()) / bs;
            }
            off += n;
        }
    }

    if (mode_ == TrainingMode::adversarial) {
        Matrix d_in(cond + width, bsz);
        d_in.topRows(cond) = g_in.topRows(cond);
        d_in.bottomRows(width) = g_fwd.probs;
        const auto d_fwd = nn::forward(*d_, d_in);

        Matrix want_true = Matrix::Zero(2, bsz);
        want_true.row(nn::kSatTrue).setOnes();
        Matrix dis_targets = Matrix::Zero(2, bsz);
        for (Eigen::Index j = 0; j < bsz; ++j)
            dis_targets(trace.satisfied[static_cast<std::size_t>(j)] ? nn::kSatTrue : nn::kSatFalse, j) = 1.0;

        const auto critic = nn::cross_entropy(d_fwd.probs, want_true, std::vector<std::size_t>{2});
        const auto dis = nn::cross_entropy(d_fwd.probs, dis_targets, std::vector<std::size_t>{2});
        trace.loss_critic = critic.loss / bs;
        trace.loss_dis = dis.loss / bs;

        if (config_.w_critic != 0.0) {
            Matrix d_input_grad;
            nn::backward(*d_, d_fwd, critic.grad * (config_.w_critic / bs), &d_input_grad, false);
            const Matrix dprobs = d_input_grad.bottomRows(width);
            dg_logits += nn::softmax_backward(g_fwd.probs, dprobs, blocks);
        }

        auto d_grads = nn::backward(*d_, d_fwd, dis.grad / bs);
        nn::clip_global_norm(d_grads, config_.clip_norm);
        auto g_grads = nn::backward(g_, g_fwd, dg_logits);
        nn::clip_global_norm(g_grads, config_.clip_norm);
        nn::adam_step(g_, g_grads, g_state_, config_.lr_g);
        nn::adam_step(*d_, d_grads, d_state_, config_.lr_d);
    } else {
        auto g_grads = nn::backward(g_, g_fwd, dg_logits);
        nn::clip_global_norm(g_grads, config_.clip_norm);
        nn::adam_step(g_, g_grads, g_state_, config_.lr_g);
    }
    if (observer_) observer_(trace);
    return trace;
}

LossRecord Trainer::run_epoch(std::size_t epoch) {
    std::vector<std::size_t> order(train_.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);
    LossRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
        const auto end = std::min(order.size(), start + config_.batch_size);
        const auto trace = step(std::span<const std::size_t>(order.data() + start, end - start));
        rec.loss_config += trace.loss_config;
        rec.loss_critic += trace.loss_critic;
        rec.loss_dis += trace.loss_dis;
        ++batches;
    }
    rec.loss_config /= static_cast<double>(batches);
    rec.loss_critic /= static_cast<double>(batches);
    rec.loss_dis /= static_cast<double>(batches);
    return rec;
}

std::vector<LossRecord> Trainer::run(const BatchObserver& observer) {
    observer_ = observer;
    std::vector<LossRecord> history;
    for (std::size_t e = 1; e <= config_.epochs; ++e) history.push_back(run_epoch(e));
    observer_ = nullptr;
    return history;
}

std::vector<LossRecord> train_gan(const Dataset& train, nn::Mlp& generator, nn::Mlp& discriminator,
                                  const DesignModel& model, const TrainConfig& config, const BatchObserver& observer) {
    Trainer trainer(train, generator, &discriminator, model, config, TrainingMode::adversarial);
    return trainer.run(observer);
}

Configuration with_minimal_tiles(const Configuration& config, const ConfigSpace& space) {
    Configuration c = config;
    for (const auto var : {ConfigVar::tic, ConfigVar::toc, ConfigVar::tow, ConfigVar::toh, ConfigVar::tkw, ConfigVar::tkh})
        if (space.has(var)) c[var] = space.choices(var).front();
    return c;
}

std::vector<Configuration> generate_candidates(const nn::Mlp& generator, const DseTask& task, const NormStats& stats,
                                               const DesignModel& model, const ExploreOptions& options) {
    const auto& space = model.space();
    if (!(generator.head() == nn::Head::grouped(space))) throw InputError("generator head does not match the design space");
    Rng rng(options.seed);
    const auto x = encode_task_conditioning(task, stats, options.noise_length, rng);
    const auto probs = nn::forward(generator, x);

    const auto choices = decode_onehot(probs, space, options.threshold);
    auto product = candidate_product(choices, space, options.cap);
    std::vector<Configuration> out;
    out.reserve(product.size());
    for (auto& c : product)
        if (model.feasible(task.layer, c)) out.push_back(std::move(c));
    if (out.empty()) {
        const auto argmax = decode_argmax(probs, space);
        if (model.feasible(task.layer, argmax)) out.push_back(argmax);
        else out.push_back(with_minimal_tiles(argmax, space));
    }
    return out;
}

std::size_t select_index(std::span<const MetricPair> metrics, double lo, double po) {
    if (metrics.empty()) throw InputError("no candidate metrics to select from");
    double l_opt = 0.0, p_opt = 0.0;
    std::size_t chosen = 0;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const double lg = metrics[i].latency, pg = metrics[i].power;
        bool update = false;
        if (l_opt == 0.0 && p_opt == 0.0) {
            update = true;
        } else {
            const bool l_over = l_opt > lo;
            const bool p_over = p_opt > po;
            if (l_over == p_over) update = lg < l_opt && pg < p_opt;  // both violate or both satisfy
            else if (l_over) update = lg < l_opt && pg <= po;         // latency is the missing objective
            else update = pg < p_opt && lg <= lo;                     // power is the missing objective
        }
        if (update) {
            l_opt = lg;
            p_opt = pg;
            chosen = i;
        }
    }
    return chosen;
}

SelectionResult select_design(std::span<const Configuration> candidates, const DseTask& task,
                              const DesignModel& model, const NormStats& stats) {
    if (candidates.empty()) throw InputError("no candidate configurations to select from");
    std::vector<MetricPair> metrics;
    std::vector<std::size_t> source;
    std::vector<DesignMetrics> raw;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto m = normalized_metrics(model, stats, task.layer, candidates[i]);
        if (!m) continue;
        metrics.push_back({m->latency, m->power});
        raw.push_back(m->raw);
        source.push_back(i);
    }
    if (metrics.empty()) throw InputError("no feasible candidate configuration");
    const auto k = select_index(metrics, task.lo, task.po);
    SelectionResult best;
    best.config = candidates[source[k]];
    best.raw = raw[k];
    best.latency = metrics[k].latency;
    best.power = metrics[k].power;
    best.satisfied = best.latency <= task.lo && best.power <= task.po;
    best.candidates_examined = candidates.size();
    return best;
}

SelectionResult explore(const nn::Mlp& generator, const DseTask& task, const NormStats& stats,
                        const DesignModel& model, const ExploreOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const auto candidates = generate_candidates(generator, task, stats, model, options);
    auto result = select_design(candidates, task, model, stats);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace gandse
