#include "gandse/neuralnet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "gandse/error.hpp"

namespace gandse::nn {

std::size_t Head::width() const { return std::accumulate(blocks.begin(), blocks.end(), std::size_t{0}); }

Mlp::Mlp(std::vector<std::size_t> sizes, Head head) : sizes_(std::move(sizes)), head_(std::move(head)) {
    if (sizes_.size() < 2) throw InputError("an MLP needs at least an input and an output size");
    for (auto s : sizes_)
        if (s == 0) throw InputError("layer sizes must be >= 1");
    if (head_.blocks.empty() || head_.width() != sizes_.back())
        throw InputError("head block lengths sum to " + std::to_string(head_.width()) + " but the output size is " +
                         std::to_string(sizes_.back()));
    if (head_.kind == HeadKind::satisfaction && head_.blocks != std::vector<std::size_t>{2})
        throw InputError("the satisfaction head is a single two-way block");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weights.push_back(Matrix::Zero(static_cast<Eigen::Index>(sizes_[l + 1]), static_cast<Eigen::Index>(sizes_[l])));
        biases.push_back(Vector::Zero(static_cast<Eigen::Index>(sizes_[l + 1])));
    }
}

Mlp Mlp::random(std::vector<std::size_t> sizes, Head head, Rng& rng) {
    Mlp mlp(std::move(sizes), std::move(head));
    for (auto& w : mlp.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    }
    return mlp;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
}

void grouped_softmax(Matrix& logits, std::span<const std::size_t> blocks) {
    Eigen::Index off = 0;
    for (const auto len : blocks) {
        const auto n = static_cast<Eigen::Index>(len);
        auto block = logits.middleRows(off, n);
        for (Eigen::Index j = 0; j < block.cols(); ++j) {
            auto col = block.col(j);
            const double mx = col.maxCoeff();
            col = (col.array() - mx).exp();
            col /= col.sum();
        }
        off += n;
    }
}

ForwardCache forward(const Mlp& mlp, const Matrix& input) {
    if (static_cast<std::size_t>(input.rows()) != mlp.input_size())
        throw InputError("input has " + std::to_string(input.rows()) + " features, the network expects " +
                         std::to_string(mlp.input_size()));
    ForwardCache cache;
    cache.activations.reserve(mlp.num_layers());
    cache.activations.push_back(input);
    for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
        Matrix z = mlp.weights[l] * cache.activations.back();
        z.colwise() += mlp.biases[l];
        if (l + 1 < mlp.num_layers()) {
            cache.activations.push_back(z.cwiseMax(0.0));
        } else {
            grouped_softmax(z, mlp.head().blocks);
            cache.probs = std::move(z);
        }
    }
    return cache;
}

std::vector<double> forward(const Mlp& mlp, std::span<const double> input) {
    const Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
    const auto cache = forward(mlp, x);
    return {cache.probs.data(), cache.probs.data() + cache.probs.size()};
}

Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs, std::span<const std::size_t> blocks) {
    Matrix out(probs.rows(), probs.cols());
    Eigen::Index off = 0;
    for (const auto len : blocks) {
        const auto n = static_cast<Eigen::Index>(len);
        const auto p = probs.middleRows(off, n);
        const auto g = dprobs.middleRows(off, n);
        const Eigen::RowVectorXd inner = (p.array() * g.array()).colwise().sum();
        out.middleRows(off, n) = (p.array() * (g.rowwise() - inner).array()).matrix();
        off += n;
    }
    return out;
}

CrossEntropyResult cross_entropy(const Matrix& probs, const Matrix& targets, std::span<const std::size_t> blocks) {
    if (probs.rows() != targets.rows() || probs.cols() != targets.cols())
        throw InputError("probability and target shapes differ");
    const double num_blocks = static_cast<double>(blocks.size());
    CrossEntropyResult r;
    r.grad = (probs - targets) / num_blocks;
    Eigen::Index off = 0;
    for (const auto len : blocks) {
        const auto n = static_cast<Eigen::Index>(len);
        for (Eigen::Index j = 0; j < probs.cols(); ++j) {
            Eigen::Index hot = -1;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (targets(off + k, j) == 1.0) {
                    if (hot >= 0) throw InputError("target has more than one hot entry in a block");
                    hot = k;
                } else if (targets(off + k, j) != 0.0) {
                    throw InputError("target is not one-hot");
                }
            }
            if (hot < 0) throw InputError("target block has no hot entry");
            r.loss -= std::log(std::max(probs(off + hot, j), kProbabilityFloor)) / num_blocks;
        }
        off += n;
    }
    return r;
}

CrossEntropyResult cross_entropy(std::span<const double> probs, std::span<const double> target,
                                 std::span<const std::size_t> blocks) {
    if (probs.size() != target.size()) throw InputError("probability and target lengths differ");
    const auto n = static_cast<Eigen::Index>(probs.size());
    return cross_entropy(Matrix(Eigen::Map<const Vector>(probs.data(), n)),
                         Matrix(Eigen::Map<const Vector>(target.data(), n)), blocks);
}

Gradients Gradients::zeros_like(const Mlp& mlp) {
    Gradients g;
    for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
        g.weights.push_back(Matrix::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
        g.biases.push_back(Vector::Zero(mlp.biases[l].size()));
    }
    return g;
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return s;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

Gradients backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& dlogits, Matrix* input_grad,
                   bool param_grads) {
    const std::size_t layers = mlp.num_layers();
    if (cache.activations.size() != layers || static_cast<std::size_t>(dlogits.rows()) != mlp.output_size() ||
        dlogits.cols() != cache.activations.front().cols() ||
        static_cast<std::size_t>(cache.activations.front().rows()) != mlp.input_size())
        throw InputError("forward cache does not match the network or the gradient");

    Gradients g;
    if (param_grads) {
        g.weights.resize(layers);
        g.biases.resize(layers);
    }
    Matrix delta = dlogits;
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& a = cache.activations[l];
        if (param_grads) {
            g.weights[l].noalias() = delta * a.transpose();
            g.biases[l] = delta.rowwise().sum();
        }
        if (l == 0 && input_grad == nullptr) break;
        Matrix upstream = mlp.weights[l].transpose() * delta;
        if (l == 0) {
            *input_grad = std::move(upstream);
            break;
        }
        delta = (a.array() > 0.0).select(upstream, 0.0);
    }
    return g;
}

double clip_global_norm(Gradients& grads, double max_norm) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto& w : grads.weights) w *= scale;
        for (auto& b : grads.biases) b *= scale;
    }
    return norm;
}

AdamState AdamState::for_model(const Mlp& mlp) {
    AdamState s;
    s.m = Gradients::zeros_like(mlp);
    s.v = Gradients::zeros_like(mlp);
    return s;
}

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, double learning_rate) {
    if (grads.weights.size() != mlp.num_layers() || state.m.weights.size() != mlp.num_layers())
        throw InputError("gradient or optimizer state shapes do not match the network");
    ++state.step;
    const double b1 = state.beta1, b2 = state.beta2, eps = state.epsilon;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        if (param.rows() != g.rows() || param.cols() != g.cols()) throw InputError("gradient shape mismatch");
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
        update(mlp.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
        update(mlp.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
    }
}

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'A', 'N', 'D', 'S', 'E', 'W', '\n'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T take(std::istream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw ParseError("truncated checkpoint '" + path + "'");
    return value;
}

}  // namespace

void save_weights(const Mlp& mlp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(mlp.head().kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mlp.head().blocks.size()));
    for (auto b : mlp.head().blocks) put<std::uint32_t>(out, static_cast<std::uint32_t>(b));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mlp.sizes().size()));
    for (auto s : mlp.sizes()) put<std::uint64_t>(out, s);
    for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
        const auto& w = mlp.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) put<double>(out, w(i, j));
        for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i) put<double>(out, mlp.biases[l](i));
    }
    if (!out) throw InputError("error writing '" + path + "'");
}

Mlp load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint '" + path + "'");
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("'" + path + "' is not a weight checkpoint");
    if (take<std::uint32_t>(in, path) != kFormatVersion) throw ParseError("unsupported checkpoint version in '" + path + "'");
    Head head;
    const auto kind = take<std::uint8_t>(in, path);
    if (kind != static_cast<std::uint8_t>(HeadKind::grouped_softmax) && kind != static_cast<std::uint8_t>(HeadKind::satisfaction))
        throw ParseError("unknown head kind in '" + path + "'");
    head.kind = static_cast<HeadKind>(kind);
    const auto nblocks = take<std::uint32_t>(in, path);
    if (nblocks > 4096) throw ParseError("implausible head descriptor in '" + path + "'");
    for (std::uint32_t i = 0; i < nblocks; ++i) head.blocks.push_back(take<std::uint32_t>(in, path));
    const auto nsizes = take<std::uint32_t>(in, path);
    if (nsizes > 4096) throw ParseError("implausible layer count in '" + path + "'");
    std::vector<std::size_t> sizes;
    for (std::uint32_t i = 0; i < nsizes; ++i) sizes.push_back(static_cast<std::size_t>(take<std::uint64_t>(in, path)));
    Mlp mlp(std::move(sizes), std::move(head));
    for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
        auto& w = mlp.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = take<double>(in, path);
        for (Eigen::Index i = 0; i < mlp.biases[l].size(); ++i) mlp.biases[l](i) = take<double>(in, path);
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in checkpoint '" + path + "'");
    return mlp;
}

Mlp load_weights(const std::string& path, const Head& expected) {
    auto mlp = load_weights(path);
    if (!(mlp.head() == expected))
        throw InputError("checkpoint '" + path + "' head descriptor does not match the design space");
    return mlp;
}

}  // namespace gandse::nn
