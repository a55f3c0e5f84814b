#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gandse/config_space.hpp"

namespace gandse::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Output head. A grouped softmax normalizes each block independently; the satisfaction
/// head is a single two-way block (index 0 = False, 1 = True).
enum class HeadKind : std::uint8_t { grouped_softmax = 1, satisfaction = 2 };

struct Head {
    HeadKind kind = HeadKind::grouped_softmax;
    std::vector<std::size_t> blocks;

    static Head grouped(const ConfigSpace& space) { return {HeadKind::grouped_softmax, space.block_lengths()}; }
    static Head satisfaction() { return {HeadKind::satisfaction, {2}}; }
    std::size_t width() const;

    bool operator==(const Head&) const = default;
};

inline constexpr std::size_t kSatFalse = 0;
inline constexpr std::size_t kSatTrue = 1;

/// Fully connected network: affine + ReLU on hidden layers, softmax head on the output.
class Mlp {
public:
    /// `sizes` = {input, hidden..., output}; parameters start at zero.
    Mlp(std::vector<std::size_t> sizes, Head head);

    /// Uniform initialization in +-sqrt(6 / fan_in), zero biases.
    static Mlp random(std::vector<std::size_t> sizes, Head head, Rng& rng);

    const std::vector<std::size_t>& sizes() const { return sizes_; }
    const Head& head() const { return head_; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t num_layers() const { return weights.size(); }
    std::size_t parameter_count() const;

    std::vector<Matrix> weights;  ///< weights[l] is sizes[l+1] x sizes[l]
    std::vector<Vector> biases;

private:
    std::vector<std::size_t> sizes_;
    Head head_;
};

/// Activations of a batched forward pass; column j belongs to sample j.
struct ForwardCache {
    std::vector<Matrix> activations;  ///< activations[0] = input, then each hidden layer (post-ReLU)
    Matrix probs;                     ///< head output
};

ForwardCache forward(const Mlp& mlp, const Matrix& input);
std::vector<double> forward(const Mlp& mlp, std::span<const double> input);

/// In-place softmax over each block of every column.
void grouped_softmax(Matrix& logits, std::span<const std::size_t> blocks);

/// Converts a gradient w.r.t. softmax probabilities into a gradient w.r.t. the logits.
Matrix softmax_backward(const Matrix& probs, const Matrix& dprobs, std::span<const std::size_t> blocks);

inline constexpr double kProbabilityFloor = 1e-12;

struct CrossEntropyResult {
    double loss = 0.0;  ///< summed over columns; each column is the mean over its blocks
    Matrix grad;        ///< d loss / d logits, (p - target) / num_blocks per column
};

/// Targets must be one-hot within every block.
CrossEntropyResult cross_entropy(const Matrix& probs, const Matrix& targets, std::span<const std::size_t> blocks);
CrossEntropyResult cross_entropy(std::span<const double> probs, std::span<const double> target,
                                 std::span<const std::size_t> blocks);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static Gradients zeros_like(const Mlp& mlp);
    double squared_norm() const;
    Gradients& operator+=(const Gradients& other);
};

/// Reverse-mode pass from a gradient at the logits. ReLU has zero subgradient at 0.
/// `input_grad`, when given, receives d/d input. With `param_grads` false only the input
/// gradient is propagated and the returned gradients are empty.
Gradients backward(const Mlp& mlp, const ForwardCache& cache, const Matrix& dlogits, Matrix* input_grad = nullptr,
                   bool param_grads = true);

/// Scales gradients so their global L2 norm is at most `max_norm`. Returns the pre-clip norm.
double clip_global_norm(Gradients& grads, double max_norm);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;
    Gradients m;
    Gradients v;

    static AdamState for_model(const Mlp& mlp);
};

/// Bias-corrected Adam update; increments the step counter.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, double learning_rate);

/// Versioned little-endian binary checkpoint: head descriptor, layer sizes, then every
/// weight matrix (row-major) followed by its bias.
void save_weights(const Mlp& mlp, const std::string& path);
Mlp load_weights(const std::string& path);
/// Throws InputError when the stored head differs from `expected`.
Mlp load_weights(const std::string& path, const Head& expected);

}  // namespace gandse::nn
