#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adbench/matrix.hpp"

namespace adbench {

enum class Activation { Relu, Linear, Sigmoid };

struct Layer {
    Matrix weight;             // [out × in]
    std::vector<double> bias;  // [out]
    Activation activation = Activation::Linear;
};

/// Dense multi-layer perceptron. Layers chain dimensionally; parameters are
/// plain doubles so a trained net is an immutable value that can be copied and
/// scored from any thread.
class Mlp {
public:
    Mlp() = default;

    /// Builds a net with the given layer widths (>= 2 entries, all >= 1).
    /// Weights are uniform in ±sqrt(6/(fan_in+fan_out)), biases zero,
    /// deterministic for a fixed seed.
    static Mlp create(const std::vector<int>& layer_sizes, Activation hidden,
                      Activation output, std::uint64_t seed);

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    int input_dim() const;
    int output_dim() const;
    std::size_t param_count() const;
    std::uint64_t seed() const { return seed_; }

    bool all_finite() const;

    /// Parameters flattened layer by layer (weights row-major, then bias).
    std::vector<double> flatten_params() const;
    void set_params(std::span<const double> flat);

private:
    std::vector<Layer> layers_;
    std::uint64_t seed_ = 0;
};

/// Activations retained by a forward pass; activations[0] is the input batch,
/// activations[i] the post-activation output of layer i.
struct ForwardTrace {
    std::vector<Matrix> activations;
    const Matrix& output() const { return activations.back(); }
};

ForwardTrace forward(const Mlp& net, const Matrix& batch);
Matrix forward_output(const Mlp& net, const Matrix& batch);

struct GradBundle {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;

    void add_scaled(const GradBundle& other, double scale);
    bool all_finite() const;
    std::vector<double> flatten() const;
};

struct BackwardResult {
    GradBundle grads;
    Matrix input_grad;  // dLoss/dInput, same shape as the input batch
};

/// Exact reverse-mode gradients for the scalar loss whose gradient w.r.t. the
/// net output is `output_grad`. When `grad_at_preactivation` is set the
/// gradient is taken w.r.t. the last layer's pre-activation values (used by
/// the adversarial trainers for numerically robust sigmoid-output losses).
BackwardResult backward(const Mlp& net, const ForwardTrace& trace,
                        const Matrix& output_grad, bool grad_at_preactivation = false);

/// Backpropagates a gradient injected at the post-activation output of layer
/// `layer_index` (1-based, as stored in the trace) down to the input.
/// Parameter gradients of layers above `layer_index` are zero.
BackwardResult backward_from_layer(const Mlp& net, const ForwardTrace& trace,
                                   std::size_t layer_index, const Matrix& grad_at_activation);

/// Adam optimizer state; moment shapes mirror the net parameters.
struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::uint64_t step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState init(const Mlp& net, double learning_rate);
};

/// One bias-corrected Adam update in place; increments the step counter.
/// Throws TrainingError on non-finite gradients.
void adam_step(Mlp& net, const GradBundle& grads, AdamState& state);

/// Hidden layer widths linearly interpolated between input_dim and code_dim
/// at fractions i/(n_hidden+1), rounded to nearest integer, floor 1.
std::vector<int> interp_architecture(int input_dim, int code_dim, int n_hidden);

}  // namespace adbench
