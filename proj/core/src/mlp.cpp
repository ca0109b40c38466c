#include "adbench/mlp.hpp"

#include <cmath>
#include <string>

#include "adbench/errors.hpp"
#include "adbench/rng.hpp"

namespace adbench {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

void apply_activation(Matrix& m, Activation act) {
    switch (act) {
        case Activation::Linear:
            break;
        case Activation::Relu:
            for (double& v : m.data())
                if (v < 0.0) v = 0.0;
            break;
        case Activation::Sigmoid:
            for (double& v : m.data()) v = stable_sigmoid(v);
            break;
    }
}

// Derivative expressed through the post-activation value.
void apply_activation_grad(Matrix& grad, const Matrix& post, Activation act) {
    switch (act) {
        case Activation::Linear:
            break;
        case Activation::Relu:
            for (std::size_t i = 0; i < grad.data().size(); ++i)
                if (post.data()[i] <= 0.0) grad.data()[i] = 0.0;
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < grad.data().size(); ++i) {
                double a = post.data()[i];
                grad.data()[i] *= a * (1.0 - a);
            }
            break;
    }
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += r[j];
    }
    return s;
}

}  // namespace

Mlp Mlp::create(const std::vector<int>& layer_sizes, Activation hidden, Activation output,
                std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw ConfigError("mlp: need at least input and output sizes, got " +
                          std::to_string(layer_sizes.size()));
    for (int s : layer_sizes)
        if (s < 1) throw ConfigError("mlp: layer size must be >= 1, got " + std::to_string(s));

    Mlp net;
    net.seed_ = seed;
    Rng rng(seed);
    for (std::size_t l = 1; l < layer_sizes.size(); ++l) {
        Layer layer;
        int fan_in = layer_sizes[l - 1];
        int fan_out = layer_sizes[l];
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        layer.weight = Matrix(static_cast<std::size_t>(fan_out), static_cast<std::size_t>(fan_in));
        for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
        layer.bias.assign(static_cast<std::size_t>(fan_out), 0.0);
        layer.activation = (l + 1 == layer_sizes.size()) ? output : hidden;
        net.layers_.push_back(std::move(layer));
    }
    return net;
}

int Mlp::input_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int Mlp::output_dim() const {
    return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.data().size() + l.bias.size();
    return n;
}

bool Mlp::all_finite() const {
    for (const auto& l : layers_) {
        if (!l.weight.all_finite()) return false;
        for (double b : l.bias)
            if (!std::isfinite(b)) return false;
    }
    return true;
}

std::vector<double> Mlp::flatten_params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weight.data().begin(), l.weight.data().end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void Mlp::set_params(std::span<const double> flat) {
    if (flat.size() != param_count()) throw ConfigError("set_params: size mismatch");
    std::size_t off = 0;
    for (auto& l : layers_) {
        for (double& w : l.weight.data()) w = flat[off++];
        for (double& b : l.bias) b = flat[off++];
    }
}

ForwardTrace forward(const Mlp& net, const Matrix& batch) {
    if (static_cast<int>(batch.cols()) != net.input_dim())
        throw ConfigError("forward: input has " + std::to_string(batch.cols()) +
                          " columns, net expects " + std::to_string(net.input_dim()));
    ForwardTrace trace;
    trace.activations.reserve(net.layers().size() + 1);
    trace.activations.push_back(batch);
    for (const auto& layer : net.layers()) {
        Matrix z = matmul_nt(trace.activations.back(), layer.weight);
        add_row_inplace(z, layer.bias);
        apply_activation(z, layer.activation);
        trace.activations.push_back(std::move(z));
    }
    return trace;
}

Matrix forward_output(const Mlp& net, const Matrix& batch) {
    return forward(net, batch).output();
}

void GradBundle::add_scaled(const GradBundle& other, double scale) {
    if (weight_grads.empty()) {
        weight_grads = other.weight_grads;
        bias_grads = other.bias_grads;
        if (scale != 1.0) {
            for (auto& w : weight_grads)
                for (double& v : w.data()) v *= scale;
            for (auto& b : bias_grads)
                for (double& v : b) v *= scale;
        }
        return;
    }
    for (std::size_t l = 0; l < weight_grads.size(); ++l) {
        auto& dst = weight_grads[l].data();
        const auto& src = other.weight_grads[l].data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
        for (std::size_t i = 0; i < bias_grads[l].size(); ++i)
            bias_grads[l][i] += scale * other.bias_grads[l][i];
    }
}

bool GradBundle::all_finite() const {
    for (const auto& w : weight_grads)
        if (!w.all_finite()) return false;
    for (const auto& b : bias_grads)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> GradBundle::flatten() const {
    std::vector<double> flat;
    for (std::size_t l = 0; l < weight_grads.size(); ++l) {
        flat.insert(flat.end(), weight_grads[l].data().begin(), weight_grads[l].data().end());
        flat.insert(flat.end(), bias_grads[l].begin(), bias_grads[l].end());
    }
    return flat;
}

namespace {

BackwardResult backprop(const Mlp& net, const ForwardTrace& trace, std::size_t top_layer,
                        Matrix delta, bool skip_top_activation) {
    const auto& layers = net.layers();
    BackwardResult out;
    out.grads.weight_grads.resize(layers.size());
    out.grads.bias_grads.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        out.grads.weight_grads[l] =
            Matrix(layers[l].weight.rows(), layers[l].weight.cols());
        out.grads.bias_grads[l].assign(layers[l].bias.size(), 0.0);
    }

    for (std::size_t l = top_layer; l-- > 0;) {
        const Layer& layer = layers[l];
        const Matrix& post = trace.activations[l + 1];
        if (!(l + 1 == top_layer && skip_top_activation))
            apply_activation_grad(delta, post, layer.activation);
        out.grads.weight_grads[l] = matmul_tn(delta, trace.activations[l]);
        out.grads.bias_grads[l] = column_sums(delta);
        Matrix prev = matmul(delta, layer.weight);
        if (l == 0) {
            out.input_grad = std::move(prev);
        } else {
            delta = std::move(prev);
        }
    }
    return out;
}

}  // namespace

BackwardResult backward(const Mlp& net, const ForwardTrace& trace, const Matrix& output_grad,
                        bool grad_at_preactivation) {
    if (trace.activations.size() != net.layers().size() + 1)
        throw ConfigError("backward: trace does not match net depth");
    const Matrix& out = trace.output();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
        throw ConfigError("backward: output gradient shape mismatch");
    return backprop(net, trace, net.layers().size(), output_grad, grad_at_preactivation);
}

BackwardResult backward_from_layer(const Mlp& net, const ForwardTrace& trace,
                                   std::size_t layer_index, const Matrix& grad_at_activation) {
    if (layer_index == 0 || layer_index >= trace.activations.size())
        throw ConfigError("backward_from_layer: layer index out of range");
    const Matrix& act = trace.activations[layer_index];
    if (grad_at_activation.rows() != act.rows() || grad_at_activation.cols() != act.cols())
        throw ConfigError("backward_from_layer: gradient shape mismatch");
    return backprop(net, trace, layer_index, grad_at_activation, false);
}

AdamState AdamState::init(const Mlp& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& l : net.layers()) {
        s.m_w.emplace_back(l.weight.rows(), l.weight.cols());
        s.v_w.emplace_back(l.weight.rows(), l.weight.cols());
        s.m_b.emplace_back(l.bias.size(), 0.0);
        s.v_b.emplace_back(l.bias.size(), 0.0);
    }
    return s;
}

void adam_step(Mlp& net, const GradBundle& grads, AdamState& state) {
    auto& layers = net.layers();
    if (grads.weight_grads.size() != layers.size())
        throw ConfigError("adam_step: gradient bundle does not match net");
    if (!grads.all_finite()) throw TrainingError("adam_step: non-finite gradient");

    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto update = [&](double& p, double g, double& m, double& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        double mhat = m / bc1;
        double vhat = v / bc2;
        p -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    };

    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& w = layers[l].weight.data();
        const auto& gw = grads.weight_grads[l].data();
        auto& mw = state.m_w[l].data();
        auto& vw = state.v_w[l].data();
        if (gw.size() != w.size()) throw ConfigError("adam_step: weight shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], mw[i], vw[i]);

        auto& b = layers[l].bias;
        const auto& gb = grads.bias_grads[l];
        if (gb.size() != b.size()) throw ConfigError("adam_step: bias shape mismatch");
        for (std::size_t i = 0; i < b.size(); ++i)
            update(b[i], gb[i], state.m_b[l][i], state.v_b[l][i]);
    }
}

std::vector<int> interp_architecture(int input_dim, int code_dim, int n_hidden) {
    if (input_dim < 1 || code_dim < 1) throw ConfigError("interp_architecture: dims must be >= 1");
    if (code_dim > input_dim)
        throw ConfigError("interp_architecture: code dimension exceeds input dimension");
    if (n_hidden < 1 || n_hidden > 3)
        throw ConfigError("interp_architecture: hidden layer count must be in {1,2,3}");
    std::vector<int> hidden;
    for (int i = 1; i <= n_hidden; ++i) {
        double frac = static_cast<double>(i) / static_cast<double>(n_hidden + 1);
        double v = static_cast<double>(input_dim) +
                   frac * (static_cast<double>(code_dim) - static_cast<double>(input_dim));
        int w = static_cast<int>(std::lround(v));
        hidden.push_back(w < 1 ? 1 : w);
    }
    return hidden;
}

}  // namespace adbench
