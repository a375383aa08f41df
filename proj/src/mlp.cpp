#include "kdlab/mlp.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "kdlab/errors.hpp"
#include "kdlab/rng.hpp"

namespace kdlab {

namespace {

double activate(double x, Activation a) {
    return a == Activation::relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// Derivative expressed through the activated value (valid for relu and tanh).
double activate_grad_from_output(double y, Activation a) {
    return a == Activation::relu ? (y > 0.0 ? 1.0 : 0.0) : 1.0 - y * y;
}

void check_input_shape(const Mlp& model, const Matrix& inputs) {
    if (inputs.cols != model.input_dim())
        throw ShapeError("forward: input has " + std::to_string(inputs.cols) +
                         " columns, model expects " + std::to_string(model.input_dim()));
}

// Affine layer: out = in * W + b.
Matrix affine(const Matrix& in, const Matrix& w, const std::vector<double>& b) {
    Matrix out = matmul(in, w);
    for (std::size_t r = 0; r < out.rows; ++r) {
        double* row = out.row(r);
        for (std::size_t c = 0; c < out.cols; ++c) row[c] += b[c];
    }
    return out;
}

}  // namespace

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l)
        n += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
    return n;
}

Gradients zero_gradients_like(const Mlp& model) {
    Gradients g;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.weights.emplace_back(model.weights[l].rows, model.weights[l].cols);
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

Mlp init_mlp(const std::vector<std::size_t>& layer_dims, Activation activation,
             std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("init_mlp: need at least 2 layer dims");
    for (std::size_t d : layer_dims) {
        if (d < 1) throw ConfigError("init_mlp: all layer dims must be >= 1");
    }
    Mlp model;
    model.layer_dims = layer_dims;
    model.activation = activation;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const std::size_t fan_in = layer_dims[l];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Matrix w(layer_dims[l], layer_dims[l + 1]);
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(layer_dims[l + 1], 0.0);
    }
    return model;
}

Matrix forward(const Mlp& model, const Matrix& inputs) {
    check_input_shape(model, inputs);
    Matrix h = inputs;
    const std::size_t last = model.weights.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        h = affine(h, model.weights[l], model.biases[l]);
        if (l < last) {
            for (double& v : h.data) v = activate(v, model.activation);
        }
    }
    return h;
}

Matrix forward_features(const Mlp& model, const Matrix& inputs) {
    check_input_shape(model, inputs);
    Matrix h = inputs;
    const std::size_t last = model.weights.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        h = affine(h, model.weights[l], model.biases[l]);
        for (double& v : h.data) v = activate(v, model.activation);
    }
    return h;
}

double loss_gradients(const Mlp& model, const Matrix& inputs,
                      const LogitObjective& objective, Gradients& grads) {
    check_input_shape(model, inputs);
    const std::size_t layers = model.weights.size();

    // Forward, keeping the post-activation output of every hidden layer.
    std::vector<Matrix> acts;  // acts[0] = inputs, acts[l] = hidden output l
    acts.reserve(layers);
    acts.push_back(inputs);
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        Matrix h = affine(acts.back(), model.weights[l], model.biases[l]);
        for (double& v : h.data) v = activate(v, model.activation);
        if (!all_finite(h))
            throw NumericError("loss_gradients: non-finite activation at layer " +
                               std::to_string(l));
        acts.push_back(std::move(h));
    }
    Matrix logits = affine(acts.back(), model.weights[layers - 1], model.biases[layers - 1]);
    if (!all_finite(logits)) throw NumericError("loss_gradients: non-finite logits");

    Matrix delta(logits.rows, logits.cols);
    const double loss = objective.evaluate(logits, &delta);

    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l] = matmul_at_b(acts[l], delta);
        std::vector<double>& gb = grads.biases[l];
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t r = 0; r < delta.rows; ++r) {
            const double* drow = delta.row(r);
            for (std::size_t c = 0; c < delta.cols; ++c) gb[c] += drow[c];
        }
        if (!all_finite(grads.weights[l]))
            throw NumericError("loss_gradients: non-finite gradient at layer " +
                               std::to_string(l));
        if (l > 0) {
            Matrix prev = matmul_a_bt(delta, model.weights[l]);
            const Matrix& act = acts[l];
            for (std::size_t i = 0; i < prev.data.size(); ++i)
                prev.data[i] *= activate_grad_from_output(act.data[i], model.activation);
            delta = std::move(prev);
        }
    }
    return loss;
}

std::uint64_t parameter_digest(const Mlp& model) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const double* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, &p[i], sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= static_cast<std::uint8_t>(bits >> (8 * b));
                h *= 1099511628211ull;
            }
        }
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mix(model.weights[l].data.data(), model.weights[l].data.size());
        mix(model.biases[l].data(), model.biases[l].size());
    }
    return h;
}

}  // namespace kdlab
