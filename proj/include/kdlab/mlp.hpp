#pragma once

#include <cstdint>
#include <vector>

#include "kdlab/matrix.hpp"

namespace kdlab {

enum class Activation { relu, tanh };

// Feedforward network. Hidden layers use the configured activation; the final
// layer is affine (logits). Value-semantic: copies are independent models.
struct Mlp {
    std::vector<std::size_t> layer_dims;  // input -> hidden... -> classes
    std::vector<Matrix> weights;          // weights[l] is (dims[l], dims[l+1])
    std::vector<std::vector<double>> biases;
    Activation activation = Activation::relu;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t class_count() const { return layer_dims.back(); }
    std::size_t parameter_count() const;
};

// Gradients shaped like an Mlp's parameters.
struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

Gradients zero_gradients_like(const Mlp& model);

// Weights uniform in +/- sqrt(6 / fan_in), biases zero. Deterministic per seed.
Mlp init_mlp(const std::vector<std::size_t>& layer_dims, Activation activation,
             std::uint64_t seed);

// Batch forward pass; returns the (batch, classes) logit matrix.
Matrix forward(const Mlp& model, const Matrix& inputs);

// Activations of the last hidden layer (feature export; equals the input
// batch for a single-layer net).
Matrix forward_features(const Mlp& model, const Matrix& inputs);

// Objective over a batch of logits with fixed context (labels, frozen teacher
// outputs, hyperparameters). evaluate returns the mean per-sample loss and, if
// dlogits is non-null, fills it with the gradient of that mean.
class LogitObjective {
public:
    virtual ~LogitObjective() = default;
    virtual double evaluate(const Matrix& logits, Matrix* dlogits) const = 0;
};

// Mean loss over the batch plus analytic gradients for every parameter.
double loss_gradients(const Mlp& model, const Matrix& inputs,
                      const LogitObjective& objective, Gradients& grads);

// FNV-1a digest over all parameter bytes; used to assert teachers stay frozen.
std::uint64_t parameter_digest(const Mlp& model);

}  // namespace kdlab
