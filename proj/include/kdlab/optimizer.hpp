#pragma once

#include <cstdint>
#include <string>

#include "kdlab/mlp.hpp"

namespace kdlab {

enum class OptimizerKind { sgd_momentum, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double momentum = 0.9;       // sgd_momentum only
    double beta1 = 0.9;          // adam only
    double beta2 = 0.999;        // adam only
    double epsilon = 1e-8;       // adam only
    double weight_decay = 0.0;   // L2 term added to the gradient
};

// Per-parameter moment buffers mirroring an Mlp's shapes.
struct OptimizerState {
    OptimizerConfig config;
    Gradients first_moment;   // momentum / m
    Gradients second_moment;  // adam v (unused for sgd)
    std::int64_t step_count = 0;

    OptimizerState(const OptimizerConfig& cfg, const Mlp& model);
};

// In-place parameter update. SGD-momentum: v = mu*v + g; w -= lr*v.
// Adam: standard update with bias correction.
void apply_step(Mlp& model, const Gradients& grads, OptimizerState& state);

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

}  // namespace kdlab
