#include "kdlab/optimizer.hpp"

#include <cmath>

#include "kdlab/errors.hpp"

namespace kdlab {

OptimizerState::OptimizerState(const OptimizerConfig& cfg, const Mlp& model)
    : config(cfg),
      first_moment(zero_gradients_like(model)),
      second_moment(zero_gradients_like(model)) {
    if (cfg.learning_rate <= 0.0)
        throw ConfigError("optimizer: learning_rate must be positive");
}

namespace {

void update_block(double* w, const double* g, double* m, double* v, std::size_t n,
                  const OptimizerConfig& cfg, double bias1, double bias2) {
    if (cfg.kind == OptimizerKind::sgd_momentum) {
        for (std::size_t i = 0; i < n; ++i) {
            const double grad = g[i] + cfg.weight_decay * w[i];
            m[i] = cfg.momentum * m[i] + grad;
            w[i] -= cfg.learning_rate * m[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double grad = g[i] + cfg.weight_decay * w[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad * grad;
            const double mhat = m[i] / bias1;
            const double vhat = v[i] / bias2;
            w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

}  // namespace

void apply_step(Mlp& model, const Gradients& grads, OptimizerState& state) {
    if (grads.weights.size() != model.weights.size())
        throw ShapeError("apply_step: gradient layer count mismatch");
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bias1 = 1.0 - std::pow(state.config.beta1, t);
    const double bias2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (!model.weights[l].same_shape(grads.weights[l]))
            throw ShapeError("apply_step: weight shape mismatch at layer " + std::to_string(l));
        update_block(model.weights[l].data.data(), grads.weights[l].data.data(),
                     state.first_moment.weights[l].data.data(),
                     state.second_moment.weights[l].data.data(),
                     model.weights[l].data.size(), state.config, bias1, bias2);
        update_block(model.biases[l].data(), grads.biases[l].data(),
                     state.first_moment.biases[l].data(),
                     state.second_moment.biases[l].data(), model.biases[l].size(),
                     state.config, bias1, bias2);
    }
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::adam ? "adam" : "sgd_momentum";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "sgd_momentum" || s == "sgd") return OptimizerKind::sgd_momentum;
    throw ConfigError("unknown optimizer kind: " + s);
}

}  // namespace kdlab
