#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kdlab {

// Pre-softmax class scores and normalized class distributions. Both are plain
// double vectors; the ops below enforce the invariants at their boundaries.
using LogitVector = std::vector<double>;
using ProbVector = std::vector<double>;

// Probabilities are floor-clamped at this value before any log.
inline constexpr double kProbFloor = 1e-12;

// softmax(z / tau) with max-subtraction. Preserves the argmax for any tau > 0.
ProbVector soften(std::span<const double> z, double tau);

ProbVector onehot(std::size_t class_count, std::size_t target);

// y_net = (1 - alpha) * onehot(target) + alpha * y_nasty. The target entry is
// guaranteed >= 1 - alpha.
ProbVector compose_htc(std::span<const double> y_nasty, std::size_t target,
                       double alpha);

// Arithmetic mean of member logits, per class.
LogitVector ensemble_logits(std::span<const LogitVector> members);

// Mean of softened member probabilities; the probability-space alternative to
// ensemble_logits, kept for side-by-side comparison.
ProbVector ensemble_probabilities(std::span<const LogitVector> members, double tau);

// Sum p_i * ln(p_i / q_i) in nats, with 0*ln 0 = 0 and q clamped at kProbFloor.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// -Sum p_i * ln s_i in nats. Equals kl_divergence(p, s) + entropy(p).
double cross_entropy(std::span<const double> p_target, std::span<const double> s);

// -Sum p_i * ln p_i in nats.
double entropy(std::span<const double> p);

// Number of classes with p_i >= rho * max(p). rho in (0, 1].
std::size_t count_peaks(std::span<const double> p, double rho);

std::size_t argmax(std::span<const double> v);  // ties broken by lowest index

}  // namespace kdlab
