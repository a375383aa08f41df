#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kdlab/logit_ops.hpp"
#include "kdlab/matrix.hpp"
#include "kdlab/mlp.hpp"

namespace kdlab {

// Hinton distillation: alpha * lambda * KL(soften(z_t,tau) || soften(z_s,tau))
// + (1-alpha) * CE(onehot, soften(z_s,1)). lambda defaults to tau^2.
struct KdConfig {
    double alpha = 0.9;
    double tau = 4.0;
    double lambda = 16.0;
};

inline KdConfig make_kd_config(double alpha, double tau) {
    return KdConfig{alpha, tau, tau * tau};
}

// Nasty-teacher objective: CE(onehot, soften(z,1))
// - omega * tau_a^2 * KL(soften(z,tau_a) || soften(z_ref,tau_a)).
// The tau_a^2 scale mirrors the lambda = tau^2 convention and can be disabled.
struct NastyConfig {
    double omega = 0.04;
    double tau_a = 4.0;
    bool scale_by_tau_sq = true;
};

// Shared by the HTC and SCM attacks: (1-alpha) * CE + alpha * m * KL(...).
struct HtcConfig {
    double alpha = 0.9;
    double tau = 50.0;
    double m = 10.0;
};

double kd_loss(std::span<const double> z_s, std::span<const double> z_t,
               std::size_t label, const KdConfig& cfg);

// KL target is soften(z_nasty, cfg.tau); the student side is soften(z_s, 1),
// matching the cross-entropy-to-KL rewrite of the attack derivation.
double htc_loss(std::span<const double> z_s, std::span<const double> z_nasty,
                std::size_t label, const HtcConfig& cfg);

// Both sides softened at cfg.tau, target soften(z_ens, cfg.tau).
double scm_loss(std::span<const double> z_s, std::span<const double> z_ens,
                std::size_t label, const HtcConfig& cfg);

double nasty_loss(std::span<const double> z, std::span<const double> z_ref,
                  std::size_t label, const NastyConfig& cfg);

// ---- Batch objectives used by the trainer (mean over batch rows) ----

class CeObjective final : public LogitObjective {
public:
    explicit CeObjective(std::vector<int> labels) : labels_(std::move(labels)) {}
    double evaluate(const Matrix& logits, Matrix* dlogits) const override;

private:
    std::vector<int> labels_;
};

class KdObjective final : public LogitObjective {
public:
    KdObjective(Matrix teacher_logits, std::vector<int> labels, KdConfig cfg)
        : teacher_logits_(std::move(teacher_logits)), labels_(std::move(labels)), cfg_(cfg) {}
    double evaluate(const Matrix& logits, Matrix* dlogits) const override;

private:
    Matrix teacher_logits_;
    std::vector<int> labels_;
    KdConfig cfg_;
};

class HtcObjective final : public LogitObjective {
public:
    HtcObjective(Matrix nasty_logits, std::vector<int> labels, HtcConfig cfg)
        : nasty_logits_(std::move(nasty_logits)), labels_(std::move(labels)), cfg_(cfg) {}
    double evaluate(const Matrix& logits, Matrix* dlogits) const override;

private:
    Matrix nasty_logits_;
    std::vector<int> labels_;
    HtcConfig cfg_;
};

class ScmObjective final : public LogitObjective {
public:
    // target_probs rows are the ensemble distribution already softened at
    // cfg.tau (logit-mean then soften, or probability-mean).
    ScmObjective(Matrix target_probs, std::vector<int> labels, HtcConfig cfg)
        : target_probs_(std::move(target_probs)), labels_(std::move(labels)), cfg_(cfg) {}
    double evaluate(const Matrix& logits, Matrix* dlogits) const override;

private:
    Matrix target_probs_;
    std::vector<int> labels_;
    HtcConfig cfg_;
};

class NastyObjective final : public LogitObjective {
public:
    NastyObjective(Matrix reference_logits, std::vector<int> labels, NastyConfig cfg)
        : reference_logits_(std::move(reference_logits)), labels_(std::move(labels)), cfg_(cfg) {}
    double evaluate(const Matrix& logits, Matrix* dlogits) const override;

private:
    Matrix reference_logits_;
    std::vector<int> labels_;
    NastyConfig cfg_;
};

}  // namespace kdlab
