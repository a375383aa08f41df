#include "kdlab/losses.hpp"

#include <cmath>
#include <string>

#include "kdlab/errors.hpp"

namespace kdlab {

namespace {

std::span<const double> row_span(const Matrix& m, std::size_t r) {
    return {m.row(r), m.cols};
}

void check_pair(std::span<const double> a, std::span<const double> b,
                std::size_t label, const char* who) {
    if (a.size() != b.size()) throw ShapeError(std::string(who) + ": class count mismatch");
    if (label >= a.size()) throw ShapeError(std::string(who) + ": label out of range");
}

// grad of CE(onehot(label), soften(z,1)) w.r.t. z.
void add_ce_grad(std::span<const double> z, std::size_t label, double weight,
                 double* out) {
    const ProbVector s = soften(z, 1.0);
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += weight * s[i];
    out[label] -= weight;
}

// grad of KL(p_fixed || soften(z, tau)) w.r.t. z is (soften(z,tau) - p) / tau.
void add_kl_to_student_grad(std::span<const double> z, std::span<const double> p,
                            double tau, double weight, double* out) {
    const ProbVector s = soften(z, tau);
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i] += weight * (s[i] - p[i]) / tau;
}

// grad of KL(soften(z,tau) || q_fixed) w.r.t. z:
// (p_j / tau) * ((ln p_j - ln q_j) - KL(p || q)).
void add_kl_from_model_grad(std::span<const double> z, std::span<const double> q,
                            double tau, double weight, double* out) {
    const ProbVector p = soften(z, tau);
    const double kl = kl_divergence(p, q);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double log_ratio =
            std::log(std::max(p[i], kProbFloor)) - std::log(std::max(q[i], kProbFloor));
        out[i] += weight * (p[i] / tau) * (log_ratio - kl);
    }
}

}  // namespace

double kd_loss(std::span<const double> z_s, std::span<const double> z_t,
               std::size_t label, const KdConfig& cfg) {
    check_pair(z_s, z_t, label, "kd_loss");
    const ProbVector y_t = soften(z_t, cfg.tau);
    const ProbVector y_s = soften(z_s, cfg.tau);
    const ProbVector s1 = soften(z_s, 1.0);
    return cfg.alpha * cfg.lambda * kl_divergence(y_t, y_s) +
           (1.0 - cfg.alpha) * cross_entropy(onehot(z_s.size(), label), s1);
}

double htc_loss(std::span<const double> z_s, std::span<const double> z_nasty,
                std::size_t label, const HtcConfig& cfg) {
    check_pair(z_s, z_nasty, label, "htc_loss");
    const ProbVector y_nasty = soften(z_nasty, cfg.tau);
    const ProbVector s1 = soften(z_s, 1.0);
    return (1.0 - cfg.alpha) * cross_entropy(onehot(z_s.size(), label), s1) +
           cfg.alpha * cfg.m * kl_divergence(y_nasty, s1);
}

double scm_loss(std::span<const double> z_s, std::span<const double> z_ens,
                std::size_t label, const HtcConfig& cfg) {
    check_pair(z_s, z_ens, label, "scm_loss");
    const ProbVector y_ens = soften(z_ens, cfg.tau);
    const ProbVector y_s = soften(z_s, cfg.tau);
    const ProbVector s1 = soften(z_s, 1.0);
    return (1.0 - cfg.alpha) * cross_entropy(onehot(z_s.size(), label), s1) +
           cfg.alpha * cfg.m * kl_divergence(y_ens, y_s);
}

double nasty_loss(std::span<const double> z, std::span<const double> z_ref,
                  std::size_t label, const NastyConfig& cfg) {
    check_pair(z, z_ref, label, "nasty_loss");
    const ProbVector p = soften(z, cfg.tau_a);
    const ProbVector q = soften(z_ref, cfg.tau_a);
    const ProbVector s1 = soften(z, 1.0);
    const double scale = cfg.scale_by_tau_sq ? cfg.tau_a * cfg.tau_a : 1.0;
    return cross_entropy(onehot(z.size(), label), s1) -
           cfg.omega * scale * kl_divergence(p, q);
}

double CeObjective::evaluate(const Matrix& logits, Matrix* dlogits) const {
    if (logits.rows != labels_.size()) throw ShapeError("CeObjective: batch size mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto z = row_span(logits, r);
        const std::size_t label = static_cast<std::size_t>(labels_[r]);
        total += cross_entropy(onehot(logits.cols, label), soften(z, 1.0));
        if (dlogits) add_ce_grad(z, label, inv_n, dlogits->row(r));
    }
    return total * inv_n;
}

double KdObjective::evaluate(const Matrix& logits, Matrix* dlogits) const {
    if (logits.rows != labels_.size() || !logits.same_shape(teacher_logits_))
        throw ShapeError("KdObjective: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto z_s = row_span(logits, r);
        const auto z_t = row_span(teacher_logits_, r);
        const std::size_t label = static_cast<std::size_t>(labels_[r]);
        total += kd_loss(z_s, z_t, label, cfg_);
        if (dlogits) {
            double* g = dlogits->row(r);
            const ProbVector y_t = soften(z_t, cfg_.tau);
            add_kl_to_student_grad(z_s, y_t, cfg_.tau, cfg_.alpha * cfg_.lambda * inv_n, g);
            add_ce_grad(z_s, label, (1.0 - cfg_.alpha) * inv_n, g);
        }
    }
    return total * inv_n;
}

double HtcObjective::evaluate(const Matrix& logits, Matrix* dlogits) const {
    if (logits.rows != labels_.size() || !logits.same_shape(nasty_logits_))
        throw ShapeError("HtcObjective: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto z_s = row_span(logits, r);
        const auto z_n = row_span(nasty_logits_, r);
        const std::size_t label = static_cast<std::size_t>(labels_[r]);
        total += htc_loss(z_s, z_n, label, cfg_);
        if (dlogits) {
            double* g = dlogits->row(r);
            add_ce_grad(z_s, label, (1.0 - cfg_.alpha) * inv_n, g);
            const ProbVector y_nasty = soften(z_n, cfg_.tau);
            add_kl_to_student_grad(z_s, y_nasty, 1.0, cfg_.alpha * cfg_.m * inv_n, g);
        }
    }
    return total * inv_n;
}

double ScmObjective::evaluate(const Matrix& logits, Matrix* dlogits) const {
    if (logits.rows != labels_.size() || !logits.same_shape(target_probs_))
        throw ShapeError("ScmObjective: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto z_s = row_span(logits, r);
        const auto y_ens = row_span(target_probs_, r);
        const std::size_t label = static_cast<std::size_t>(labels_[r]);
        const ProbVector s1 = soften(z_s, 1.0);
        const ProbVector y_s = soften(z_s, cfg_.tau);
        total += (1.0 - cfg_.alpha) * cross_entropy(onehot(logits.cols, label), s1) +
                 cfg_.alpha * cfg_.m * kl_divergence(y_ens, y_s);
        if (dlogits) {
            double* g = dlogits->row(r);
            add_ce_grad(z_s, label, (1.0 - cfg_.alpha) * inv_n, g);
            add_kl_to_student_grad(z_s, y_ens, cfg_.tau, cfg_.alpha * cfg_.m * inv_n, g);
        }
    }
    return total * inv_n;
}

double NastyObjective::evaluate(const Matrix& logits, Matrix* dlogits) const {
    if (logits.rows != labels_.size() || !logits.same_shape(reference_logits_))
        throw ShapeError("NastyObjective: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    const double scale = cfg_.scale_by_tau_sq ? cfg_.tau_a * cfg_.tau_a : 1.0;
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const auto z = row_span(logits, r);
        const auto z_ref = row_span(reference_logits_, r);
        const std::size_t label = static_cast<std::size_t>(labels_[r]);
        total += nasty_loss(z, z_ref, label, cfg_);
        if (dlogits) {
            double* g = dlogits->row(r);
            add_ce_grad(z, label, inv_n, g);
            const ProbVector q = soften(z_ref, cfg_.tau_a);
            add_kl_from_model_grad(z, q, cfg_.tau_a, -cfg_.omega * scale * inv_n, g);
        }
    }
    return total * inv_n;
}

}  // namespace kdlab
