#include "kdlab/logit_ops.hpp"

#include <algorithm>
#include <cmath>

#include "kdlab/errors.hpp"

namespace kdlab {

ProbVector soften(std::span<const double> z, double tau) {
    if (tau <= 0.0) throw ConfigError("soften: temperature must be positive");
    if (z.size() < 2) throw ShapeError("soften: need at least 2 classes");
    const double zmax = *std::max_element(z.begin(), z.end());
    ProbVector p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp((z[i] - zmax) / tau);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

ProbVector onehot(std::size_t class_count, std::size_t target) {
    if (target >= class_count) throw ShapeError("onehot: target out of range");
    ProbVector p(class_count, 0.0);
    p[target] = 1.0;
    return p;
}

ProbVector compose_htc(std::span<const double> y_nasty, std::size_t target,
                       double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("compose_htc: alpha outside [0,1]");
    if (target >= y_nasty.size()) throw ShapeError("compose_htc: target out of range");
    ProbVector y_net(y_nasty.size());
    for (std::size_t i = 0; i < y_nasty.size(); ++i) y_net[i] = alpha * y_nasty[i];
    y_net[target] += 1.0 - alpha;
    return y_net;
}

LogitVector ensemble_logits(std::span<const LogitVector> members) {
    if (members.empty()) throw ShapeError("ensemble_logits: empty member list");
    const std::size_t c = members.front().size();
    LogitVector mean(c, 0.0);
    for (const LogitVector& m : members) {
        if (m.size() != c) throw ShapeError("ensemble_logits: mixed member lengths");
        for (std::size_t i = 0; i < c; ++i) mean[i] += m[i];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

ProbVector ensemble_probabilities(std::span<const LogitVector> members, double tau) {
    if (members.empty()) throw ShapeError("ensemble_probabilities: empty member list");
    const std::size_t c = members.front().size();
    ProbVector mean(c, 0.0);
    for (const LogitVector& m : members) {
        if (m.size() != c) throw ShapeError("ensemble_probabilities: mixed member lengths");
        const ProbVector p = soften(m, tau);
        for (std::size_t i = 0; i < c; ++i) mean[i] += p[i];
    }
    for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ShapeError("kl_divergence: length mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;  // 0 * ln 0 = 0
        kl += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
    }
    return kl;
}

double cross_entropy(std::span<const double> p_target, std::span<const double> s) {
    if (p_target.size() != s.size()) throw ShapeError("cross_entropy: length mismatch");
    double ce = 0.0;
    for (std::size_t i = 0; i < p_target.size(); ++i) {
        if (p_target[i] <= 0.0) continue;
        ce -= p_target[i] * std::log(std::max(s[i], kProbFloor));
    }
    return ce;
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v <= 0.0) continue;
        h -= v * std::log(v);
    }
    return h;
}

std::size_t count_peaks(std::span<const double> p, double rho) {
    if (rho <= 0.0 || rho > 1.0) throw ConfigError("count_peaks: rho outside (0,1]");
    const double pmax = *std::max_element(p.begin(), p.end());
    const double threshold = rho * pmax;
    std::size_t n = 0;
    for (double v : p) {
        if (v >= threshold) ++n;
    }
    return n;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace kdlab
