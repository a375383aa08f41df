#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "kdlab/errors.hpp"
#include "kdlab/losses.hpp"
#include "kdlab/rng.hpp"

using namespace kdlab;

namespace {

LogitVector random_logits(Rng& rng, std::size_t c, double scale = 4.0) {
    LogitVector z(c);
    for (double& v : z) v = rng.uniform(-scale, scale);
    return z;
}

Matrix as_row(const LogitVector& z) {
    Matrix m(1, z.size());
    std::copy(z.begin(), z.end(), m.row(0));
    return m;
}

// Central finite differences of a scalar function of a logit vector.
LogitVector fd_gradient(const std::function<double(const LogitVector&)>& f,
                        const LogitVector& z, double h = 1e-5) {
    LogitVector g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        LogitVector plus = z, minus = z;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (f(plus) - f(minus)) / (2 * h);
    }
    return g;
}

double relative_error(const LogitVector& a, const LogitVector& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-10});
}

// Analytic gradient of one objective on a single-row batch.
LogitVector analytic_gradient(const LogitObjective& objective, const LogitVector& z) {
    Matrix d(1, z.size());
    objective.evaluate(as_row(z), &d);
    return LogitVector(d.row(0), d.row(0) + d.cols);
}

}  // namespace

TEST_CASE("kd_loss: alpha=0 collapses to plain CE exactly") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 2 + trial % 5;
        const LogitVector z_s = random_logits(rng, c);
        const LogitVector z_t = random_logits(rng, c);
        const std::size_t label = trial % c;
        const KdConfig cfg{0.0, 4.0, 16.0};
        const double expect = cross_entropy(onehot(c, label), soften(z_s, 1.0));
        CHECK(kd_loss(z_s, z_t, label, cfg) == expect);  // exact
    }
}

TEST_CASE("kd_loss: zero at z_s = z_t with alpha = 1") {
    Rng rng(2);
    const LogitVector z = random_logits(rng, 5);
    CHECK(kd_loss(z, z, 2, make_kd_config(1.0, 4.0)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kd_loss: term-by-term oracle") {
    Rng rng(3);
    const LogitVector z_s = random_logits(rng, 6);
    const LogitVector z_t = random_logits(rng, 6);
    const KdConfig cfg{0.9, 4.0, 16.0};
    const double kl = kl_divergence(soften(z_t, 4.0), soften(z_s, 4.0));
    const double ce = cross_entropy(onehot(6, 3), soften(z_s, 1.0));
    CHECK(kd_loss(z_s, z_t, 3, cfg) ==
          doctest::Approx(0.9 * 16.0 * kl + 0.1 * ce).epsilon(1e-10));
}

TEST_CASE("htc_loss: alpha=0 collapse, term-by-term oracle") {
    Rng rng(4);
    const LogitVector z_s = random_logits(rng, 4);
    const LogitVector z_n = random_logits(rng, 4);
    const HtcConfig zero{0.0, 50.0, 10.0};
    CHECK(htc_loss(z_s, z_n, 1, zero) ==
          cross_entropy(onehot(4, 1), soften(z_s, 1.0)));  // exact

    const HtcConfig cfg{0.9, 50.0, 50.0};
    const double ce = cross_entropy(onehot(4, 1), soften(z_s, 1.0));
    const double kl = kl_divergence(soften(z_n, 50.0), soften(z_s, 1.0));
    CHECK(htc_loss(z_s, z_n, 1, cfg) == doctest::Approx(0.1 * ce + 0.9 * 50.0 * kl).epsilon(1e-10));
}

TEST_CASE("scm_loss: collapses and identities") {
    Rng rng(5);
    const LogitVector z = random_logits(rng, 5);
    const HtcConfig full{1.0, 4.0, 10.0};
    CHECK(scm_loss(z, z, 0, full) == doctest::Approx(0.0).epsilon(1e-12));

    // alpha=0 exact CE collapse; identical across all three attack losses.
    const LogitVector z_t = random_logits(rng, 5);
    const HtcConfig zero{0.0, 4.0, 10.0};
    const KdConfig kd_zero{0.0, 4.0, 16.0};
    const double ce = cross_entropy(onehot(5, 2), soften(z, 1.0));
    CHECK(scm_loss(z, z_t, 2, zero) == ce);
    CHECK(htc_loss(z, z_t, 2, zero) == ce);
    CHECK(kd_loss(z, z_t, 2, kd_zero) == ce);

    // Single-member ensemble: scm_loss(z_s, member) is the teacher loss with
    // that member.
    std::vector<LogitVector> chain{z_t};
    const LogitVector ens = ensemble_logits(chain);
    const HtcConfig cfg{0.9, 4.0, 1.0};
    CHECK(scm_loss(z, ens, 2, cfg) == scm_loss(z, z_t, 2, cfg));
}

TEST_CASE("scm_loss: term-by-term oracle on a 3-member ensemble") {
    Rng rng(6);
    const LogitVector z_s = random_logits(rng, 4);
    std::vector<LogitVector> members;
    for (int i = 0; i < 3; ++i) members.push_back(random_logits(rng, 4));
    const LogitVector z_ens = ensemble_logits(members);
    const HtcConfig cfg{0.9, 4.0, 10.0};
    const double ce = cross_entropy(onehot(4, 0), soften(z_s, 1.0));
    const double kl = kl_divergence(soften(z_ens, 4.0), soften(z_s, 4.0));
    CHECK(scm_loss(z_s, z_ens, 0, cfg) ==
          doctest::Approx(0.1 * ce + 0.9 * 10.0 * kl).epsilon(1e-10));
}

TEST_CASE("nasty_loss: collapses and term-by-term oracle") {
    Rng rng(7);
    const LogitVector z = random_logits(rng, 5);
    const LogitVector z_ref = random_logits(rng, 5);
    const double ce = cross_entropy(onehot(5, 1), soften(z, 1.0));

    CHECK(nasty_loss(z, z_ref, 1, NastyConfig{0.0, 4.0, true}) == ce);  // omega=0 exact
    CHECK(nasty_loss(z, z, 1, NastyConfig{0.04, 4.0, true}) ==
          doctest::Approx(ce).epsilon(1e-12));  // KL term zero at z = z_ref

    const NastyConfig cfg{0.04, 4.0, true};
    const double kl = kl_divergence(soften(z, 4.0), soften(z_ref, 4.0));
    CHECK(nasty_loss(z, z_ref, 1, cfg) ==
          doctest::Approx(ce - 0.04 * 16.0 * kl).epsilon(1e-10));

    // tau^2 scaling can be disabled.
    const NastyConfig flat{0.04, 4.0, false};
    CHECK(nasty_loss(z, z_ref, 1, flat) == doctest::Approx(ce - 0.04 * kl).epsilon(1e-10));
}

TEST_CASE("gradient suite: every loss matches finite differences on 100+ instances") {
    Rng rng(1234);
    int instances = 0;
    while (instances < 120) {
        const std::size_t c = 2 + instances % 2;  // 2 or 3 classes
        const std::size_t label = instances % c;
        const LogitVector z = random_logits(rng, c, 3.0);
        const LogitVector z_ctx = random_logits(rng, c, 3.0);
        const double alpha = 0.1 + 0.8 * rng.uniform();
        const double tau = 1.0 + 49.0 * rng.uniform();

        const KdConfig kd_cfg = make_kd_config(alpha, tau);
        const HtcConfig htc_cfg{alpha, tau, 1.0 + 9.0 * rng.uniform()};
        const NastyConfig nasty_cfg{0.04 + 0.2 * rng.uniform(), 1.0 + 3.0 * rng.uniform(), true};

        const KdObjective kd_obj(as_row(z_ctx), {static_cast<int>(label)}, kd_cfg);
        const HtcObjective htc_obj(as_row(z_ctx), {static_cast<int>(label)}, htc_cfg);
        Matrix scm_target(1, c);
        const ProbVector y_ens = soften(z_ctx, htc_cfg.tau);
        std::copy(y_ens.begin(), y_ens.end(), scm_target.row(0));
        const ScmObjective scm_obj(std::move(scm_target), {static_cast<int>(label)}, htc_cfg);
        const NastyObjective nasty_obj(as_row(z_ctx), {static_cast<int>(label)}, nasty_cfg);

        const LogitObjective* objectives[] = {&kd_obj, &htc_obj, &scm_obj, &nasty_obj};
        for (const LogitObjective* obj : objectives) {
            const LogitVector analytic = analytic_gradient(*obj, z);
            const LogitVector fd = fd_gradient(
                [&](const LogitVector& zz) { return obj->evaluate(as_row(zz), nullptr); }, z);
            CHECK(relative_error(analytic, fd) < 1e-4);
        }
        ++instances;
    }
    CHECK(instances >= 100);
}

TEST_CASE("CE and KL against a fixed target have identical gradients") {
    // The two losses differ by the target's entropy, a constant in z.
    Rng rng(91);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t c = 2 + trial % 5;
        const LogitVector z = random_logits(rng, c, 3.0);
        const ProbVector q = soften(random_logits(rng, c, 3.0), 1.0);
        const LogitVector g_ce = fd_gradient(
            [&](const LogitVector& zz) { return cross_entropy(q, soften(zz, 1.0)); }, z);
        const LogitVector g_kl = fd_gradient(
            [&](const LogitVector& zz) { return kl_divergence(q, soften(zz, 1.0)); }, z);
        for (std::size_t i = 0; i < c; ++i) CHECK(std::abs(g_ce[i] - g_kl[i]) <= 1e-9);
    }
}

TEST_CASE("htc_loss gradient equals the one-hot-composition CE gradient at m=1") {
    Rng rng(92);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t c = 2 + trial % 4;
        const std::size_t label = trial % c;
        const LogitVector z = random_logits(rng, c, 3.0);
        const LogitVector z_n = random_logits(rng, c, 3.0);
        const double alpha = rng.uniform();
        const HtcConfig cfg{alpha, 20.0, 1.0};

        const LogitVector g_htc = fd_gradient(
            [&](const LogitVector& zz) { return htc_loss(zz, z_n, label, cfg); }, z);
        // CE against the composed target y_net = (1-a) onehot + a soften(z_n, tau).
        const ProbVector y_net = compose_htc(soften(z_n, cfg.tau), label, alpha);
        const LogitVector g_mix = fd_gradient(
            [&](const LogitVector& zz) { return cross_entropy(y_net, soften(zz, 1.0)); }, z);
        for (std::size_t i = 0; i < c; ++i) CHECK(std::abs(g_htc[i] - g_mix[i]) <= 1e-9);
    }
}

TEST_CASE("objectives reject shape mismatches") {
    const KdObjective kd_obj(Matrix(1, 3), {0}, KdConfig{});
    const Matrix wrong(1, 4);
    CHECK_THROWS_AS(kd_obj.evaluate(wrong, nullptr), ShapeError);
    const LogitVector two{1.0, 2.0};
    const LogitVector three{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(kd_loss(two, three, 0, KdConfig{}), ShapeError);
    CHECK_THROWS_AS(htc_loss(two, two, 5, HtcConfig{}), ShapeError);
}
