// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1-3 are exact property/gradient suites; 4-9 are
// directional checks on the shared reference pipeline run; 10 covers the
// persistence and reproducibility infrastructure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kdlab/checkpoint.hpp"
#include "kdlab/dataset.hpp"
#include "kdlab/logit_ops.hpp"
#include "kdlab/losses.hpp"
#include "kdlab/metrics.hpp"
#include "kdlab/pipeline.hpp"
#include "kdlab/rng.hpp"
#include "kdlab/train.hpp"

using namespace kdlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

void report_criterion(int number, const std::string& name, bool ok) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, name.c_str());
    for (const std::string& s : g_notes) std::printf("        %s\n", s.c_str());
    g_notes.clear();
    if (!ok) ++g_failures;
    std::fflush(stdout);
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

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

// ---- report access helpers ----

std::optional<double> arm_acc(const ExperimentReport& r, const std::string& arm,
                              std::uint64_t seed) {
    const ArmResult* a = r.find_arm(arm, seed);
    if (!a || a->skipped) return std::nullopt;
    return a->best_acc;
}

// Accuracy of the deployed (final-epoch) model; teachers and chain members
// are served as their last training state, not the best test checkpoint.
std::optional<double> deployed_acc(const ExperimentReport& r, const std::string& arm,
                                   std::uint64_t seed) {
    const ArmResult* a = r.find_arm(arm, seed);
    if (!a || a->skipped) return std::nullopt;
    return a->final_acc;
}

std::optional<double> median_of(const ExperimentReport& r, const std::string& arm,
                                bool deployed) {
    std::vector<double> v;
    for (std::uint64_t s : r.seeds) {
        const auto a = deployed ? deployed_acc(r, arm, s) : arm_acc(r, arm, s);
        if (!a) return std::nullopt;
        v.push_back(*a);
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> median_acc(const ExperimentReport& r, const std::string& arm) {
    return median_of(r, arm, false);
}

std::optional<double> median_deployed_acc(const ExperimentReport& r, const std::string& arm) {
    return median_of(r, arm, true);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// ---- criterion 1: exact property suite ----

bool criterion_properties() {
    const double start = now_seconds();
    bool ok = true;
    Rng rng(100);
    const std::vector<double> taus{0.5, 1.0, 4.0, 50.0};

    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + trial % 9;
        const LogitVector z = random_logits(rng, c, 6.0);

        double prev_entropy = -1.0;
        for (double tau : taus) {
            const ProbVector p = soften(z, tau);
            double sum = 0.0;
            for (double v : p) sum += v;
            ok &= std::abs(sum - 1.0) <= 1e-9;             // normalization
            ok &= argmax(p) == argmax(z);                  // argmax invariance
            const double h = entropy(p);
            if (prev_entropy >= 0.0) ok &= h > prev_entropy - 1e-12;  // monotone in tau
            prev_entropy = h;
        }

        const ProbVector flat = soften(z, 1e6);            // uniform limit
        for (double v : flat) ok &= std::abs(v - 1.0 / c) <= 1e-3;

        const ProbVector p = soften(z, 1.0);
        const ProbVector q = soften(random_logits(rng, c, 6.0), 1.0);
        ok &= kl_divergence(p, q) >= 0.0;
        ok &= kl_divergence(p, p) == 0.0;
        ok &= std::abs(cross_entropy(p, q) - (kl_divergence(p, q) + entropy(p))) <= 1e-10;

        const double alpha = rng.uniform();
        const std::size_t target = trial % c;
        const ProbVector y_net = compose_htc(q, target, alpha);
        ok &= y_net[target] >= 1.0 - alpha;                // HTC floor

        std::vector<LogitVector> copies(1 + trial % 4, z); // ensemble idempotence
        const LogitVector ens = ensemble_logits(copies);
        for (std::size_t i = 0; i < c; ++i) ok &= std::abs(ens[i] - z[i]) <= 1e-12;
    }

    const double elapsed = now_seconds() - start;
    note("property suite over 200 random instances, " + fmt(elapsed) + "s (< 5s)");
    return ok && elapsed < 5.0;
}

// ---- criterion 2: gradient suite ----

bool criterion_gradients() {
    const double start = now_seconds();
    bool ok = true;
    Rng rng(200);

    int instances = 0;
    double worst = 0.0;
    while (instances < 120) {
        const std::size_t c = 2 + instances % 3;
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
            Matrix d(1, c);
            obj->evaluate(as_row(z), &d);
            const LogitVector analytic(d.row(0), d.row(0) + c);
            const LogitVector fd = fd_gradient(
                [&](const LogitVector& zz) { return obj->evaluate(as_row(zz), nullptr); }, z);
            const double err = relative_error(analytic, fd);
            worst = std::max(worst, err);
            ok &= err < 1e-4;
        }
        ++instances;
    }
    note("4 losses x " + std::to_string(instances) + " instances, worst rel err " +
         fmt(worst));

    // CE against a fixed target and KL against the same target differ by the
    // target's entropy, a constant: gradients must agree to 1e-9.
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t c = 2 + trial % 5;
        const LogitVector z = random_logits(rng, c, 3.0);
        const ProbVector q = soften(random_logits(rng, c, 3.0), 1.0);
        const LogitVector g_ce = fd_gradient(
            [&](const LogitVector& zz) { return cross_entropy(q, soften(zz, 1.0)); }, z);
        const LogitVector g_kl = fd_gradient(
            [&](const LogitVector& zz) { return kl_divergence(q, soften(zz, 1.0)); }, z);
        for (std::size_t i = 0; i < c; ++i) ok &= std::abs(g_ce[i] - g_kl[i]) <= 1e-9;
    }

    const double elapsed = now_seconds() - start;
    note("gradient suite " + fmt(elapsed) + "s (< 30s)");
    return ok && elapsed < 30.0;
}

// ---- criterion 3: collapse identities + determinism ----

bool criterion_collapse() {
    bool ok = true;
    Rng rng(300);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t c = 2 + trial % 8;
        const std::size_t label = trial % c;
        const LogitVector z = random_logits(rng, c);
        const LogitVector z_ctx = random_logits(rng, c);
        const double ce = cross_entropy(onehot(c, label), soften(z, 1.0));

        ok &= kd_loss(z, z_ctx, label, KdConfig{0.0, 4.0, 16.0}) == ce;
        ok &= htc_loss(z, z_ctx, label, HtcConfig{0.0, 50.0, 10.0}) == ce;
        ok &= scm_loss(z, z_ctx, label, HtcConfig{0.0, 4.0, 10.0}) == ce;
        ok &= nasty_loss(z, z_ctx, label, NastyConfig{0.0, 4.0, true}) == ce;
    }
    if (!ok) note("loss collapse identities violated");

    SyntheticSpec spec;
    spec.classes = 3;
    spec.dim = 6;
    spec.train_per_class = 25;
    spec.test_per_class = 10;
    spec.seed = 31;
    auto [train, test] = gen_dataset(spec);
    TrainBudget budget;
    budget.epochs = 3;
    budget.batch_size = 16;
    budget.seed = 8;
    const TrainResult a = train_vanilla({6, 10, 3}, Activation::relu, train, test, budget);
    const TrainResult b = train_vanilla({6, 10, 3}, Activation::relu, train, test, budget);
    const bool deterministic =
        parameter_digest(a.final_model) == parameter_digest(b.final_model) &&
        a.epoch_test_acc == b.epoch_test_acc;
    if (!deterministic) note("repeated training runs were not bit-identical");
    return ok && deterministic;
}

// ---- criteria 4-9: the shared reference pipeline ----

bool criterion_defense(const ExperimentReport& r, double elapsed) {
    const auto normal_kd = median_acc(r, "student_normal_kd");
    const auto nasty_kd = median_acc(r, "student_nasty_kd");
    const auto teacher = median_deployed_acc(r, "teacher");
    const auto nasty = median_deployed_acc(r, "nasty_teacher");
    if (!normal_kd || !nasty_kd || !teacher || !nasty) {
        note("required arms missing or skipped");
        return false;
    }
    note("median acc: teacher " + fmt(*teacher) + ", nasty teacher " + fmt(*nasty) +
         ", normal-KD " + fmt(*normal_kd) + ", nasty-KD " + fmt(*nasty_kd));
    note("defense stage wall time " + fmt(elapsed) + "s (< 180s)");
    const bool student_dropped = *nasty_kd <= *normal_kd - 0.02;
    const bool teacher_kept = *nasty >= *teacher - 0.05;
    if (!student_dropped) note("nasty-KD student did not drop >= 2 points");
    if (!teacher_kept) note("nasty teacher lost > 5 points of accuracy");
    return student_dropped && teacher_kept && elapsed < 180.0;
}

bool criterion_attacks(const ExperimentReport& r) {
    const auto vanilla = median_acc(r, "student_vanilla");
    const auto nasty_kd = median_acc(r, "student_nasty_kd");
    const auto htc = median_acc(r, "attack_htc");
    const auto scm = median_acc(r, "attack_scm");
    if (!vanilla || !nasty_kd || !htc || !scm) {
        note("required arms missing or skipped");
        return false;
    }
    note("median acc: vanilla " + fmt(*vanilla) + ", nasty-KD " + fmt(*nasty_kd) +
         ", HTC " + fmt(*htc) + ", SCM " + fmt(*scm));
    bool ok = true;
    if (!(*htc > *nasty_kd)) { note("HTC did not beat nasty-KD"); ok = false; }
    if (!(*scm > *nasty_kd)) { note("SCM did not beat nasty-KD"); ok = false; }
    if (!(*htc >= *vanilla - 0.01)) { note("HTC fell > 1 point below vanilla"); ok = false; }
    if (!(*scm >= *vanilla - 0.01)) { note("SCM fell > 1 point below vanilla"); ok = false; }
    return ok;
}

bool criterion_kl(const ExperimentReport& r) {
    int wins = 0, usable = 0;
    for (std::uint64_t s : r.seeds) {
        const ComparisonResult* ens = r.find_comparison("kl_scm_ensemble_vs_teacher", s);
        const ComparisonResult* nasty = r.find_comparison("kl_nasty_vs_teacher", s);
        if (!ens || !nasty || ens->mean_kl < 0.0 || nasty->mean_kl < 0.0) continue;
        ++usable;
        if (ens->mean_kl < nasty->mean_kl) ++wins;
    }
    note("KL(ensemble||teacher) < KL(nasty||teacher) in " + std::to_string(wins) + "/" +
         std::to_string(usable) + " seeds (need >= 4/5)");
    return usable == static_cast<int>(r.seeds.size()) && wins >= 4;
}

bool criterion_improved_defense(const ExperimentReport& r) {
    int wins = 0, usable = 0;
    for (std::uint64_t s : r.seeds) {
        const auto defended = arm_acc(r, "defense_s2_htc", s);
        const auto undefended = arm_acc(r, "attack_htc", s);
        if (!defended || !undefended) continue;
        ++usable;
        if (*defended <= *undefended) ++wins;
    }
    note("HTC vs S^2 <= HTC vs S^1 in " + std::to_string(wins) + "/" +
         std::to_string(usable) + " seeds (need >= 3/5)");

    const auto s2 = median_deployed_acc(r, "chain_s2");
    const auto nasty = median_deployed_acc(r, "nasty_teacher");
    if (!s2 || !nasty) {
        note("chain_s2 or nasty_teacher arm missing");
        return false;
    }
    note("median acc: S^2 " + fmt(*s2) + ", nasty teacher " + fmt(*nasty) +
         " (within 5 points)");
    const bool acc_kept = std::abs(*s2 - *nasty) <= 0.05;
    if (!acc_kept) note("S^2 accuracy strayed > 5 points from the nasty teacher");
    return usable == static_cast<int>(r.seeds.size()) && wins >= 3 && acc_kept;
}

bool criterion_peaks(const ExperimentReport& r) {
    std::vector<double> teacher_peaks, nasty_peaks;
    int s2_wins = 0, usable = 0;
    for (std::uint64_t s : r.seeds) {
        const ComparisonResult* t = r.find_comparison("peaks_teacher", s);
        const ComparisonResult* n = r.find_comparison("peaks_nasty", s);
        const ComparisonResult* s2 = r.find_comparison("peaks_s2", s);
        if (t && t->mean_peaks >= 0.0) teacher_peaks.push_back(t->mean_peaks);
        if (n && n->mean_peaks >= 0.0) nasty_peaks.push_back(n->mean_peaks);
        if (n && s2 && n->mean_peaks >= 0.0 && s2->mean_peaks >= 0.0) {
            ++usable;
            if (s2->mean_peaks >= n->mean_peaks) ++s2_wins;
        }
    }
    if (teacher_peaks.size() != r.seeds.size() || nasty_peaks.size() != r.seeds.size()) {
        note("peak comparisons missing for some seeds");
        return false;
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double mt = median(teacher_peaks);
    const double mn = median(nasty_peaks);
    note("median peak count: teacher " + fmt(mt) + ", nasty " + fmt(mn));
    note("peaks(S^2) >= peaks(S^1) in " + std::to_string(s2_wins) + "/" +
         std::to_string(usable) + " seeds (need >= 3/5)");
    return mn > mt && usable == static_cast<int>(r.seeds.size()) && s2_wins >= 3;
}

bool criterion_ablations(const ExperimentReport& r) {
    bool ok = true;
    for (const std::string& tag : {std::string("0.1"), std::string("0.5"), std::string("0.9")}) {
        for (const std::string& prefix :
             {std::string("attack_htc_frac_"), std::string("student_nasty_kd_frac_")}) {
            if (!median_acc(r, prefix + tag)) {
                note("arm " + prefix + tag + " missing or skipped");
                ok = false;
            }
        }
    }
    if (!median_acc(r, "attack_htc_no_label")) {
        note("no-label arm missing or skipped");
        ok = false;
    }
    if (!ok) return false;

    const double htc01 = *median_acc(r, "attack_htc_frac_0.1");
    const double kd01 = *median_acc(r, "student_nasty_kd_frac_0.1");
    note("fraction 0.1 median acc: HTC " + fmt(htc01) + ", nasty-KD " + fmt(kd01));
    note("no-label HTC median acc: " + fmt(*median_acc(r, "attack_htc_no_label")));
    if (!(htc01 > kd01)) {
        note("HTC did not beat nasty-KD at fraction 0.1");
        return false;
    }
    return true;
}

// ---- criterion 10: infrastructure ----

bool criterion_infrastructure(double pipeline_elapsed) {
    bool ok = true;

    // Checkpoint round trip is bit-exact.
    {
        const Mlp model = init_mlp({16, 32, 10}, Activation::relu, 1234);
        const fs::path path = fs::temp_directory_path() / "kdlab_acceptance.ckpt";
        save_checkpoint(model, CheckpointMeta{1234, 3, 0.5, 0.5, "probe"}, path.string());
        const Mlp loaded = load_checkpoint(path.string());
        if (parameter_digest(loaded) != parameter_digest(model)) {
            note("checkpoint round trip changed parameters");
            ok = false;
        }
        fs::remove(path);
    }

    // Report re-run from the embedded config is byte-identical (wall time is
    // the one field that legitimately differs).
    {
        PipelineConfig small;
        small.dataset.classes = 3;
        small.dataset.dim = 6;
        small.dataset.train_per_class = 30;
        small.dataset.test_per_class = 10;
        small.teacher_dims = {6, 16, 3};
        small.student_dims = {6, 8, 3};
        small.teacher_budget.epochs = 2;
        small.teacher_budget.batch_size = 16;
        small.student_budget.epochs = 2;
        small.student_budget.batch_size = 16;
        small.scm_k = 2;
        small.seeds = {1, 2};
        small.data_fractions = {0.5};
        small.no_label_arm = true;

        ExperimentReport first = run_pipeline(small);
        const PipelineConfig replay = config_from_json(first.config_snapshot);
        ExperimentReport second = run_pipeline(replay);
        first.wall_seconds = 0.0;
        second.wall_seconds = 0.0;
        if (report_to_json(first).dump(2) != report_to_json(second).dump(2)) {
            note("report re-run from embedded config differed");
            ok = false;
        }
        if (report_to_csv(first) != report_to_csv(second)) {
            note("CSV re-run differed");
            ok = false;
        }
    }

    // IDX fixture parses exactly.
    {
        const fs::path img_path = fs::temp_directory_path() / "kdlab_acceptance_images.idx";
        const fs::path lab_path = fs::temp_directory_path() / "kdlab_acceptance_labels.idx";
        auto push_be32 = [](std::vector<std::uint8_t>& v, std::uint32_t x) {
            v.push_back(static_cast<std::uint8_t>(x >> 24));
            v.push_back(static_cast<std::uint8_t>(x >> 16));
            v.push_back(static_cast<std::uint8_t>(x >> 8));
            v.push_back(static_cast<std::uint8_t>(x));
        };
        std::vector<std::uint8_t> images;
        push_be32(images, 0x803);
        push_be32(images, 2);
        push_be32(images, 2);
        push_be32(images, 2);
        for (std::uint8_t b : {0, 255, 128, 64, 255, 0, 0, 255}) images.push_back(b);
        std::vector<std::uint8_t> labels;
        push_be32(labels, 0x801);
        push_be32(labels, 2);
        labels.push_back(1);
        labels.push_back(0);
        std::ofstream(img_path, std::ios::binary)
            .write(reinterpret_cast<const char*>(images.data()),
                   static_cast<std::streamsize>(images.size()));
        std::ofstream(lab_path, std::ios::binary)
            .write(reinterpret_cast<const char*>(labels.data()),
                   static_cast<std::streamsize>(labels.size()));
        const LabeledDataset ds = load_idx(img_path.string(), lab_path.string());
        const bool parsed = ds.size() == 2 && ds.inputs.cols == 4 &&
                            ds.labels == std::vector<int>{1, 0} && ds.inputs(0, 0) == 0.0 &&
                            ds.inputs(0, 1) == 1.0 && ds.inputs(1, 0) == 1.0;
        if (!parsed) {
            note("IDX fixture did not parse exactly");
            ok = false;
        }
        fs::remove(img_path);
        fs::remove(lab_path);
    }

    note("reference pipeline wall time " + fmt(pipeline_elapsed) + "s (< 300s)");
    if (pipeline_elapsed >= 300.0) {
        note("reference pipeline exceeded the 5 minute budget");
        ok = false;
    }
    return ok;
}

}  // namespace

int main() {
    report_criterion(1, "softmax/KL/entropy/composition property suite", criterion_properties());
    report_criterion(2, "analytic gradients match finite differences", criterion_gradients());
    report_criterion(3, "loss collapse identities and bit-exact determinism",
                     criterion_collapse());

    // Defense stage (criterion 4) timed on its own: no attacks, no ablations.
    PipelineConfig defense_cfg = reference_config();
    defense_cfg.run_attacks = false;
    defense_cfg.data_fractions.clear();
    defense_cfg.no_label_arm = false;
    const double t_def = now_seconds();
    const ExperimentReport defense_report = run_pipeline(defense_cfg);
    const double defense_elapsed = now_seconds() - t_def;
    report_criterion(4, "nasty teacher degrades distillation, keeps accuracy",
                     criterion_defense(defense_report, defense_elapsed));

    // Full reference run shared by criteria 5-10.
    const double t_full = now_seconds();
    const ExperimentReport full = run_pipeline(reference_config());
    const double full_elapsed = now_seconds() - t_full;

    report_criterion(5, "HTC and SCM attacks recover student accuracy", criterion_attacks(full));
    report_criterion(6, "SCM ensemble reduces KL to the original teacher", criterion_kl(full));
    report_criterion(7, "deploying S^2 blunts the HTC attack", criterion_improved_defense(full));
    report_criterion(8, "nasty outputs are multi-peaked, S^2 at least as peaked",
                     criterion_peaks(full));
    report_criterion(9, "data-fraction and no-label ablations complete",
                     criterion_ablations(full));
    report_criterion(10, "checkpointing, report reproducibility, IDX, runtime",
                     criterion_infrastructure(full_elapsed));

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
