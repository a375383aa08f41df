#include "kdlab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "binio.hpp"
#include "kdlab/checkpoint.hpp"
#include "kdlab/errors.hpp"
#include "kdlab/metrics.hpp"
#include "kdlab/rng.hpp"

namespace kdlab {

using nlohmann::ordered_json;

namespace {

std::string generator_name(SyntheticGenerator g) {
    return g == SyntheticGenerator::gaussian_blobs ? "gaussian_blobs" : "two_spirals";
}

SyntheticGenerator generator_from_name(const std::string& s) {
    if (s == "gaussian_blobs") return SyntheticGenerator::gaussian_blobs;
    if (s == "two_spirals") return SyntheticGenerator::two_spirals;
    throw ConfigError("unknown dataset generator: " + s);
}

ordered_json budget_to_json(const TrainBudget& b) {
    ordered_json j;
    j["epochs"] = b.epochs;
    j["batch_size"] = b.batch_size;
    ordered_json jo;
    jo["kind"] = to_string(b.optimizer.kind);
    jo["learning_rate"] = b.optimizer.learning_rate;
    jo["momentum"] = b.optimizer.momentum;
    jo["beta1"] = b.optimizer.beta1;
    jo["beta2"] = b.optimizer.beta2;
    jo["epsilon"] = b.optimizer.epsilon;
    jo["weight_decay"] = b.optimizer.weight_decay;
    j["optimizer"] = std::move(jo);
    if (b.early_stop_acc)
        j["early_stop_acc"] = *b.early_stop_acc;
    else
        j["early_stop_acc"] = nullptr;
    return j;
}

TrainBudget budget_from_json(const ordered_json& j) {
    TrainBudget b;
    b.epochs = j.at("epochs").get<int>();
    b.batch_size = j.at("batch_size").get<int>();
    const auto& jo = j.at("optimizer");
    b.optimizer.kind = optimizer_kind_from_string(jo.at("kind").get<std::string>());
    b.optimizer.learning_rate = jo.at("learning_rate").get<double>();
    b.optimizer.momentum = jo.at("momentum").get<double>();
    b.optimizer.beta1 = jo.at("beta1").get<double>();
    b.optimizer.beta2 = jo.at("beta2").get<double>();
    b.optimizer.epsilon = jo.at("epsilon").get<double>();
    b.optimizer.weight_decay = jo.at("weight_decay").get<double>();
    if (!j.at("early_stop_acc").is_null())
        b.early_stop_acc = j.at("early_stop_acc").get<double>();
    return b;
}

std::string fraction_tag(double f) {
    std::ostringstream s;
    s << f;
    return s.str();
}

}  // namespace

PipelineConfig reference_config() {
    PipelineConfig cfg;
    cfg.dataset = SyntheticSpec{};  // blobs-10: C=10, d=16, 500/200 per class
    cfg.kd = make_kd_config(0.9, 4.0);
    // blobs-10 calibration. The adversarial weight is dataset-dependent; at
    // this scale the divergence needs a higher temperature and a short
    // schedule to degrade distillation without wrecking the teacher itself.
    // Chain steps are narrow nets on an even shorter schedule: divergence from
    // the already-disturbed predecessor concentrates the longer it runs, so
    // stopping early is what preserves the successor's spread-out peaks.
    cfg.nasty = NastyConfig{0.03, 8.0, true};
    cfg.chain_nasty = NastyConfig{0.03, 8.0, true};
    cfg.chain_dims = {16, 16, 10};
    cfg.htc = HtcConfig{0.9, 50.0, 10.0};
    cfg.scm_k = 3;
    cfg.teacher_budget.epochs = 60;
    cfg.teacher_budget.batch_size = 64;
    cfg.teacher_budget.optimizer = OptimizerConfig{};  // adam, lr 1e-3
    cfg.nasty_budget = cfg.teacher_budget;
    cfg.nasty_budget.epochs = 12;
    cfg.chain_budget = cfg.teacher_budget;
    cfg.chain_budget.epochs = 8;
    cfg.student_budget.epochs = 300;
    cfg.student_budget.optimizer.learning_rate = 2e-3;
    cfg.student_budget.batch_size = 64;
    cfg.student_budget.optimizer = OptimizerConfig{};
    cfg.data_fractions = {0.1, 0.5, 0.9};
    cfg.no_label_arm = true;
    return cfg;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    ordered_json jd;
    jd["generator"] = generator_name(cfg.dataset.generator);
    jd["classes"] = cfg.dataset.classes;
    jd["dim"] = cfg.dataset.dim;
    jd["train_per_class"] = cfg.dataset.train_per_class;
    jd["test_per_class"] = cfg.dataset.test_per_class;
    jd["separation"] = cfg.dataset.separation;
    jd["noise"] = cfg.dataset.noise;
    jd["seed"] = cfg.dataset.seed;
    j["dataset"] = std::move(jd);
    j["teacher_dims"] = cfg.teacher_dims;
    j["student_dims"] = cfg.student_dims;
    j["activation"] = cfg.activation == Activation::relu ? "relu" : "tanh";
    j["kd"] = {{"alpha", cfg.kd.alpha}, {"tau", cfg.kd.tau}, {"lambda", cfg.kd.lambda}};
    j["nasty"] = {{"omega", cfg.nasty.omega},
                  {"tau_a", cfg.nasty.tau_a},
                  {"scale_by_tau_sq", cfg.nasty.scale_by_tau_sq}};
    j["chain_nasty"] = {{"omega", cfg.chain_nasty.omega},
                        {"tau_a", cfg.chain_nasty.tau_a},
                        {"scale_by_tau_sq", cfg.chain_nasty.scale_by_tau_sq}};
    j["chain_dims"] = cfg.chain_dims;
    j["htc"] = {{"alpha", cfg.htc.alpha}, {"tau", cfg.htc.tau}, {"m", cfg.htc.m}};
    j["scm"] = {{"k", cfg.scm_k},
                {"include_first", cfg.scm_options.include_first},
                {"probability_space", cfg.scm_options.probability_space},
                {"k_sweep", cfg.scm_k_sweep}};
    j["teacher_budget"] = budget_to_json(cfg.teacher_budget);
    j["nasty_budget"] = budget_to_json(cfg.nasty_budget);
    j["chain_budget"] = budget_to_json(cfg.chain_budget);
    j["student_budget"] = budget_to_json(cfg.student_budget);
    j["seeds"] = cfg.seeds;
    j["run_attacks"] = cfg.run_attacks;
    j["ablations"] = {{"data_fractions", cfg.data_fractions},
                      {"no_label", cfg.no_label_arm},
                      {"nasty_es", cfg.nasty_es_arm}};
    j["metrics"] = {{"peak_rho", cfg.peak_rho}, {"kl_tau", cfg.kl_tau}};
    j["output"] = {{"dir", cfg.output_dir}, {"save_checkpoints", cfg.save_checkpoints}};
    return j;
}

PipelineConfig config_from_json(const ordered_json& j) {
    try {
        PipelineConfig cfg;
        const auto& jd = j.at("dataset");
        cfg.dataset.generator = generator_from_name(jd.at("generator").get<std::string>());
        cfg.dataset.classes = jd.at("classes").get<int>();
        cfg.dataset.dim = jd.at("dim").get<int>();
        cfg.dataset.train_per_class = jd.at("train_per_class").get<int>();
        cfg.dataset.test_per_class = jd.at("test_per_class").get<int>();
        cfg.dataset.separation = jd.at("separation").get<double>();
        cfg.dataset.noise = jd.at("noise").get<double>();
        cfg.dataset.seed = jd.at("seed").get<std::uint64_t>();
        cfg.teacher_dims = j.at("teacher_dims").get<std::vector<std::size_t>>();
        cfg.student_dims = j.at("student_dims").get<std::vector<std::size_t>>();
        const std::string act = j.at("activation").get<std::string>();
        if (act != "relu" && act != "tanh") throw ConfigError("unknown activation: " + act);
        cfg.activation = act == "relu" ? Activation::relu : Activation::tanh;
        cfg.kd.alpha = j.at("kd").at("alpha").get<double>();
        cfg.kd.tau = j.at("kd").at("tau").get<double>();
        cfg.kd.lambda = j.at("kd").at("lambda").get<double>();
        cfg.nasty.omega = j.at("nasty").at("omega").get<double>();
        cfg.nasty.tau_a = j.at("nasty").at("tau_a").get<double>();
        cfg.nasty.scale_by_tau_sq = j.at("nasty").at("scale_by_tau_sq").get<bool>();
        cfg.chain_nasty.omega = j.at("chain_nasty").at("omega").get<double>();
        cfg.chain_nasty.tau_a = j.at("chain_nasty").at("tau_a").get<double>();
        cfg.chain_nasty.scale_by_tau_sq = j.at("chain_nasty").at("scale_by_tau_sq").get<bool>();
        cfg.chain_dims = j.at("chain_dims").get<std::vector<std::size_t>>();
        cfg.htc.alpha = j.at("htc").at("alpha").get<double>();
        cfg.htc.tau = j.at("htc").at("tau").get<double>();
        cfg.htc.m = j.at("htc").at("m").get<double>();
        cfg.scm_k = j.at("scm").at("k").get<int>();
        cfg.scm_options.include_first = j.at("scm").at("include_first").get<bool>();
        cfg.scm_options.probability_space = j.at("scm").at("probability_space").get<bool>();
        cfg.scm_k_sweep = j.at("scm").at("k_sweep").get<std::vector<int>>();
        cfg.teacher_budget = budget_from_json(j.at("teacher_budget"));
        cfg.nasty_budget = budget_from_json(j.at("nasty_budget"));
        cfg.chain_budget = budget_from_json(j.at("chain_budget"));
        cfg.student_budget = budget_from_json(j.at("student_budget"));
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.run_attacks = j.at("run_attacks").get<bool>();
        cfg.data_fractions = j.at("ablations").at("data_fractions").get<std::vector<double>>();
        cfg.no_label_arm = j.at("ablations").at("no_label").get<bool>();
        cfg.nasty_es_arm = j.at("ablations").at("nasty_es").get<bool>();
        cfg.peak_rho = j.at("metrics").at("peak_rho").get<double>();
        cfg.kl_tau = j.at("metrics").at("kl_tau").get<double>();
        cfg.output_dir = j.at("output").at("dir").get<std::string>();
        cfg.save_checkpoints = j.at("output").at("save_checkpoints").get<bool>();
        if (cfg.seeds.empty()) throw ConfigError("config: seed list must be nonempty");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON error in ") + path + ": " + e.what());
    }
    return config_from_json(j);
}

namespace {

// Per-seed execution context. Arms append results; a failed dependency marks
// downstream arms skipped instead of aborting the run.
struct SeedRun {
    const PipelineConfig& cfg;
    std::uint64_t seed;
    ExperimentReport& report;
    LabeledDataset train;
    LabeledDataset test;

    std::optional<Mlp> teacher;
    std::optional<Mlp> nasty;
    std::optional<std::vector<Mlp>> chain;

    TrainBudget arm_budget(const TrainBudget& base, const std::string& arm) const {
        TrainBudget b = base;
        b.seed = Rng::derive(seed, arm);
        return b;
    }

    void record(const std::string& arm, const TrainResult& r) {
        report.arms.push_back(
            {arm, seed, r.best_test_acc, r.final_test_acc, r.epochs_run, false, ""});
    }

    void record_skip(const std::string& arm, const std::string& why) {
        report.arms.push_back({arm, seed, 0.0, 0.0, 0, true, why});
    }

    // Runs one arm, catching failures so the rest of the pipeline continues.
    std::optional<TrainResult> run_arm(const std::string& arm,
                                       const std::function<TrainResult()>& body) {
        try {
            TrainResult r = body();
            record(arm, r);
            maybe_save(arm, r);
            return r;
        } catch (const std::exception& e) {
            record_skip(arm, e.what());
            return std::nullopt;
        }
    }

    void maybe_save(const std::string& arm, const TrainResult& r) const {
        if (cfg.output_dir.empty() || !cfg.save_checkpoints) return;
        namespace fs = std::filesystem;
        const fs::path dir = fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
        fs::create_directories(dir);
        CheckpointMeta meta{seed, r.epochs_run, r.best_test_acc, r.final_test_acc, arm};
        save_checkpoint(r.model, meta, (dir / (arm + ".ckpt")).string());
    }
};

void run_seed(SeedRun& ctx) {
    const PipelineConfig& cfg = ctx.cfg;
    const std::uint64_t seed = ctx.seed;
    ExperimentReport& report = ctx.report;

    auto teacher_res = ctx.run_arm("teacher", [&] {
        return train_vanilla(cfg.teacher_dims, cfg.activation, ctx.train, ctx.test,
                             ctx.arm_budget(cfg.teacher_budget, "teacher"));
    });
    // Deployed models are the final-epoch parameters, not the best test-set
    // checkpoint: selecting the served model by test accuracy would leak the
    // evaluation split into deployment.
    if (teacher_res) ctx.teacher = teacher_res->final_model;

    if (ctx.teacher) {
        auto nasty_res = ctx.run_arm("nasty_teacher", [&] {
            return train_nasty(cfg.teacher_dims, cfg.activation, *ctx.teacher, ctx.train,
                               ctx.test, cfg.nasty,
                               ctx.arm_budget(cfg.nasty_budget, "nasty_teacher"));
        });
        if (nasty_res) ctx.nasty = nasty_res->final_model;
    } else {
        ctx.record_skip("nasty_teacher", "teacher arm failed");
    }

    auto vanilla_res = ctx.run_arm("student_vanilla", [&] {
        return train_vanilla(cfg.student_dims, cfg.activation, ctx.train, ctx.test,
                             ctx.arm_budget(cfg.student_budget, "student_vanilla"));
    });

    std::optional<TrainResult> normal_kd_res, nasty_kd_res;
    if (ctx.teacher) {
        normal_kd_res = ctx.run_arm("student_normal_kd", [&] {
            return train_kd(cfg.student_dims, cfg.activation, *ctx.teacher, ctx.train,
                            ctx.test, cfg.kd,
                            ctx.arm_budget(cfg.student_budget, "student_normal_kd"));
        });
    } else {
        ctx.record_skip("student_normal_kd", "teacher arm failed");
    }
    if (ctx.nasty) {
        nasty_kd_res = ctx.run_arm("student_nasty_kd", [&] {
            return train_kd(cfg.student_dims, cfg.activation, *ctx.nasty, ctx.train,
                            ctx.test, cfg.kd,
                            ctx.arm_budget(cfg.student_budget, "student_nasty_kd"));
        });
    } else {
        ctx.record_skip("student_nasty_kd", "nasty arm failed");
    }

    // Baseline predicates.
    if (vanilla_res && normal_kd_res)
        report.predicates.push_back(
            {"stealing_normal_kd", seed,
             normal_kd_res->best_test_acc > vanilla_res->best_test_acc});
    if (normal_kd_res && nasty_kd_res)
        report.predicates.push_back(
            {"defense_nasty", seed,
             nasty_kd_res->best_test_acc < normal_kd_res->best_test_acc});

    if (ctx.teacher && ctx.nasty) {
        report.comparisons.push_back(
            {"kl_nasty_vs_teacher", seed,
             kl_to_reference(*ctx.nasty, *ctx.teacher, ctx.test, cfg.kl_tau), -1.0});
        report.comparisons.push_back(
            {"peaks_teacher", seed, -1.0,
             mean_peak_count(*ctx.teacher, ctx.test, cfg.peak_rho)});
        report.comparisons.push_back(
            {"peaks_nasty", seed, -1.0, mean_peak_count(*ctx.nasty, ctx.test, cfg.peak_rho)});
    }

    if (!cfg.run_attacks) return;

    std::optional<TrainResult> htc_res;
    if (ctx.nasty) {
        htc_res = ctx.run_arm("attack_htc", [&] {
            return attack_htc(cfg.student_dims, cfg.activation, *ctx.nasty, ctx.train,
                              ctx.test, cfg.htc,
                              ctx.arm_budget(cfg.student_budget, "attack_htc"));
        });
    } else {
        ctx.record_skip("attack_htc", "nasty arm failed");
    }

    // Chain construction (S^1 = nasty teacher).
    if (ctx.nasty) {
        try {
            ChainSpec spec;
            spec.k = cfg.scm_k;
            for (int i = 1; i < cfg.scm_k; ++i)
                spec.steps.push_back({cfg.chain_dims, cfg.chain_nasty});
            TrainBudget b = cfg.chain_budget;
            b.seed = Rng::derive(seed, "chain");
            ctx.chain = build_scm_chain(*ctx.nasty, spec, cfg.activation, ctx.train,
                                        ctx.test, b);
            for (std::size_t i = 1; i < ctx.chain->size(); ++i) {
                const AccuracyScore a = accuracy((*ctx.chain)[i], ctx.test);
                report.arms.push_back({"chain_s" + std::to_string(i + 1), seed, a.value,
                                       a.value, 0, false, ""});
            }
        } catch (const std::exception& e) {
            ctx.record_skip("chain", e.what());
        }
    } else {
        ctx.record_skip("chain", "nasty arm failed");
    }

    if (ctx.chain) {
        ctx.run_arm("attack_scm", [&] {
            return attack_scm(cfg.student_dims, cfg.activation, *ctx.chain, ctx.train,
                              ctx.test, cfg.htc,
                              ctx.arm_budget(cfg.student_budget, "attack_scm"),
                              cfg.scm_options);
        });
        for (int k : cfg.scm_k_sweep) {
            const std::string arm = "attack_scm_k" + std::to_string(k);
            if (k < 1 || k > static_cast<int>(ctx.chain->size())) {
                ctx.record_skip(arm, "k outside built chain length");
                continue;
            }
            ctx.run_arm(arm, [&] {
                const std::span<const Mlp> prefix(ctx.chain->data(),
                                                  static_cast<std::size_t>(k));
                return attack_scm(cfg.student_dims, cfg.activation, prefix, ctx.train,
                                  ctx.test, cfg.htc, ctx.arm_budget(cfg.student_budget, arm),
                                  cfg.scm_options);
            });
        }

        if (ctx.teacher) {
            const Matrix ens =
                chain_ensemble_logits(*ctx.chain, ctx.test.inputs, cfg.scm_options);
            report.comparisons.push_back(
                {"kl_scm_ensemble_vs_teacher", seed,
                 kl_logits_to_reference(ens, *ctx.teacher, ctx.test, cfg.kl_tau), -1.0});
        }
        if (ctx.chain->size() >= 2) {
            report.comparisons.push_back(
                {"peaks_s2", seed, -1.0,
                 mean_peak_count((*ctx.chain)[1], ctx.test, cfg.peak_rho)});
            auto defense_res = ctx.run_arm("defense_s2_htc", [&] {
                const Mlp& s2 = defend_scm(*ctx.chain, 2);
                // Same attacker seed as attack_htc: the only difference is the
                // deployed teacher.
                return attack_htc(cfg.student_dims, cfg.activation, s2, ctx.train, ctx.test,
                                  cfg.htc, ctx.arm_budget(cfg.student_budget, "attack_htc"));
            });
            if (defense_res && htc_res)
                report.predicates.push_back(
                    {"defense_scm_s2", seed,
                     defense_res->best_test_acc < htc_res->best_test_acc});
        }
    } else {
        ctx.record_skip("attack_scm", "chain construction failed");
        ctx.record_skip("defense_s2_htc", "chain construction failed");
    }

    // Limited-data ablations: HTC vs nasty-KD on the same stratified subset.
    for (double f : cfg.data_fractions) {
        const std::string tag = fraction_tag(f);
        if (!ctx.nasty) {
            ctx.record_skip("attack_htc_frac_" + tag, "nasty arm failed");
            ctx.record_skip("student_nasty_kd_frac_" + tag, "nasty arm failed");
            continue;
        }
        try {
            const LabeledDataset sub =
                subset_data(ctx.train, f, Rng::derive(seed, "fraction", std::uint64_t(f * 100)));
            // Scale epochs by 1/fraction so every fraction arm gets the same
            // optimizer-step budget; otherwise small fractions are judged on
            // far fewer updates, not less data.
            const auto frac_budget = [&](const std::string& arm) {
                TrainBudget b = ctx.arm_budget(cfg.student_budget, arm);
                b.epochs = static_cast<int>(std::lround(cfg.student_budget.epochs / f));
                return b;
            };
            ctx.run_arm("attack_htc_frac_" + tag, [&] {
                return attack_htc(cfg.student_dims, cfg.activation, *ctx.nasty, sub, ctx.test,
                                  cfg.htc, frac_budget("attack_htc_frac_" + tag));
            });
            ctx.run_arm("student_nasty_kd_frac_" + tag, [&] {
                return train_kd(cfg.student_dims, cfg.activation, *ctx.nasty, sub, ctx.test,
                                cfg.kd, frac_budget("student_nasty_kd_frac_" + tag));
            });
        } catch (const std::exception& e) {
            ctx.record_skip("attack_htc_frac_" + tag, e.what());
            ctx.record_skip("student_nasty_kd_frac_" + tag, e.what());
        }
    }

    // No-label setting: HTC with the ground-truth term removed.
    if (cfg.no_label_arm) {
        if (ctx.nasty) {
            HtcConfig no_label = cfg.htc;
            no_label.alpha = 1.0;
            ctx.run_arm("attack_htc_no_label", [&] {
                return attack_htc(cfg.student_dims, cfg.activation, *ctx.nasty, ctx.train,
                                  ctx.test, no_label,
                                  ctx.arm_budget(cfg.student_budget, "attack_htc_no_label"));
            });
        } else {
            ctx.record_skip("attack_htc_no_label", "nasty arm failed");
        }
    }

    // Accuracy-matched early-stopped nasty baseline (stopped at S^2's accuracy).
    if (cfg.nasty_es_arm) {
        if (ctx.teacher && ctx.chain && ctx.chain->size() >= 2) {
            const double target = accuracy((*ctx.chain)[1], ctx.test).value;
            auto es_res = ctx.run_arm("nasty_teacher_es", [&] {
                TrainBudget b = ctx.arm_budget(cfg.nasty_budget, "nasty_teacher_es");
                b.early_stop_acc = target;
                return train_nasty(cfg.teacher_dims, cfg.activation, *ctx.teacher, ctx.train,
                                   ctx.test, cfg.nasty, b);
            });
            if (es_res) {
                // Deployed ES model is the stopped state, not the best epoch.
                const Mlp es_model = es_res->final_model;
                ctx.run_arm("student_nasty_kd_es", [&] {
                    return train_kd(cfg.student_dims, cfg.activation, es_model, ctx.train,
                                    ctx.test, cfg.kd,
                                    ctx.arm_budget(cfg.student_budget, "student_nasty_kd_es"));
                });
            }
        } else {
            ctx.record_skip("nasty_teacher_es", "teacher or chain arm failed");
            ctx.record_skip("student_nasty_kd_es", "teacher or chain arm failed");
        }
    }
}

}  // namespace

ExperimentReport run_pipeline(const PipelineConfig& cfg) {
    if (cfg.seeds.empty()) throw ConfigError("run_pipeline: seed list must be nonempty");
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.seeds = cfg.seeds;
    report.config_snapshot = config_to_json(cfg);
    {
        // run_id = digest of the config, so identical configs share an id.
        binio::Digest d;
        const std::string dump = report.config_snapshot.dump();
        d.feed(dump.data(), dump.size());
        std::ostringstream id;
        id << std::hex << d.h;
        report.run_id = id.str();
    }

    for (std::uint64_t seed : cfg.seeds) {
        SyntheticSpec spec = cfg.dataset;
        spec.seed = Rng::derive(seed, "dataset", cfg.dataset.seed);
        auto [train, test] = gen_dataset(spec);
        if (report.dataset_desc.empty()) report.dataset_desc = train.provenance;
        SeedRun ctx{cfg, seed, report, std::move(train), std::move(test)};
        run_seed(ctx);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        const std::filesystem::path dir(cfg.output_dir);
        emit_report(report, ReportFormat::json, (dir / "report.json").string());
        emit_report(report, ReportFormat::csv, (dir / "report.csv").string());
    }
    return report;
}

}  // namespace kdlab
