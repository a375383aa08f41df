// Command-line harness for the distillation stealing/defense lab.
//
// Exit codes: 0 success, 2 configuration error, 3 data/format error,
// 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdlab/checkpoint.hpp"
#include "kdlab/dataset.hpp"
#include "kdlab/errors.hpp"
#include "kdlab/metrics.hpp"
#include "kdlab/pipeline.hpp"
#include "kdlab/rng.hpp"
#include "kdlab/train.hpp"

namespace fs = std::filesystem;
using namespace kdlab;

namespace {

struct CommonTrainFlags {
    std::vector<std::size_t> dims;
    std::string activation = "relu";
    int epochs = 30;
    int batch_size = 64;
    std::string optimizer = "adam";
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    std::string data_dir;
    std::string out;
};

void add_train_flags(CLI::App* app, CommonTrainFlags& f, bool needs_dims) {
    if (needs_dims)
        app->add_option("--dims", f.dims, "layer dims, input..classes")->required();
    app->add_option("--activation", f.activation, "relu|tanh");
    app->add_option("--epochs", f.epochs);
    app->add_option("--batch-size", f.batch_size);
    app->add_option("--optimizer", f.optimizer, "adam|sgd_momentum");
    app->add_option("--lr", f.learning_rate);
    app->add_option("--momentum", f.momentum);
    app->add_option("--weight-decay", f.weight_decay);
    app->add_option("--seed", f.seed);
    app->add_option("--data-dir", f.data_dir, "directory with train.ds/test.ds")->required();
    app->add_option("--out", f.out, "output checkpoint path")->required();
}

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation: " + s);
}

TrainBudget make_budget(const CommonTrainFlags& f) {
    TrainBudget b;
    b.epochs = f.epochs;
    b.batch_size = f.batch_size;
    b.optimizer.kind = optimizer_kind_from_string(f.optimizer);
    b.optimizer.learning_rate = f.learning_rate;
    b.optimizer.momentum = f.momentum;
    b.optimizer.weight_decay = f.weight_decay;
    b.seed = f.seed;
    return b;
}

std::pair<LabeledDataset, LabeledDataset> load_split(const std::string& dir) {
    return {load_dataset((fs::path(dir) / "train.ds").string()),
            load_dataset((fs::path(dir) / "test.ds").string())};
}

void save_result(const TrainResult& r, const CommonTrainFlags& f, const std::string& note) {
    CheckpointMeta meta{f.seed, r.epochs_run, r.best_test_acc, r.final_test_acc, note};
    save_checkpoint(r.model, meta, f.out);
    std::printf("best_test_acc=%.4f final_test_acc=%.4f epochs=%d -> %s\n",
                r.best_test_acc, r.final_test_acc, r.epochs_run, f.out.c_str());
}

int run(int argc, char** argv) {
    CLI::App app{"kdlab: knowledge-distillation stealing attacks and defenses at desk scale"};
    app.require_subcommand(1);

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset pair");
    SyntheticSpec spec;
    std::string gen_kind = "gaussian_blobs";
    std::string gen_out = "data";
    gen->add_option("--generator", gen_kind, "gaussian_blobs|two_spirals");
    gen->add_option("--classes", spec.classes);
    gen->add_option("--dim", spec.dim);
    gen->add_option("--train-per-class", spec.train_per_class);
    gen->add_option("--test-per-class", spec.test_per_class);
    gen->add_option("--separation", spec.separation);
    gen->add_option("--noise", spec.noise);
    gen->add_option("--seed", spec.seed);
    gen->add_option("--out", gen_out, "output directory");
    gen->callback([&] {
        spec.generator = gen_kind == "two_spirals" ? SyntheticGenerator::two_spirals
                                                   : SyntheticGenerator::gaussian_blobs;
        auto [train, test] = gen_dataset(spec);
        fs::create_directories(gen_out);
        save_dataset(train, (fs::path(gen_out) / "train.ds").string());
        save_dataset(test, (fs::path(gen_out) / "test.ds").string());
        std::printf("wrote %zu train / %zu test samples to %s\n", train.size(), test.size(),
                    gen_out.c_str());
    });

    // ---- import-idx ----
    auto* idx = app.add_subcommand("import-idx", "convert IDX image/label files to a dataset");
    std::string idx_images, idx_labels, idx_out, idx_split = "train";
    idx->add_option("--images", idx_images)->required();
    idx->add_option("--labels", idx_labels)->required();
    idx->add_option("--split", idx_split, "train|test");
    idx->add_option("--out", idx_out, "output .ds path")->required();
    idx->callback([&] {
        LabeledDataset ds = load_idx(idx_images, idx_labels);
        ds.split = idx_split;
        save_dataset(ds, idx_out);
        std::printf("imported %zu samples (%d classes) -> %s\n", ds.size(), ds.class_count,
                    idx_out.c_str());
    });

    // ---- train (vanilla) ----
    auto* train_cmd = app.add_subcommand("train", "cross-entropy training");
    CommonTrainFlags tf;
    add_train_flags(train_cmd, tf, true);
    train_cmd->callback([&] {
        auto [train, test] = load_split(tf.data_dir);
        auto r = train_vanilla(tf.dims, parse_activation(tf.activation), train, test,
                               make_budget(tf));
        save_result(r, tf, "vanilla");
    });

    // ---- kd ----
    auto* kd_cmd = app.add_subcommand("kd", "distill a student from a teacher checkpoint");
    CommonTrainFlags kf;
    std::string kd_teacher;
    KdConfig kd_cfg;
    bool kd_lambda_set = false;
    add_train_flags(kd_cmd, kf, true);
    kd_cmd->add_option("--teacher", kd_teacher)->required();
    kd_cmd->add_option("--alpha", kd_cfg.alpha);
    kd_cmd->add_option("--tau", kd_cfg.tau);
    kd_cmd->add_option("--lambda", kd_cfg.lambda)->each([&](const std::string&) {
        kd_lambda_set = true;
    });
    kd_cmd->callback([&] {
        if (!kd_lambda_set) kd_cfg.lambda = kd_cfg.tau * kd_cfg.tau;
        auto [train, test] = load_split(kf.data_dir);
        const Mlp teacher = load_checkpoint(kd_teacher);
        auto r = train_kd(kf.dims, parse_activation(kf.activation), teacher, train, test,
                          kd_cfg, make_budget(kf));
        save_result(r, kf, "kd");
    });

    // ---- nasty ----
    auto* nasty_cmd = app.add_subcommand("nasty", "train a nasty teacher against a reference");
    CommonTrainFlags nf;
    std::string nasty_ref;
    NastyConfig nasty_cfg;
    std::optional<double> early_stop;
    double early_stop_val = -1.0;
    add_train_flags(nasty_cmd, nf, true);
    nasty_cmd->add_option("--reference", nasty_ref)->required();
    nasty_cmd->add_option("--omega", nasty_cfg.omega);
    nasty_cmd->add_option("--tau-a", nasty_cfg.tau_a);
    nasty_cmd->add_flag("!--no-tau-sq-scale", nasty_cfg.scale_by_tau_sq,
                        "drop the tau_a^2 scale on the adversarial KL term");
    nasty_cmd->add_option("--early-stop-acc", early_stop_val,
                          "halt when test accuracy falls to this value");
    nasty_cmd->callback([&] {
        if (early_stop_val >= 0.0) early_stop = early_stop_val;
        auto [train, test] = load_split(nf.data_dir);
        const Mlp reference = load_checkpoint(nasty_ref);
        TrainBudget b = make_budget(nf);
        b.early_stop_acc = early_stop;
        auto r = train_nasty(nf.dims, parse_activation(nf.activation), reference, train,
                             test, nasty_cfg, b);
        // Deploy the final-epoch model (also the stopped state under
        // --early-stop-acc), matching the pipeline's deployment policy.
        r.model = r.final_model;
        save_result(r, nf, "nasty");
    });

    // ---- chain ----
    auto* chain_cmd = app.add_subcommand("chain", "build the contrastive sequence S^1..S^k");
    CommonTrainFlags cf;
    std::string chain_nasty;
    NastyConfig chain_cfg;
    int chain_k = 3;
    add_train_flags(chain_cmd, cf, false);
    chain_cmd->add_option("--nasty", chain_nasty)->required();
    chain_cmd->add_option("--k", chain_k, "sequence length (>= 1)");
    chain_cmd->add_option("--omega", chain_cfg.omega);
    chain_cmd->add_option("--tau-a", chain_cfg.tau_a);
    chain_cmd->add_option("--dims", cf.dims, "per-step dims (default: nasty's dims)");
    chain_cmd->callback([&] {
        auto [train, test] = load_split(cf.data_dir);
        const Mlp nasty = load_checkpoint(chain_nasty);
        ChainSpec spec;
        spec.k = chain_k;
        const std::vector<std::size_t> dims = cf.dims.empty() ? nasty.layer_dims : cf.dims;
        for (int i = 1; i < chain_k; ++i) spec.steps.push_back({dims, chain_cfg});
        auto chain = build_scm_chain(nasty, spec, nasty.activation, train, test,
                                     make_budget(cf));
        fs::create_directories(cf.out);
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const AccuracyScore a = accuracy(chain[i], test);
            CheckpointMeta meta{cf.seed, 0, a.value, a.value,
                                "chain S^" + std::to_string(i + 1)};
            save_checkpoint(chain[i], meta,
                            (fs::path(cf.out) / ("s" + std::to_string(i + 1) + ".ckpt")).string());
            std::printf("S^%zu test_acc=%.4f\n", i + 1, a.value);
        }
    });

    // ---- attack ----
    auto* attack_cmd = app.add_subcommand("attack", "run the HTC or SCM attack");
    CommonTrainFlags af;
    std::string method, attack_teacher, attack_chain_dir;
    HtcConfig htc_cfg;
    bool no_label = false;
    bool prob_space = false;
    bool exclude_first = false;
    double data_fraction = 1.0;
    add_train_flags(attack_cmd, af, true);
    attack_cmd->add_option("--method", method, "htc|scm")->required();
    attack_cmd->add_option("--teacher", attack_teacher, "nasty teacher checkpoint (htc)");
    attack_cmd->add_option("--chain-dir", attack_chain_dir, "chain directory (scm)");
    attack_cmd->add_option("--alpha", htc_cfg.alpha);
    attack_cmd->add_option("--tau", htc_cfg.tau);
    attack_cmd->add_option("--m", htc_cfg.m);
    attack_cmd->add_flag("--no-label", no_label, "drop the ground-truth CE term (alpha=1)");
    attack_cmd->add_flag("--prob-space", prob_space, "average member probabilities");
    attack_cmd->add_flag("--exclude-first", exclude_first, "drop S^1 from the ensemble");
    attack_cmd->add_option("--data-fraction", data_fraction, "stratified train fraction");
    attack_cmd->callback([&] {
        auto [train, test] = load_split(af.data_dir);
        if (data_fraction < 1.0)
            train = subset_data(train, data_fraction, Rng::derive(af.seed, "fraction"));
        if (no_label) htc_cfg.alpha = 1.0;
        TrainResult r;
        if (method == "htc") {
            if (attack_teacher.empty()) throw ConfigError("attack htc: --teacher required");
            const Mlp nasty = load_checkpoint(attack_teacher);
            r = attack_htc(af.dims, parse_activation(af.activation), nasty, train, test,
                           htc_cfg, make_budget(af));
        } else if (method == "scm") {
            if (attack_chain_dir.empty()) throw ConfigError("attack scm: --chain-dir required");
            std::vector<Mlp> chain;
            for (std::size_t i = 1;; ++i) {
                const fs::path p = fs::path(attack_chain_dir) / ("s" + std::to_string(i) + ".ckpt");
                if (!fs::exists(p)) break;
                chain.push_back(load_checkpoint(p.string()));
            }
            if (chain.empty()) throw DataError("attack scm: no s*.ckpt in " + attack_chain_dir);
            ScmOptions opt{!exclude_first, prob_space};
            r = attack_scm(af.dims, parse_activation(af.activation), chain, train, test,
                           htc_cfg, make_budget(af), opt);
        } else {
            throw ConfigError("attack: method must be htc or scm");
        }
        save_result(r, af, "attack_" + method);
    });

    // ---- defend ----
    auto* defend_cmd = app.add_subcommand("defend", "select a chain member as defense teacher");
    std::string defend_chain_dir, defend_out;
    std::size_t defend_index = 2;
    defend_cmd->add_option("--chain-dir", defend_chain_dir)->required();
    defend_cmd->add_option("--index", defend_index, "1-based chain position");
    defend_cmd->add_option("--out", defend_out)->required();
    defend_cmd->callback([&] {
        std::vector<Mlp> chain;
        for (std::size_t i = 1;; ++i) {
            const fs::path p = fs::path(defend_chain_dir) / ("s" + std::to_string(i) + ".ckpt");
            if (!fs::exists(p)) break;
            chain.push_back(load_checkpoint(p.string()));
        }
        if (chain.empty()) throw DataError("defend: no s*.ckpt in " + defend_chain_dir);
        const Mlp& chosen = defend_scm(chain, defend_index);
        CheckpointMeta meta{0, 0, 0.0, 0.0, "defense S^" + std::to_string(defend_index)};
        save_checkpoint(chosen, meta, defend_out);
        std::printf("deployed S^%zu -> %s\n", defend_index, defend_out.c_str());
    });

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "accuracy / KL / peak metrics for a checkpoint");
    std::string eval_model, eval_ref, eval_data;
    double eval_tau = 1.0, eval_rho = 0.1;
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--data-dir", eval_data)->required();
    eval_cmd->add_option("--reference", eval_ref, "reference checkpoint for KL");
    eval_cmd->add_option("--tau", eval_tau, "softening temperature for KL");
    eval_cmd->add_option("--rho", eval_rho, "peak threshold");
    eval_cmd->callback([&] {
        const Mlp model = load_checkpoint(eval_model);
        const LabeledDataset test = load_dataset((fs::path(eval_data) / "test.ds").string());
        const AccuracyScore a = accuracy(model, test);
        std::printf("test_acc=%.4f (%zu/%zu)\n", a.value, a.correct, a.total);
        std::printf("mean_peaks(rho=%.2f)=%.4f\n", eval_rho,
                    mean_peak_count(model, test, eval_rho));
        if (!eval_ref.empty()) {
            const Mlp reference = load_checkpoint(eval_ref);
            std::printf("kl_to_reference(tau=%.1f)=%.6f\n", eval_tau,
                        kl_to_reference(model, reference, test, eval_tau));
        }
    });

    // ---- pipeline ----
    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full experiment pipeline");
    std::string pipe_config, pipe_out = "out";
    bool pipe_save_ckpt = false;
    std::vector<std::uint64_t> pipe_seeds;
    pipe_cmd->add_option("--config", pipe_config, "JSON config (default: reference blobs-10)");
    pipe_cmd->add_option("--out-dir", pipe_out);
    pipe_cmd->add_option("--seed", pipe_seeds, "override seed list");
    pipe_cmd->add_flag("--save-checkpoints", pipe_save_ckpt);
    pipe_cmd->callback([&] {
        PipelineConfig cfg = pipe_config.empty() ? reference_config() : load_config(pipe_config);
        cfg.output_dir = pipe_out;
        if (pipe_save_ckpt) cfg.save_checkpoints = true;
        if (!pipe_seeds.empty()) cfg.seeds = pipe_seeds;
        const ExperimentReport report = run_pipeline(cfg);
        std::printf("run %s: %zu arms, %.1fs -> %s/report.json\n", report.run_id.c_str(),
                    report.arms.size(), report.wall_seconds, pipe_out.c_str());
    });

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "convert a JSON report to CSV");
    std::string report_in, report_out, report_fmt = "csv";
    report_cmd->add_option("--in", report_in)->required();
    report_cmd->add_option("--format", report_fmt, "json|csv");
    report_cmd->add_option("--out", report_out)->required();
    report_cmd->callback([&] {
        std::ifstream in(report_in);
        if (!in) throw DataError("cannot open: " + report_in);
        nlohmann::ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("report JSON error: ") + e.what());
        }
        const ExperimentReport report = report_from_json(j);
        emit_report(report, report_fmt == "json" ? ReportFormat::json : ReportFormat::csv,
                    report_out);
        std::printf("wrote %s\n", report_out.c_str());
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
