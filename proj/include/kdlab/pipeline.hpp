#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdlab/dataset.hpp"
#include "kdlab/report.hpp"
#include "kdlab/train.hpp"

namespace kdlab {

// Full experiment description: dataset, architectures, every objective's
// hyperparameters, budgets, seeds and ablation toggles. Serializes to/from
// JSON; the serialized form embedded in a report is sufficient to re-run the
// experiment bit-exactly.
struct PipelineConfig {
    SyntheticSpec dataset;
    std::vector<std::size_t> teacher_dims = {16, 128, 128, 10};
    std::vector<std::size_t> student_dims = {16, 16, 10};
    Activation activation = Activation::relu;

    KdConfig kd;
    NastyConfig nasty;
    NastyConfig chain_nasty;  // objective for chain steps beyond S^1
    std::vector<std::size_t> chain_dims = {16, 16, 10};  // chain-step architecture
    HtcConfig htc;
    int scm_k = 3;
    ScmOptions scm_options;

    TrainBudget teacher_budget;
    TrainBudget nasty_budget;  // nasty teacher and ES baseline
    TrainBudget chain_budget;  // chain steps beyond S^1
    TrainBudget student_budget;

    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    bool run_attacks = true;
    std::vector<double> data_fractions;  // HTC vs nasty-KD at each fraction
    bool no_label_arm = false;           // HTC with alpha = 1
    bool nasty_es_arm = false;           // early-stopped nasty baseline
    std::vector<int> scm_k_sweep;        // extra SCM arms at other k

    double peak_rho = 0.1;
    double kl_tau = 1.0;
    std::string output_dir;              // empty: keep everything in memory
    bool save_checkpoints = false;
};

// Reference blobs-10 experiment: the desk-scale stand-in for the full-scale
// CIFAR protocol.
PipelineConfig reference_config();

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::ordered_json& j);
PipelineConfig load_config(const std::string& path);

// Runs, per seed: teacher -> nasty teacher -> {vanilla, normal KD, nasty KD,
// HTC, SCM} students -> chain -> defense arms -> ablations -> metrics. Arm
// failures are recorded in the report and do not abort the remaining arms.
ExperimentReport run_pipeline(const PipelineConfig& cfg);

}  // namespace kdlab
