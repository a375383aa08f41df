#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kdlab/dataset.hpp"
#include "kdlab/losses.hpp"
#include "kdlab/mlp.hpp"
#include "kdlab/optimizer.hpp"

namespace kdlab {

struct TrainBudget {
    int epochs = 30;
    int batch_size = 64;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    // Nasty-teacher early stop: halt at the end of the first epoch whose test
    // accuracy falls to (<=) this value.
    std::optional<double> early_stop_acc;
    // Epoch index offset for shuffle derivation; lets a resumed run replay the
    // exact trajectory of an uninterrupted one.
    int first_epoch = 0;
};

struct TrainResult {
    Mlp model;        // best checkpoint by test accuracy
    Mlp final_model;  // parameters at the last executed epoch
    double best_test_acc = 0.0;
    double final_test_acc = 0.0;
    int epochs_run = 0;
    std::vector<double> epoch_test_acc;
};

// One nasty-generation step: architecture + objective hyperparameters.
struct ChainStep {
    std::vector<std::size_t> dims;
    NastyConfig nasty;
};

// Sequence spec: S^1 is the given nasty teacher; steps[i] produces S^{i+2}.
struct ChainSpec {
    int k = 3;
    std::vector<ChainStep> steps;  // size k-1; reused cyclically if shorter
};

struct ScmOptions {
    bool include_first = true;       // include S^1 in the ensemble
    bool probability_space = false;  // average probabilities instead of logits
};

TrainResult train_vanilla(const std::vector<std::size_t>& dims, Activation act,
                          const LabeledDataset& train, const LabeledDataset& test,
                          const TrainBudget& budget);

// Resume-style variant starting from an existing model (budget.first_epoch
// selects where the per-epoch shuffle stream continues).
TrainResult continue_vanilla(Mlp model, const LabeledDataset& train,
                             const LabeledDataset& test, const TrainBudget& budget);

TrainResult train_kd(const std::vector<std::size_t>& student_dims, Activation act,
                     const Mlp& teacher, const LabeledDataset& train,
                     const LabeledDataset& test, const KdConfig& cfg,
                     const TrainBudget& budget);

TrainResult train_nasty(const std::vector<std::size_t>& dims, Activation act,
                        const Mlp& reference, const LabeledDataset& train,
                        const LabeledDataset& test, const NastyConfig& cfg,
                        const TrainBudget& budget);

// HTC attack; cfg.alpha = 1 is the no-label setting (ground truth unused).
TrainResult attack_htc(const std::vector<std::size_t>& student_dims, Activation act,
                       const Mlp& nasty, const LabeledDataset& train,
                       const LabeledDataset& test, const HtcConfig& cfg,
                       const TrainBudget& budget);

// S^1 = nasty, S^i = nasty-generation applied to S^{i-1}. Each step uses seed
// derived from (budget.seed, "chain", i).
std::vector<Mlp> build_scm_chain(const Mlp& nasty, const ChainSpec& spec,
                                 Activation act, const LabeledDataset& train,
                                 const LabeledDataset& test, const TrainBudget& budget);

TrainResult attack_scm(const std::vector<std::size_t>& student_dims, Activation act,
                       std::span<const Mlp> chain, const LabeledDataset& train,
                       const LabeledDataset& test, const HtcConfig& cfg,
                       const TrainBudget& budget, const ScmOptions& options = {});

// Pure selection of S^index (1-based) as the deployed defense teacher.
const Mlp& defend_scm(std::span<const Mlp> chain, std::size_t index);

// Per-sample ensemble logits over chain members for one input batch.
Matrix chain_ensemble_logits(std::span<const Mlp> chain, const Matrix& inputs,
                             const ScmOptions& options = {});

}  // namespace kdlab
