#pragma once

#include <cstddef>

#include "kdlab/dataset.hpp"
#include "kdlab/mlp.hpp"

namespace kdlab {

struct AccuracyScore {
    std::size_t correct = 0;
    std::size_t total = 0;
    double value = 0.0;
};

// Top-1 accuracy; argmax ties broken by lowest class index.
AccuracyScore accuracy(const Mlp& model, const LabeledDataset& data);

// True iff accuracy with teacher access strictly exceeds accuracy without.
bool stealing_occurred(const AccuracyScore& acc_with, const AccuracyScore& acc_without);

// True iff the defense strictly lowers the stealer's accuracy.
bool defense_effective(const AccuracyScore& acc_with_defense,
                       const AccuracyScore& acc_without_defense);

// Mean over samples of KL(soften(model(x),tau) || soften(reference(x),tau)).
double kl_to_reference(const Mlp& model, const Mlp& reference,
                       const LabeledDataset& data, double tau = 1.0);

// Same comparison for an already-computed logit batch (e.g. a chain ensemble).
double kl_logits_to_reference(const Matrix& logits, const Mlp& reference,
                              const LabeledDataset& data, double tau = 1.0);

// Mean count_peaks over soften(model(x), 1) across the dataset.
double mean_peak_count(const Mlp& model, const LabeledDataset& data, double rho = 0.1);

struct ModelComparison {
    double mean_kl = 0.0;
    double mean_peaks = 0.0;
};

}  // namespace kdlab
