#include "kdlab/metrics.hpp"

#include "kdlab/errors.hpp"
#include "kdlab/logit_ops.hpp"

namespace kdlab {

AccuracyScore accuracy(const Mlp& model, const LabeledDataset& data) {
    data.validate();
    if (model.class_count() != static_cast<std::size_t>(data.class_count))
        throw ShapeError("accuracy: model class count does not match dataset");
    const Matrix logits = forward(model, data.inputs);
    AccuracyScore score;
    score.total = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (argmax({logits.row(i), logits.cols}) ==
            static_cast<std::size_t>(data.labels[i]))
            ++score.correct;
    }
    score.value = static_cast<double>(score.correct) / static_cast<double>(score.total);
    return score;
}

bool stealing_occurred(const AccuracyScore& acc_with, const AccuracyScore& acc_without) {
    return acc_with.value > acc_without.value;
}

bool defense_effective(const AccuracyScore& acc_with_defense,
                       const AccuracyScore& acc_without_defense) {
    return acc_with_defense.value < acc_without_defense.value;
}

double kl_logits_to_reference(const Matrix& logits, const Mlp& reference,
                              const LabeledDataset& data, double tau) {
    if (logits.cols != reference.class_count())
        throw ShapeError("kl_logits_to_reference: class count mismatch");
    const Matrix ref_logits = forward(reference, data.inputs);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const ProbVector p = soften({logits.row(i), logits.cols}, tau);
        const ProbVector q = soften({ref_logits.row(i), ref_logits.cols}, tau);
        sum += kl_divergence(p, q);
    }
    return sum / static_cast<double>(logits.rows);
}

double kl_to_reference(const Mlp& model, const Mlp& reference,
                       const LabeledDataset& data, double tau) {
    if (model.class_count() != reference.class_count())
        throw ShapeError("kl_to_reference: class count mismatch");
    return kl_logits_to_reference(forward(model, data.inputs), reference, data, tau);
}

double mean_peak_count(const Mlp& model, const LabeledDataset& data, double rho) {
    const Matrix logits = forward(model, data.inputs);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const ProbVector p = soften({logits.row(i), logits.cols}, 1.0);
        sum += static_cast<double>(count_peaks(p, rho));
    }
    return sum / static_cast<double>(logits.rows);
}

}  // namespace kdlab
