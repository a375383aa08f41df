#include "kdlab/train.hpp"

#include <functional>
#include <memory>
#include <numeric>

#include "kdlab/errors.hpp"
#include "kdlab/metrics.hpp"
#include "kdlab/rng.hpp"

namespace kdlab {

namespace {

// Builds the batch objective from the gathered inputs plus the source row
// indices, so frozen-teacher logits can be precomputed once per arm and
// gathered per batch instead of re-running the teacher every step.
using ObjectiveFactory = std::function<std::unique_ptr<LogitObjective>(
    const Matrix& batch_inputs, std::span<const std::size_t> batch_rows,
    std::vector<int> batch_labels)>;

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), src.cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy(src.row(idx[r]), src.row(idx[r]) + src.cols, out.row(r));
    return out;
}

void check_dims(const std::vector<std::size_t>& dims, const LabeledDataset& data,
                const char* who) {
    if (dims.size() < 2) throw ConfigError(std::string(who) + ": need at least 2 dims");
    if (dims.front() != data.inputs.cols)
        throw ConfigError(std::string(who) + ": input dim does not match dataset");
    if (dims.back() != static_cast<std::size_t>(data.class_count))
        throw ConfigError(std::string(who) + ": output dim does not match class count");
}

// Deterministic epoch loop shared by every procedure. Tracks the best test
// checkpoint; optionally halts once test accuracy falls to the early-stop
// target.
TrainResult train_loop(Mlp model, const LabeledDataset& train,
                       const LabeledDataset& test, const TrainBudget& budget,
                       const ObjectiveFactory& make_objective) {
    train.validate();
    test.validate();
    if (budget.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (budget.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    OptimizerState opt(budget.optimizer, model);
    Gradients grads = zero_gradients_like(model);

    TrainResult result;
    result.model = model;
    result.best_test_acc = -1.0;

    std::vector<std::size_t> order(train.size());

    const std::size_t batch = static_cast<std::size_t>(budget.batch_size);
    for (int e = 0; e < budget.epochs; ++e) {
        // Shuffle a fresh identity permutation each epoch so a resumed run
        // (first_epoch > 0) visits exactly the same batches as a straight one.
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(Rng::derive(budget.seed, "shuffle-epoch",
                                    static_cast<std::uint64_t>(budget.first_epoch + e)));
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t len = std::min(batch, order.size() - start);
            const std::span<const std::size_t> idx(order.data() + start, len);
            Matrix bx = gather_rows(train.inputs, idx);
            std::vector<int> by(len);
            for (std::size_t i = 0; i < len; ++i) by[i] = train.labels[idx[i]];
            const auto objective = make_objective(bx, idx, std::move(by));
            loss_gradients(model, bx, *objective, grads);
            apply_step(model, grads, opt);
        }
        const double acc = accuracy(model, test).value;
        result.epoch_test_acc.push_back(acc);
        result.epochs_run = e + 1;
        if (acc > result.best_test_acc) {
            result.best_test_acc = acc;
            result.model = model;
        }
        if (budget.early_stop_acc && acc <= *budget.early_stop_acc) break;
    }
    result.final_model = std::move(model);
    result.final_test_acc = result.epoch_test_acc.back();
    return result;
}

ObjectiveFactory ce_factory() {
    return [](const Matrix&, std::span<const std::size_t>,
              std::vector<int> labels) -> std::unique_ptr<LogitObjective> {
        return std::make_unique<CeObjective>(std::move(labels));
    };
}

}  // namespace

TrainResult train_vanilla(const std::vector<std::size_t>& dims, Activation act,
                          const LabeledDataset& train, const LabeledDataset& test,
                          const TrainBudget& budget) {
    check_dims(dims, train, "train_vanilla");
    Mlp model = init_mlp(dims, act, Rng::derive(budget.seed, "init"));
    return train_loop(std::move(model), train, test, budget, ce_factory());
}

TrainResult continue_vanilla(Mlp model, const LabeledDataset& train,
                             const LabeledDataset& test, const TrainBudget& budget) {
    check_dims(model.layer_dims, train, "continue_vanilla");
    return train_loop(std::move(model), train, test, budget, ce_factory());
}

TrainResult train_kd(const std::vector<std::size_t>& student_dims, Activation act,
                     const Mlp& teacher, const LabeledDataset& train,
                     const LabeledDataset& test, const KdConfig& cfg,
                     const TrainBudget& budget) {
    check_dims(student_dims, train, "train_kd");
    if (teacher.class_count() != static_cast<std::size_t>(train.class_count))
        throw ConfigError("train_kd: teacher class count does not match dataset");
    Mlp model = init_mlp(student_dims, act, Rng::derive(budget.seed, "init"));
    // The teacher is frozen, so its logits over the train split never change.
    const Matrix teacher_logits = forward(teacher, train.inputs);
    auto factory = [&teacher_logits, cfg](
                       const Matrix&, std::span<const std::size_t> rows,
                       std::vector<int> by) -> std::unique_ptr<LogitObjective> {
        return std::make_unique<KdObjective>(gather_rows(teacher_logits, rows),
                                             std::move(by), cfg);
    };
    return train_loop(std::move(model), train, test, budget, factory);
}

TrainResult train_nasty(const std::vector<std::size_t>& dims, Activation act,
                        const Mlp& reference, const LabeledDataset& train,
                        const LabeledDataset& test, const NastyConfig& cfg,
                        const TrainBudget& budget) {
    check_dims(dims, train, "train_nasty");
    if (reference.class_count() != static_cast<std::size_t>(train.class_count))
        throw ConfigError("train_nasty: reference class count does not match dataset");
    Mlp model = init_mlp(dims, act, Rng::derive(budget.seed, "init"));
    const Matrix reference_logits = forward(reference, train.inputs);
    auto factory = [&reference_logits, cfg](
                       const Matrix&, std::span<const std::size_t> rows,
                       std::vector<int> by) -> std::unique_ptr<LogitObjective> {
        return std::make_unique<NastyObjective>(gather_rows(reference_logits, rows),
                                                std::move(by), cfg);
    };
    return train_loop(std::move(model), train, test, budget, factory);
}

TrainResult attack_htc(const std::vector<std::size_t>& student_dims, Activation act,
                       const Mlp& nasty, const LabeledDataset& train,
                       const LabeledDataset& test, const HtcConfig& cfg,
                       const TrainBudget& budget) {
    check_dims(student_dims, train, "attack_htc");
    if (nasty.class_count() != static_cast<std::size_t>(train.class_count))
        throw ConfigError("attack_htc: teacher class count does not match dataset");
    Mlp model = init_mlp(student_dims, act, Rng::derive(budget.seed, "init"));
    const Matrix nasty_logits = forward(nasty, train.inputs);
    auto factory = [&nasty_logits, cfg](
                       const Matrix&, std::span<const std::size_t> rows,
                       std::vector<int> by) -> std::unique_ptr<LogitObjective> {
        return std::make_unique<HtcObjective>(gather_rows(nasty_logits, rows),
                                              std::move(by), cfg);
    };
    return train_loop(std::move(model), train, test, budget, factory);
}

std::vector<Mlp> build_scm_chain(const Mlp& nasty, const ChainSpec& spec,
                                 Activation act, const LabeledDataset& train,
                                 const LabeledDataset& test, const TrainBudget& budget) {
    if (spec.k < 1) throw ConfigError("build_scm_chain: k must be >= 1");
    if (spec.k > 1 && spec.steps.empty())
        throw ConfigError("build_scm_chain: k > 1 requires at least one chain step");
    std::vector<Mlp> chain;
    chain.push_back(nasty);  // S^1
    for (int i = 1; i < spec.k; ++i) {
        const ChainStep& step = spec.steps[(i - 1) % spec.steps.size()];
        TrainBudget step_budget = budget;
        step_budget.seed = Rng::derive(budget.seed, "chain", static_cast<std::uint64_t>(i));
        TrainResult r = train_nasty(step.dims, act, chain.back(), train, test,
                                    step.nasty, step_budget);
        chain.push_back(std::move(r.final_model));
    }
    return chain;
}

Matrix chain_ensemble_logits(std::span<const Mlp> chain, const Matrix& inputs,
                             const ScmOptions& options) {
    if (chain.empty()) throw ShapeError("chain_ensemble_logits: empty chain");
    const std::size_t begin = (!options.include_first && chain.size() > 1) ? 1 : 0;
    const std::size_t members = chain.size() - begin;
    Matrix ens(inputs.rows, chain.front().class_count());
    for (std::size_t m = begin; m < chain.size(); ++m) {
        if (chain[m].class_count() != ens.cols)
            throw ShapeError("chain_ensemble_logits: member class counts differ");
        const Matrix z = forward(chain[m], inputs);
        for (std::size_t i = 0; i < ens.data.size(); ++i) ens.data[i] += z.data[i];
    }
    for (double& v : ens.data) v /= static_cast<double>(members);
    return ens;
}

TrainResult attack_scm(const std::vector<std::size_t>& student_dims, Activation act,
                       std::span<const Mlp> chain, const LabeledDataset& train,
                       const LabeledDataset& test, const HtcConfig& cfg,
                       const TrainBudget& budget, const ScmOptions& options) {
    check_dims(student_dims, train, "attack_scm");
    if (chain.empty()) throw ConfigError("attack_scm: empty chain");
    Mlp model = init_mlp(student_dims, act, Rng::derive(budget.seed, "init"));

    // Chain members are frozen: compute the ensemble target distribution for
    // the whole train split once.
    Matrix all_targets(train.inputs.rows, chain.front().class_count());
    if (options.probability_space) {
        const std::size_t begin = (!options.include_first && chain.size() > 1) ? 1 : 0;
        std::vector<Matrix> member_logits;
        for (std::size_t m = begin; m < chain.size(); ++m)
            member_logits.push_back(forward(chain[m], train.inputs));
        for (std::size_t r = 0; r < all_targets.rows; ++r) {
            std::vector<LogitVector> rows;
            for (const Matrix& z : member_logits)
                rows.emplace_back(z.row(r), z.row(r) + z.cols);
            const ProbVector p = ensemble_probabilities(rows, cfg.tau);
            std::copy(p.begin(), p.end(), all_targets.row(r));
        }
    } else {
        const Matrix z_ens = chain_ensemble_logits(chain, train.inputs, options);
        for (std::size_t r = 0; r < z_ens.rows; ++r) {
            const ProbVector p = soften({z_ens.row(r), z_ens.cols}, cfg.tau);
            std::copy(p.begin(), p.end(), all_targets.row(r));
        }
    }

    auto factory = [&all_targets, cfg](
                       const Matrix&, std::span<const std::size_t> rows,
                       std::vector<int> by) -> std::unique_ptr<LogitObjective> {
        return std::make_unique<ScmObjective>(gather_rows(all_targets, rows), std::move(by),
                                              cfg);
    };
    return train_loop(std::move(model), train, test, budget, factory);
}

const Mlp& defend_scm(std::span<const Mlp> chain, std::size_t index) {
    if (index < 1 || index > chain.size())
        throw ConfigError("defend_scm: index out of range (1-based, <= chain length)");
    return chain[index - 1];
}

}  // namespace kdlab
