#pragma once

#include <functional>
#include <string>
#include <vector>

#include "anchor/backbone.hpp"
#include "anchor/tensor.hpp"

namespace anchor {

// ── Losses and metrics ───────────────────────────────────────────────────────

struct LossResult {
    double value = 0.0;
    Tensor2D grad;  // dL/dpred
};

// Mean squared error; grad = 2(pred − target)/count.
LossResult mse_loss(const Tensor2D& pred, const Tensor2D& target);

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    double smape = 0.0;  // 200·mean(|p−t|/(|p|+|t|)), 0/0 terms count as 0
};

Metrics metric_suite(std::span<const double> pred, std::span<const double> target);
Metrics metric_suite(const Tensor2D& pred, const Tensor2D& target);

// ── Optimizers ───────────────────────────────────────────────────────────────

enum class OptimKind { Sgd, Adam };

struct OptimizerConfig {
    OptimKind kind = OptimKind::Adam;
    double lr = 1e-3;
    double momentum = 0.9;  // SGD
    double beta1 = 0.9;     // Adam
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

// Holds per-parameter moment buffers over a fixed set of ParamViews.  The
// views must stay valid (no reallocation) for the optimizer's lifetime.
class Optimizer {
public:
    Optimizer(OptimizerConfig config, std::vector<ParamView> params);

    void step();
    void zero_grad();
    const OptimizerConfig& config() const { return config_; }

private:
    OptimizerConfig config_;
    std::vector<ParamView> params_;
    std::vector<std::vector<double>> m1_;  // momentum / first moment
    std::vector<std::vector<double>> m2_;  // Adam second moment
    long long step_count_ = 0;
};

// ── Training loop ────────────────────────────────────────────────────────────

struct Sample {
    Tensor2D input;
    Tensor2D target;
};

using Dataset = std::vector<Sample>;

struct TrainRecord {
    int epoch = 0;
    double train_loss = 0.0;
    Metrics val;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

// Minibatch SGD over the dataset, shuffled per epoch from the given seed,
// strictly single-threaded and deterministic.  Throws on divergence, naming
// the epoch and step.
std::vector<TrainRecord> train_model(BackboneModel& model, const Dataset& train_set,
                                     const Dataset& val_set, Optimizer& optimizer, int epochs,
                                     int batch_size, std::uint64_t seed);

Metrics evaluate(BackboneModel& model, const Dataset& data);

// ── Gradient-check harness ───────────────────────────────────────────────────

struct GradCheckGroup {
    std::string name;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckGroup> groups;
    double max_rel_err = 0.0;
    std::string worst_group;
    bool pass = true;
    double rel_tol = 0.0;
    double abs_floor = 0.0;
};

// Central-difference check of analytic gradients over named parameter groups.
// `backward` must zero gradients, run the forward pass, and fill gradient
// buffers; `forward_loss` must evaluate the same scalar loss at the current
// parameter values without touching gradients.
GradCheckReport gradcheck(const std::function<double()>& forward_loss,
                          const std::function<void()>& backward,
                          std::vector<ParamView> groups, double h, double rel_tol,
                          double abs_floor);

// Whole-model check: every parameter group plus the input, against a fixed
// random linear functional of the model output.  Guards against accidental
// use on large models (> 10⁴ parameters).
GradCheckReport gradcheck_model(BackboneModel& model, const Tensor2D& input, double rel_tol,
                                double abs_floor = 1e-8, double h = 1e-5);

}  // namespace anchor
