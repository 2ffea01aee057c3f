#include "anchor/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace anchor {

// ── Losses and metrics ───────────────────────────────────────────────────────

LossResult mse_loss(const Tensor2D& pred, const Tensor2D& target) {
    if (!pred.same_shape(target)) throw ValidationError("mse_loss: shape mismatch");
    LossResult r;
    r.grad = Tensor2D(pred.channels, pred.length);
    const double inv = 1.0 / static_cast<double>(pred.v.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pred.v.size(); ++k) {
        const double d = pred.v[k] - target.v[k];
        acc += d * d;
        r.grad.v[k] = 2.0 * d * inv;
    }
    r.value = acc * inv;
    return r;
}

Metrics metric_suite(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) throw ValidationError("metric_suite: shape mismatch");
    if (pred.empty()) throw ValidationError("metric_suite: empty input");
    Metrics m;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double d = pred[k] - target[k];
        m.mse += d * d;
        m.mae += std::abs(d);
        const double denom = std::abs(pred[k]) + std::abs(target[k]);
        if (denom > 0.0) m.smape += std::abs(d) / denom;  // 0/0 term counts as 0
    }
    const double inv = 1.0 / static_cast<double>(pred.size());
    m.mse *= inv;
    m.mae *= inv;
    m.smape *= 200.0 * inv;
    return m;
}

Metrics metric_suite(const Tensor2D& pred, const Tensor2D& target) {
    if (!pred.same_shape(target)) throw ValidationError("metric_suite: shape mismatch");
    return metric_suite(std::span<const double>(pred.v), std::span<const double>(target.v));
}

// ── Optimizer ────────────────────────────────────────────────────────────────

void OptimizerConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("Optimizer: lr must be > 0");
    if (momentum < 0.0 || beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0 ||
        !(eps > 0.0))
        throw ConfigError("Optimizer: hyperparameters out of range");
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<ParamView> params)
    : config_(config), params_(std::move(params)) {
    config_.validate();
    m1_.reserve(params_.size());
    m2_.reserve(params_.size());
    for (const auto& p : params_) {
        m1_.emplace_back(p.value.size(), 0.0);
        m2_.emplace_back(config_.kind == OptimKind::Adam ? p.value.size() : 0, 0.0);
    }
}

void Optimizer::step() {
    ++step_count_;
    for (std::size_t g = 0; g < params_.size(); ++g) {
        auto value = params_[g].value;
        auto grad = params_[g].grad;
        if (config_.kind == OptimKind::Sgd) {
            for (std::size_t k = 0; k < value.size(); ++k) {
                m1_[g][k] = config_.momentum * m1_[g][k] + grad[k];
                value[k] -= config_.lr * m1_[g][k];
            }
        } else {
            const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
            const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
            for (std::size_t k = 0; k < value.size(); ++k) {
                m1_[g][k] = config_.beta1 * m1_[g][k] + (1.0 - config_.beta1) * grad[k];
                m2_[g][k] = config_.beta2 * m2_[g][k] + (1.0 - config_.beta2) * grad[k] * grad[k];
                const double mhat = m1_[g][k] / bc1;
                const double vhat = m2_[g][k] / bc2;
                value[k] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            }
        }
    }
}

void Optimizer::zero_grad() {
    for (auto& p : params_)
        std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

// ── Training loop ────────────────────────────────────────────────────────────

Metrics evaluate(BackboneModel& model, const Dataset& data) {
    if (data.empty()) throw ValidationError("evaluate: empty dataset");
    std::vector<double> preds, targets;
    BackboneCache cache;
    for (const auto& sample : data) {
        const Tensor2D out = model.forward(sample.input, cache);
        preds.insert(preds.end(), out.v.begin(), out.v.end());
        targets.insert(targets.end(), sample.target.v.begin(), sample.target.v.end());
    }
    return metric_suite(std::span<const double>(preds), std::span<const double>(targets));
}

std::vector<TrainRecord> train_model(BackboneModel& model, const Dataset& train_set,
                                     const Dataset& val_set, Optimizer& optimizer, int epochs,
                                     int batch_size, std::uint64_t seed) {
    if (train_set.empty()) throw ValidationError("train_model: empty training set");
    if (epochs < 1) throw ConfigError("train_model: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train_model: batch_size must be >= 1");

    SeededRng shuffle_rng(seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<TrainRecord> records;
    records.reserve(static_cast<std::size_t>(epochs));
    BackboneCache cache;

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        // Fisher-Yates with the portable rng so epoch order is seed-determined.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t step = 0;
        for (std::size_t base = 0; base < order.size(); base += static_cast<std::size_t>(batch_size)) {
            const std::size_t end = std::min(order.size(), base + static_cast<std::size_t>(batch_size));
            optimizer.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t j = base; j < end; ++j) {
                const Sample& sample = train_set[order[j]];
                const Tensor2D out = model.forward(sample.input, cache);
                LossResult loss = mse_loss(out, sample.target);
                // Mean over the minibatch.
                const double w = 1.0 / static_cast<double>(end - base);
                for (double& g : loss.grad.v) g *= w;
                model.backward(cache, loss.grad);
                batch_loss += loss.value * w;
            }
            ++step;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train_model: loss diverged at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(step));
            optimizer.step();
            epoch_loss += batch_loss * static_cast<double>(end - base);
        }

        TrainRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
        if (!val_set.empty()) rec.val = evaluate(model, val_set);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.seed = seed;
        records.push_back(rec);
    }
    return records;
}

// ── Gradient checks ──────────────────────────────────────────────────────────

GradCheckReport gradcheck(const std::function<double()>& forward_loss,
                          const std::function<void()>& backward,
                          std::vector<ParamView> groups, double h, double rel_tol,
                          double abs_floor) {
    if (!(h > 0.0)) throw ConfigError("gradcheck: step h must be > 0");

    backward();  // fills analytic gradients at the base point
    std::vector<std::vector<double>> analytic;
    analytic.reserve(groups.size());
    for (const auto& g : groups) analytic.emplace_back(g.grad.begin(), g.grad.end());

    GradCheckReport report;
    report.rel_tol = rel_tol;
    report.abs_floor = abs_floor;

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        GradCheckGroup gr;
        gr.name = groups[gi].name;
        auto value = groups[gi].value;
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double saved = value[k];
            value[k] = saved + h;
            const double fp = forward_loss();
            value[k] = saved - h;
            const double fm = forward_loss();
            value[k] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw ValidationError("gradcheck: non-finite loss while perturbing " + gr.name +
                                      "[" + std::to_string(k) + "]");
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[gi][k];
            const double diff = std::abs(a - numeric);
            const double scale = std::max(std::abs(a), std::abs(numeric));
            const double rel = diff <= abs_floor ? 0.0 : diff / std::max(scale, 1e-300);
            if (rel > gr.max_rel_err) {
                gr.max_rel_err = rel;
                gr.worst_index = k;
                gr.analytic_at_worst = a;
                gr.numeric_at_worst = numeric;
            }
            if (!grad_close(a, numeric, rel_tol, abs_floor)) gr.pass = false;
        }
        if (gr.max_rel_err > report.max_rel_err) {
            report.max_rel_err = gr.max_rel_err;
            report.worst_group = gr.name;
        }
        report.pass = report.pass && gr.pass;
        report.groups.push_back(std::move(gr));
    }
    return report;
}

GradCheckReport gradcheck_model(BackboneModel& model, const Tensor2D& input, double rel_tol,
                                double abs_floor, double h) {
    const std::size_t n_params = model.params().param_count();
    if (n_params > 10000)
        throw ConfigError("gradcheck_model: model has " + std::to_string(n_params) +
                          " parameters; the finite-difference sweep is capped at 10^4");

    // Fixed random linear functional of the output so every output element
    // feeds the scalar loss.
    Tensor2D x = input;
    BackboneCache cache;
    const Tensor2D probe_out = model.forward(x, cache);
    SeededRng probe_rng(0x5eed5eedULL);
    std::vector<double> probe(probe_out.v.size());
    for (double& p : probe) p = probe_rng.uniform(-1.0, 1.0);

    auto forward_loss = [&]() {
        BackboneCache c;
        const Tensor2D out = model.forward(x, c);
        double acc = 0.0;
        for (std::size_t k = 0; k < out.v.size(); ++k) acc += probe[k] * out.v[k];
        return acc;
    };

    // Preallocated so the span registered below stays valid across calls.
    Tensor2D input_grad(x.channels, x.length);
    auto backward = [&]() {
        model.zero_grad();
        BackboneCache c;
        const Tensor2D out = model.forward(x, c);
        Tensor2D dout(out.channels, out.length);
        for (std::size_t k = 0; k < out.v.size(); ++k) dout.v[k] = probe[k];
        const Tensor2D gi = model.backward(c, dout);
        std::copy(gi.v.begin(), gi.v.end(), input_grad.v.begin());
    };

    std::vector<ParamView> groups = model.param_views();
    // The input participates as a pseudo-group.
    backward();
    groups.push_back(ParamView{"input", std::span<double>(x.v), std::span<double>(input_grad.v)});
    return gradcheck(forward_loss, backward, std::move(groups), h, rel_tol, abs_floor);
}

}  // namespace anchor
