#include <doctest.h>

#include <cmath>

#include "anchor/experiments.hpp"
#include "anchor/training.hpp"

using namespace anchor;

namespace {

Tensor2D tensor_of(std::vector<double> v) {
    Tensor2D t(1, static_cast<int>(v.size()));
    t.v = std::move(v);
    return t;
}

SpectralPrior prior_at(int length, int freq) {
    std::vector<double> e(static_cast<std::size_t>(length / 2 + 1), 0.0);
    e[static_cast<std::size_t>(freq)] = 1.0;
    return topk_periods(e, 1, length);
}

BackboneConfig tiny_forecast_config() {
    BackboneConfig bc;
    bc.input_channels = 1;
    bc.input_length = 32;
    bc.stem_width = 4;
    bc.stages = {{1, 4, 1}};
    bc.fgdm.partitions = 2;
    bc.fgdm.kernel_schedule = {3};
    bc.fgdm.interp = InterpKernel::gaussian(0.8, 3);
    bc.head = TaskHead::Forecast;
    bc.horizon = 4;
    return bc;
}

Dataset sine_dataset(int samples, int input_length, int horizon, double period,
                     std::uint64_t seed) {
    SignalSpec spec;
    spec.kind = SignalKind::MultiTone;
    spec.length = samples * 4 + input_length + horizon;
    spec.components = {{period, 1.0, 0.3}};
    spec.noise_std = 0.01;
    spec.seed = seed;
    const GeneratedSignal sig = generate(spec);
    const Tensor2D series = batch_to_tensor(sig.batch, 0);
    Dataset all = make_forecast_windows(series, input_length, horizon, 4);
    all.resize(static_cast<std::size_t>(samples));
    return all;
}

}  // namespace

TEST_CASE("mse_loss: values and gradient") {
    const Tensor2D p = tensor_of({2.0});
    const Tensor2D t = tensor_of({0.0});
    const LossResult r = mse_loss(p, t);
    CHECK(r.value == 4.0);
    CHECK(r.grad.v[0] == 4.0);

    const LossResult zero = mse_loss(t, t);
    CHECK(zero.value == 0.0);
    CHECK(zero.grad.v[0] == 0.0);

    CHECK_THROWS_AS((void)mse_loss(p, tensor_of({0.0, 1.0})), ValidationError);
}

TEST_CASE("mse_loss: gradient matches finite differences tightly") {
    SeededRng rng(61);
    Tensor2D p(1, 6), t(1, 6);
    for (double& v : p.v) v = rng.uniform(-2.0, 2.0);
    for (double& v : t.v) v = rng.uniform(-2.0, 2.0);
    const LossResult r = mse_loss(p, t);
    for (std::size_t k = 0; k < p.v.size(); ++k) {
        const double saved = p.v[k];
        const double h = 1e-6;
        p.v[k] = saved + h;
        const double fp = mse_loss(p, t).value;
        p.v[k] = saved - h;
        const double fm = mse_loss(p, t).value;
        p.v[k] = saved;
        CHECK(std::abs(r.grad.v[k] - (fp - fm) / (2.0 * h)) < 1e-8);
    }
}

TEST_CASE("metric_suite: SMAPE conventions") {
    const Metrics same = metric_suite(tensor_of({3.0, -1.0}), tensor_of({3.0, -1.0}));
    CHECK(same.smape == 0.0);
    CHECK(same.mse == 0.0);

    const Metrics m = metric_suite(tensor_of({3.0}), tensor_of({1.0}));
    CHECK(m.smape == doctest::Approx(100.0));
    CHECK(m.mse == 4.0);
    CHECK(m.mae == 2.0);

    // 0/0 terms count as zero.
    const Metrics zz = metric_suite(tensor_of({0.0}), tensor_of({0.0}));
    CHECK(zz.smape == 0.0);
}

TEST_CASE("optimizer: zero gradient moves nothing") {
    Param p;
    p.resize(3);
    p.value = {1.0, -2.0, 0.5};

    for (const OptimKind kind : {OptimKind::Sgd, OptimKind::Adam}) {
        Optimizer opt({kind, 0.1}, {view("p", p)});
        p.zero_grad();
        for (int step = 0; step < 5; ++step) opt.step();
        CHECK(p.value[0] == 1.0);
        CHECK(p.value[1] == -2.0);
        CHECK(p.value[2] == 0.5);
    }
}

TEST_CASE("optimizer: SGD converges on a quadratic") {
    // f(p) = (p − 3)², lr 0.1, plain gradient steps.
    Param p;
    p.resize(1);
    p.value[0] = 0.0;
    OptimizerConfig cfg{OptimKind::Sgd, 0.1};
    cfg.momentum = 0.0;
    Optimizer opt(cfg, {view("p", p)});
    for (int step = 0; step < 200; ++step) {
        p.grad[0] = 2.0 * (p.value[0] - 3.0);
        opt.step();
    }
    CHECK(std::abs(p.value[0] - 3.0) < 1e-6);
}

TEST_CASE("optimizer: hyperparameter validation") {
    Param p;
    p.resize(1);
    CHECK_THROWS_AS(Optimizer({OptimKind::Adam, 0.0}, {view("p", p)}), ConfigError);
    OptimizerConfig bad{OptimKind::Adam, 0.1};
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(Optimizer(bad, {view("p", p)}), ConfigError);
}

TEST_CASE("train_model: zero learning rate freezes parameters and loss") {
    const BackboneConfig bc = tiny_forecast_config();
    BackboneModel model(bc, prior_at(32, 4), 11);
    const Dataset data = sine_dataset(12, 32, 4, 8.0, 11);

    const std::vector<double> before = [&]() {
        std::vector<double> all;
        for (const auto& v : model.param_views())
            all.insert(all.end(), v.value.begin(), v.value.end());
        return all;
    }();

    Optimizer opt({OptimKind::Sgd, 1e-300}, model.param_views());
    const auto records = train_model(model, data, data, opt, 3, 4, 11);

    std::vector<double> after;
    for (const auto& v : model.param_views())
        after.insert(after.end(), v.value.begin(), v.value.end());
    for (std::size_t k = 0; k < before.size(); ++k)
        CHECK(std::abs(after[k] - before[k]) < 1e-250);
    CHECK(records[0].train_loss == doctest::Approx(records[2].train_loss).epsilon(1e-9));
}

TEST_CASE("train_model: reproducible records at equal seeds") {
    const BackboneConfig bc = tiny_forecast_config();
    const Dataset data = sine_dataset(12, 32, 4, 8.0, 3);

    auto run = [&]() {
        BackboneModel model(bc, prior_at(32, 4), 21);
        Optimizer opt({OptimKind::Adam, 1e-3}, model.param_views());
        return train_model(model, data, data, opt, 4, 4, 77);
    };
    const auto r1 = run();
    const auto r2 = run();
    REQUIRE(r1.size() == r2.size());
    for (std::size_t e = 0; e < r1.size(); ++e) {
        CHECK(r1[e].train_loss == r2[e].train_loss);
        CHECK(r1[e].val.mse == r2[e].val.mse);
    }
}

TEST_CASE("train_model: loss drops on a learnable sinusoid") {
    const BackboneConfig bc = tiny_forecast_config();
    BackboneModel model(bc, prior_at(32, 4), 13);
    const Dataset data = sine_dataset(24, 32, 4, 8.0, 13);
    Optimizer opt({OptimKind::Adam, 3e-3}, model.param_views());
    const auto records = train_model(model, data, data, opt, 20, 8, 13);
    CHECK(records.back().train_loss < records.front().train_loss);
}

TEST_CASE("train_model: divergence aborts with epoch and step") {
    const BackboneConfig bc = tiny_forecast_config();
    BackboneModel model(bc, prior_at(32, 4), 17);
    const Dataset data = sine_dataset(8, 32, 4, 8.0, 17);
    Optimizer opt({OptimKind::Sgd, 1e18}, model.param_views());
    CHECK_THROWS_AS((void)train_model(model, data, data, opt, 10, 4, 17), std::runtime_error);
}

TEST_CASE("gradcheck harness: clean pass and injected-fault failure") {
    const GradcheckRun clean = run_gradcheck(GradcheckScope::Defop, 42, 1e-5, false);
    CHECK(clean.pass);
    const GradcheckRun faulty = run_gradcheck(GradcheckScope::Defop, 42, 1e-5, true);
    CHECK_FALSE(faulty.pass);
}

TEST_CASE("gradcheck: linear model agrees to 1e-10") {
    // One pointwise layer is exactly linear; analytic and numeric gradients
    // collapse to the same values.
    PointwiseConv conv;
    SeededRng rng(31);
    conv.randomize_all(2, 2, rng, 0.5);
    Tensor2D x(2, 6);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);

    auto loss = [&]() {
        const Tensor2D y = conv.forward(x);
        double acc = 0.0;
        for (double v : y.v) acc += v;
        return acc;
    };
    auto backward = [&]() {
        conv.zero_grad();
        Tensor2D dy(2, 6);
        std::fill(dy.v.begin(), dy.v.end(), 1.0);
        (void)conv.backward(x, dy);
    };
    const GradCheckReport report =
        gradcheck(loss, backward,
                  {view("w", conv.weight), view("b", conv.bias)}, 1e-5, 1e-10, 1e-10);
    CHECK(report.pass);
}
