#include <doctest.h>

#include <cmath>

#include "anchor/backbone.hpp"
#include "anchor/training.hpp"

using namespace anchor;

namespace {

SpectralPrior prior_at(int length, int freq) {
    std::vector<double> e(static_cast<std::size_t>(length / 2 + 1), 0.0);
    e[static_cast<std::size_t>(freq)] = 1.0;
    return topk_periods(e, 1, length);
}

BackboneConfig forecast_config(int input_length, int horizon) {
    BackboneConfig bc;
    bc.input_channels = 1;
    bc.input_length = input_length;
    bc.stem_width = 4;
    bc.stages = {{1, 4, 1}};
    bc.fgdm.partitions = 2;
    bc.fgdm.kernel_schedule = {3};
    bc.fgdm.interp = InterpKernel::gaussian(0.8, 3);
    bc.head = TaskHead::Forecast;
    bc.horizon = horizon;
    return bc;
}

}  // namespace

TEST_CASE("backbone: forecast head shape law") {
    const BackboneConfig bc = forecast_config(48, 8);
    BackboneModel model(bc, prior_at(48, 4), 1);
    Tensor2D x(1, 48);
    SeededRng rng(2);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    BackboneCache cache;
    const Tensor2D y = model.forward(x, cache);
    CHECK(y.channels == 1);
    CHECK(y.length == 8);
}

TEST_CASE("backbone: reconstruction head preserves the input shape") {
    BackboneConfig bc = forecast_config(32, 0);
    bc.head = TaskHead::Reconstruction;
    bc.horizon = 1;
    BackboneModel model(bc, prior_at(32, 4), 1);
    Tensor2D x(1, 32);
    BackboneCache cache;
    const Tensor2D y = model.forward(x, cache);
    CHECK(y.channels == 1);
    CHECK(y.length == 32);
}

TEST_CASE("backbone: reconstruction forbids net downsampling") {
    BackboneConfig bc = forecast_config(32, 1);
    bc.head = TaskHead::Reconstruction;
    bc.stages = {{1, 4, 2}};
    CHECK_THROWS_AS(bc.validate(), ConfigError);
}

TEST_CASE("backbone: classification head emits one score per class") {
    BackboneConfig bc = forecast_config(32, 1);
    bc.head = TaskHead::Classification;
    bc.classes = 5;
    BackboneModel model(bc, prior_at(32, 4), 3);
    Tensor2D x(1, 32);
    BackboneCache cache;
    const Tensor2D y = model.forward(x, cache);
    CHECK(y.channels == 5);
    CHECK(y.length == 1);
}

TEST_CASE("backbone: residual block at zero FGDM parameters is the identity") {
    FgdmConfig config;
    config.partitions = 2;
    config.kernel_schedule = {3};
    config.interp = InterpKernel::gaussian(1.0, 3);
    FgdmParams params;
    params.init(config, 4);  // all zeros

    SeededRng rng(6);
    Tensor2D x(4, 24);
    for (double& v : x.v) v = rng.uniform(-2.0, 2.0);
    const RouteAssignment routes = no_periodicity_routes(config);
    FgdmCache cache;
    const Tensor2D f = fgdm_forward(x, params, config, routes, cache);
    for (double v : f.v) CHECK(v == 0.0);

    // x + FGDM(x) == x exactly.
    Tensor2D res = x;
    for (std::size_t k = 0; k < res.v.size(); ++k) res.v[k] += f.v[k];
    for (std::size_t k = 0; k < res.v.size(); ++k) CHECK(res.v[k] == x.v[k]);
}

TEST_CASE("backbone: downsampling averages and spreads gradient evenly") {
    Tensor2D x(1, 8);
    for (int t = 0; t < 8; ++t) x.at(0, t) = t;
    const Tensor2D y = downsample_avg(x, 4);
    REQUIRE(y.length == 2);
    CHECK(y.at(0, 0) == doctest::Approx(1.5));
    CHECK(y.at(0, 1) == doctest::Approx(5.5));

    Tensor2D dy(1, 2);
    dy.at(0, 0) = 4.0;
    dy.at(0, 1) = 8.0;
    const Tensor2D dx = downsample_avg_backward(dy, 4, 8);
    for (int t = 0; t < 4; ++t) CHECK(dx.at(0, t) == 1.0);
    for (int t = 4; t < 8; ++t) CHECK(dx.at(0, t) == 2.0);

    CHECK_THROWS_AS((void)downsample_avg(x, 3), ConfigError);
}

TEST_CASE("backbone: stage periods rescale by the cumulative stride") {
    SpectralPrior p = prior_at(96, 4);  // period 24
    const SpectralPrior half = rescale_prior(p, 2);
    CHECK(half.periods[0] == 12);
    const SpectralPrior deep = rescale_prior(p, 48);
    CHECK(deep.periods[0] == 1);  // clamped
}

TEST_CASE("backbone: deterministic construction and forward at a fixed seed") {
    const BackboneConfig bc = forecast_config(32, 4);
    BackboneModel m1(bc, prior_at(32, 4), 99);
    BackboneModel m2(bc, prior_at(32, 4), 99);

    Tensor2D x(1, 32);
    SeededRng rng(1);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    BackboneCache c1, c2;
    const Tensor2D y1 = m1.forward(x, c1);
    const Tensor2D y2 = m2.forward(x, c2);
    for (std::size_t k = 0; k < y1.v.size(); ++k) CHECK(y1.v[k] == y2.v[k]);
}

TEST_CASE("backbone: end-to-end gradient check on the two-stage toy") {
    BackboneConfig bc;
    bc.input_channels = 1;
    bc.input_length = 16;
    bc.stem_width = 4;
    bc.stages = {{1, 4, 1}, {1, 4, 2}};
    bc.fgdm.partitions = 2;
    bc.fgdm.kernel_schedule = {3};
    bc.fgdm.interp = InterpKernel::gaussian(0.8, 3);
    bc.head = TaskHead::Forecast;
    bc.horizon = 4;

    BackboneModel model(bc, prior_at(16, 3), 5);
    SeededRng rng(5);
    model.randomize_all(rng, 0.5);
    Tensor2D x(1, 16);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);

    const GradCheckReport report = gradcheck_model(model, x, 1e-4);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("backbone: gradcheck guard rejects large models") {
    BackboneConfig bc = forecast_config(96, 48);
    bc.stem_width = 16;
    bc.stages = {{2, 16, 1}};
    BackboneModel model(bc, prior_at(96, 4), 1);
    Tensor2D x(1, 96);
    CHECK(model.params().param_count() > 10000);
    CHECK_THROWS_AS((void)gradcheck_model(model, x, 1e-4), ConfigError);
}

TEST_CASE("backbone: input shape is validated") {
    const BackboneConfig bc = forecast_config(32, 4);
    BackboneModel model(bc, prior_at(32, 4), 7);
    BackboneCache cache;
    CHECK_THROWS_AS((void)model.forward(Tensor2D(1, 31), cache), ConfigError);
    CHECK_THROWS_AS((void)model.forward(Tensor2D(2, 32), cache), ConfigError);
}
