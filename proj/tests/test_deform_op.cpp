#include <doctest.h>

#include <cmath>

#include "anchor/deform_op.hpp"

using namespace anchor;

namespace {

// Reference dilated convolution with zero padding; same reduction order as
// the operator so the comparison can be exact.
Tensor2D dilated_conv_oracle(const Tensor2D& x, const DefOpParams& params,
                             const DefOpConfig& config) {
    Tensor2D y(config.out_channels, x.length);
    const int half = config.half_taps();
    for (int t = 0; t < x.length; ++t) {
        for (int o = 0; o < config.out_channels; ++o) {
            double acc = params.bias.value[static_cast<std::size_t>(o)];
            for (int c = 0; c < config.in_channels; ++c)
                for (int n = 0; n < config.kernel_size; ++n) {
                    const int src = t + config.period * (n - half);
                    const double v = (src >= 0 && src < x.length) ? x.at(c, src) : 0.0;
                    acc += params.weight.value[(static_cast<std::size_t>(o) * config.in_channels +
                                                c) * config.kernel_size + n] * v;
                }
            y.at(o, t) = acc;
        }
    }
    return y;
}

DefOpConfig small_config(InterpKernel interp, int period = 1) {
    DefOpConfig c;
    c.kernel_size = 3;
    c.period = period;
    c.in_channels = 2;
    c.out_channels = 2;
    c.interp = interp;
    return c;
}

Tensor2D random_input(int channels, int length, SeededRng& rng) {
    Tensor2D x(channels, length);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    return x;
}

}  // namespace

TEST_CASE("sampling_positions: period dilation plus offsets") {
    DefOpConfig c;
    c.kernel_size = 3;
    c.period = 4;

    const auto pure = sampling_positions(10, c, std::vector<double>{0, 0, 0});
    CHECK(pure == std::vector<double>{6, 10, 14});

    const auto shifted = sampling_positions(10, c, std::vector<double>{0.5, 0, -0.5});
    CHECK(shifted == std::vector<double>{6.5, 10, 13.5});

    c.period = 1;
    const auto contiguous = sampling_positions(10, c, std::vector<double>{0, 0, 0});
    CHECK(contiguous == std::vector<double>{9, 10, 11});

    CHECK_THROWS_AS((void)sampling_positions(0, c, std::vector<double>{0, 0}), ConfigError);
    CHECK_THROWS_AS((void)sampling_positions(0, c, std::vector<double>{0, std::nan(""), 0}),
                    ValidationError);
}

TEST_CASE("defop: zero offsets + bilinear + T=1 equals a dense conv exactly") {
    SeededRng rng(21);
    const DefOpConfig config = small_config(InterpKernel::bilinear(), 1);
    DefOpParams params;
    params.default_init(config, rng);  // offset predictor starts at zero
    const Tensor2D x = random_input(2, 24, rng);

    DefOpCache cache;
    const Tensor2D y = defop_forward(x, params, config, cache);
    const Tensor2D want = dilated_conv_oracle(x, params, config);
    REQUIRE(y.v.size() == want.v.size());
    for (std::size_t k = 0; k < y.v.size(); ++k) CHECK(y.v[k] == want.v[k]);
}

TEST_CASE("defop: zero offsets + sharp gaussian matches a dilated conv to 1e-6") {
    SeededRng rng(22);
    const DefOpConfig config = small_config(InterpKernel::gaussian(0.1), 2);
    DefOpParams params;
    params.default_init(config, rng);
    const Tensor2D x = random_input(2, 24, rng);

    DefOpCache cache;
    const Tensor2D y = defop_forward(x, params, config, cache);
    const Tensor2D want = dilated_conv_oracle(x, params, config);
    for (std::size_t k = 0; k < y.v.size(); ++k)
        CHECK(std::abs(y.v[k] - want.v[k]) < 1e-6);
}

TEST_CASE("defop: single tap with unit weight is a channel mix") {
    DefOpConfig config;
    config.kernel_size = 1;
    config.period = 3;
    config.in_channels = 2;
    config.out_channels = 1;
    config.interp = InterpKernel::bilinear();
    DefOpParams params;
    params.init(config);
    params.weight.value = {1.0, 1.0};

    SeededRng rng(23);
    const Tensor2D x = random_input(2, 12, rng);
    DefOpCache cache;
    const Tensor2D y = defop_forward(x, params, config, cache);
    for (int t = 0; t < 12; ++t) CHECK(y.at(0, t) == x.at(0, t) + x.at(1, t));
}

TEST_CASE("defop: output length equals input length for any period and kernel") {
    SeededRng rng(24);
    for (const int period : {1, 3, 9}) {
        for (const int taps : {1, 3, 5}) {
            DefOpConfig config;
            config.kernel_size = taps;
            config.period = period;
            config.in_channels = 1;
            config.out_channels = 2;
            config.interp = InterpKernel::gaussian(0.8);
            DefOpParams params;
            params.randomize_all(config, rng, 0.5);
            const Tensor2D x = random_input(1, 20, rng);
            DefOpCache cache;
            const Tensor2D y = defop_forward(x, params, config, cache);
            CHECK(y.length == 20);
            CHECK(y.channels == 2);
        }
    }
}

TEST_CASE("defop: zero upstream gradient leaves all gradients zero") {
    SeededRng rng(25);
    const DefOpConfig config = small_config(InterpKernel::gaussian(0.8), 2);
    DefOpParams params;
    params.randomize_all(config, rng, 0.5);
    const Tensor2D x = random_input(2, 16, rng);

    DefOpCache cache;
    (void)defop_forward(x, params, config, cache);
    params.zero_grad();
    const Tensor2D dx = defop_backward(cache, Tensor2D(2, 16), params, config);

    for (double g : params.weight.grad) CHECK(g == 0.0);
    for (double g : params.bias.grad) CHECK(g == 0.0);
    for (double g : params.offset_weight.grad) CHECK(g == 0.0);
    for (double g : params.offset_bias.grad) CHECK(g == 0.0);
    for (double g : dx.v) CHECK(g == 0.0);
}

TEST_CASE("defop: full gradient check against finite differences") {
    for (const bool gaussian : {true, false}) {
        CAPTURE(gaussian);
        SeededRng rng(gaussian ? 26 : 27);
        const DefOpConfig config =
            small_config(gaussian ? InterpKernel::gaussian(0.8) : InterpKernel::bilinear(), 4);
        DefOpParams params;
        params.randomize_all(config, rng, 0.5);
        Tensor2D x = random_input(2, 24, rng);

        auto loss = [&]() {
            DefOpCache cache;
            const Tensor2D y = defop_forward(x, params, config, cache);
            double acc = 0.0;
            for (double v : y.v) acc += v;
            return acc;
        };

        params.zero_grad();
        DefOpCache cache;
        const Tensor2D y = defop_forward(x, params, config, cache);
        Tensor2D dy(y.channels, y.length);
        std::fill(dy.v.begin(), dy.v.end(), 1.0);
        const Tensor2D dx = defop_backward(cache, dy, params, config);

        auto check_group = [&](std::span<double> value, std::span<const double> analytic) {
            for (std::size_t k = 0; k < value.size(); ++k) {
                const double saved = value[k];
                const double h = 1e-5;
                value[k] = saved + h;
                const double fp = loss();
                value[k] = saved - h;
                const double fm = loss();
                value[k] = saved;
                CHECK(grad_close(analytic[k], (fp - fm) / (2.0 * h), 1e-5, 1e-8));
            }
        };
        check_group(params.weight.value, params.weight.grad);
        check_group(params.bias.value, params.bias.grad);
        check_group(params.offset_weight.value, params.offset_weight.grad);
        check_group(params.offset_bias.value, params.offset_bias.grad);
        check_group(std::span<double>(x.v), dx.v);
    }
}

TEST_CASE("defop: free offset mode reads offsets from the bias only") {
    SeededRng rng(28);
    DefOpConfig config = small_config(InterpKernel::gaussian(0.8), 3);
    config.offset_mode = OffsetMode::Free;
    DefOpParams params;
    params.randomize_all(config, rng, 0.5);
    const Tensor2D x = random_input(2, 16, rng);

    DefOpCache cache;
    (void)defop_forward(x, params, config, cache);
    for (int t = 0; t < 16; ++t)
        for (int n = 0; n < 3; ++n)
            CHECK(cache.offset_at(t, n, 3) == params.offset_bias.value[static_cast<std::size_t>(n)]);

    params.zero_grad();
    Tensor2D dy(2, 16);
    std::fill(dy.v.begin(), dy.v.end(), 0.5);
    (void)defop_backward(cache, dy, params, config);
    for (double g : params.offset_weight.grad) CHECK(g == 0.0);  // predictor inert in free mode
    bool any = false;
    for (double g : params.offset_bias.grad) any = any || g != 0.0;
    CHECK(any);
}

TEST_CASE("defop: integer-landing bilinear offsets follow the one-sided convention") {
    // Single tap, unit weight, zero offsets: every sampling position is an
    // exact integer, so the offset gradient accumulates the documented
    // one-sided derivative x(t+1) − x(t) (left cell at the last point).
    DefOpConfig config;
    config.kernel_size = 1;
    config.period = 1;
    config.in_channels = 1;
    config.out_channels = 1;
    config.interp = InterpKernel::bilinear();
    DefOpParams params;
    params.init(config);
    params.weight.value[0] = 1.0;

    SeededRng rng(33);
    Tensor2D x(1, 10);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);

    DefOpCache cache;
    const Tensor2D y = defop_forward(x, params, config, cache);
    for (int t = 0; t < 10; ++t) CHECK(y.at(0, t) == x.at(0, t));

    params.zero_grad();
    Tensor2D dy(1, 10);
    std::fill(dy.v.begin(), dy.v.end(), 1.0);
    (void)defop_backward(cache, dy, params, config);

    double want = 0.0;
    for (int t = 0; t < 9; ++t) want += x.at(0, t + 1) - x.at(0, t);
    want += x.at(0, 9) - x.at(0, 8);  // boundary falls back to the left cell
    CHECK(params.offset_bias.grad[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("defop: oversized spans are permitted but flagged") {
    DefOpConfig config;
    config.kernel_size = 5;
    config.period = 16;
    config.in_channels = 1;
    config.out_channels = 1;
    config.interp = InterpKernel::bilinear();
    DefOpParams params;
    SeededRng rng(34);
    params.default_init(config, rng);

    Tensor2D x(1, 12);  // span (5−1)·16 = 64 ≥ 4·12
    DefOpCache cache;
    CHECK_NOTHROW((void)defop_forward(x, params, config, cache));
    CHECK(cache.span_warning);

    Tensor2D longer(1, 64);
    DefOpCache ok;
    (void)defop_forward(longer, params, config, ok);
    CHECK_FALSE(ok.span_warning);
}

TEST_CASE("defop: stale cache and shape mismatches are rejected") {
    SeededRng rng(29);
    const DefOpConfig config = small_config(InterpKernel::bilinear(), 1);
    DefOpParams params;
    params.randomize_all(config, rng, 0.5);
    const Tensor2D x = random_input(2, 8, rng);

    DefOpCache first, second;
    (void)defop_forward(x, params, config, first);
    (void)defop_forward(x, params, config, second);
    Tensor2D dy(2, 8);
    CHECK_THROWS_AS((void)defop_backward(first, dy, params, config), std::logic_error);
    CHECK_NOTHROW((void)defop_backward(second, dy, params, config));

    const Tensor2D wrong(3, 8);
    DefOpCache cache;
    CHECK_THROWS_AS((void)defop_forward(wrong, params, config, cache), ConfigError);

    Tensor2D infected = x;
    infected.at(1, 3) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)defop_forward(infected, params, config, cache), ValidationError);
}

TEST_CASE("defop: bitwise deterministic across repeated runs") {
    SeededRng rng(30);
    const DefOpConfig config = small_config(InterpKernel::gaussian(0.9), 5);
    DefOpParams params;
    params.randomize_all(config, rng, 0.5);
    const Tensor2D x = random_input(2, 32, rng);

    DefOpCache c1, c2;
    const Tensor2D y1 = defop_forward(x, params, config, c1);
    const Tensor2D y2 = defop_forward(x, params, config, c2);
    for (std::size_t k = 0; k < y1.v.size(); ++k) CHECK(y1.v[k] == y2.v[k]);
}
