#include <doctest.h>

#include <cmath>

#include "anchor/interpolation.hpp"
#include "anchor/numerics.hpp"

using namespace anchor;

TEST_CASE("bilinear: linear blend") {
    const std::vector<double> x = {0.0, 10.0};
    const InterpResult r = interp_bilinear(x, 0.3);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(r.dvalue_dp == 10.0);
    REQUIRE(r.weights.size() == 2);
    CHECK(r.weights[0] == std::pair<int, double>{0, 0.7});
    CHECK(r.weights[1] == std::pair<int, double>{1, 0.3});
}

TEST_CASE("bilinear: constant sequence has zero position gradient") {
    const std::vector<double> x = {5.0, 5.0, 5.0};
    for (const double p : {0.0, 0.25, 1.0, 1.9, 2.0}) {
        const InterpResult r = interp_bilinear(x, p);
        CHECK(r.value == 5.0);
        CHECK(r.dvalue_dp == 0.0);
    }
}

TEST_CASE("bilinear: zero padding at the right boundary") {
    const std::vector<double> x = {2.0, 8.0};
    const InterpResult r = interp_bilinear(x, 1.5);
    CHECK(r.value == 4.0);  // x(q_R) = 0 past the end
    CHECK(r.dvalue_dp == -8.0);
}

TEST_CASE("bilinear: piecewise-constant gradient inside each open unit cell") {
    SeededRng rng(11);
    std::vector<double> x(12);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    for (int cell = 0; cell < 11; ++cell) {
        const double a = cell + rng.uniform(1e-6, 0.5);
        const double b = cell + rng.uniform(0.5, 1.0 - 1e-6);
        CHECK(interp_bilinear(x, a).dvalue_dp == interp_bilinear(x, b).dvalue_dp);
    }
}

TEST_CASE("bilinear: grad_features lists both cell corners") {
    const std::vector<double> x = {1.0, 2.0, 3.0};
    const auto g = interp_grad_features(x, 0.3, InterpKernel::bilinear());
    REQUIRE(g.size() == 2);
    CHECK(g[0] == std::pair<int, double>{0, 0.7});
    CHECK(g[1] == std::pair<int, double>{1, 0.3});
}

TEST_CASE("gaussian: constant sequence reproduces the constant") {
    const std::vector<double> x = {5.0, 5.0, 5.0};
    const InterpResult r = interp_gaussian(x, 1.0, InterpKernel::gaussian(1.0, 1));
    CHECK(r.value == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(r.dvalue_dp == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gaussian: symmetric configuration has zero gradient") {
    const std::vector<double> x = {1.0, 2.0, 1.0};
    const InterpResult r = interp_gaussian(x, 1.0, InterpKernel::gaussian(0.8, 1));
    CHECK(std::abs(r.dvalue_dp) < 1e-15);
    CHECK(r.value > 1.0);
    CHECK(r.value < 2.0);
}

TEST_CASE("gaussian: matches independent formula evaluation") {
    // x = [1, 2, 4], p = 1.5, sigma = 1, radius = 2: recompute the normalized
    // weights and mean-shift gradient in long double, straight from the
    // definition over the window centered at round(p) = 2 (grid points 0..4,
    // the last two padded), plus a central-difference cross-check of the
    // same fixed-window expression.
    const std::vector<double> x = {1.0, 2.0, 4.0};
    const double p = 1.5;
    const InterpKernel kernel = InterpKernel::gaussian(1.0, 2);

    const long double values[5] = {1.0L, 2.0L, 4.0L, 0.0L, 0.0L};  // q = 0..4
    auto window_value = [&](long double point) {
        long double norm = 0.0L, acc = 0.0L;
        for (int q = 0; q < 5; ++q) {
            const long double w = std::exp(-(point - q) * (point - q) / 2.0L);
            norm += w;
            acc += w * values[q];
        }
        return acc / norm;
    };
    const long double value = window_value(p);
    long double norm = 0.0L;
    for (int q = 0; q < 5; ++q) norm += std::exp(-(p - q) * (p - q) / 2.0L);
    long double grad = 0.0L;
    for (int q = 0; q < 5; ++q)
        grad += std::exp(-(p - q) * (p - q) / 2.0L) / norm *
                (q - static_cast<long double>(p)) * (values[q] - value);

    const InterpResult r = interp_gaussian(x, p, kernel);
    CHECK(r.value == doctest::Approx(static_cast<double>(value)).epsilon(1e-13));
    CHECK(r.dvalue_dp == doctest::Approx(static_cast<double>(grad)).epsilon(1e-13));

    const long double h = 1e-6L;
    const double fd = static_cast<double>((window_value(p + h) - window_value(p - h)) / (2.0L * h));
    CHECK(grad_close(r.dvalue_dp, fd, 1e-6, 1e-9));
}

TEST_CASE("gaussian: feature gradients are symmetric about an integer p") {
    std::vector<double> x = {0.3, -0.7, 1.9, 0.2, -1.1, 0.8, 0.5};
    const InterpKernel k = InterpKernel::gaussian(1.0, 2);
    const int p = 3;
    std::vector<double> grads(x.size(), 0.0);
    for (const auto& [q, a] : interp_grad_features(x, static_cast<double>(p), k))
        grads[static_cast<std::size_t>(q)] = a;
    for (int d = 1; d <= 2; ++d)
        CHECK(grads[static_cast<std::size_t>(p - d)] == grads[static_cast<std::size_t>(p + d)]);
}

TEST_CASE("gaussian: weights normalize to one and stay positive") {
    SeededRng rng(3);
    std::vector<double> x(16);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = rng.uniform(-1.0, 17.0);  // includes padded windows
        const InterpKernel k = InterpKernel::gaussian(rng.uniform(0.3, 2.0),
                                                      2 + static_cast<int>(rng.below(3)));
        const InterpResult r = interp_gaussian(x, p, k);
        double sum = 0.0;
        for (const auto& [q, alpha] : r.weights) {
            CHECK(alpha > 0.0);
            sum += alpha;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("gaussian: translation equivariance away from boundaries") {
    // Dyadic coordinates keep p+1 and p−q exact, so equality is bitwise.
    const InterpKernel k = InterpKernel::gaussian(0.9, 3);
    std::vector<double> x(16);
    SeededRng rng(17);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<double> shifted(16, 0.0);
    for (int i = 0; i < 15; ++i) shifted[static_cast<std::size_t>(i) + 1] = x[static_cast<std::size_t>(i)];

    for (int step = 0; step < 64; ++step) {
        const double p = 4.0 + 7.0 * step / 64.0;  // [4, 11), radius+1 clear of both ends
        const InterpResult a = interp_gaussian(x, p, k);
        const InterpResult b = interp_gaussian(shifted, p + 1.0, k);
        CHECK(a.value == b.value);
        CHECK(a.dvalue_dp == b.dvalue_dp);
    }
}

TEST_CASE("gaussian: sharp sigma pins the value to the grid point") {
    std::vector<double> x = {0.4, -1.2, 3.3, 0.8, -0.5, 2.2, 1.7};
    const InterpKernel k = InterpKernel::gaussian(0.1, 3);
    for (int q = 0; q < 7; ++q)
        CHECK(std::abs(interp_gaussian(x, static_cast<double>(q), k).value -
                       x[static_cast<std::size_t>(q)]) < 1e-8);
}

TEST_CASE("gaussian vs bilinear: the gradient dead zone") {
    // Unit impulse eight samples in; probe four samples away.  The bilinear
    // derivative sees only the flat neighborhood and dies; the Gaussian long
    // tail still pulls toward the impulse.
    std::vector<double> x(16, 0.0);
    x[8] = 1.0;
    const double p = 4.0;
    CHECK(interp_bilinear(x, p).dvalue_dp == 0.0);
    const InterpResult g = interp_gaussian(x, p, InterpKernel::gaussian(1.5, 6));
    CHECK(std::abs(g.dvalue_dp) > 0.0);
}

TEST_CASE("gaussian: renormalize_in_range drops padded points entirely") {
    const std::vector<double> x = {2.0, 2.0, 2.0};
    InterpKernel keep = InterpKernel::gaussian(1.0, 3);
    InterpKernel renorm = keep;
    renorm.renormalize_in_range = true;

    // At the edge the default semantics dilute toward zero padding; the
    // renormalizing variant reproduces the constant exactly.
    const InterpResult kept = interp_gaussian(x, 0.0, keep);
    const InterpResult ren = interp_gaussian(x, 0.0, renorm);
    CHECK(kept.value < 2.0);
    CHECK(ren.value == doctest::Approx(2.0).epsilon(1e-14));
    double sum = 0.0;
    for (const auto& [q, alpha] : ren.weights) {
        CHECK(q >= 0);
        CHECK(q < 3);
        sum += alpha;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("gaussian: 200-case position-gradient check against finite differences") {
    SeededRng rng(404);
    std::vector<double> x(16);
    int checked = 0;
    while (checked < 200) {
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        const double sigma = rng.uniform(0.3, 2.0);
        const int radius = 2 + static_cast<int>(rng.below(3));
        const double p = rng.uniform(1.0, 14.0);
        const double frac = p - std::floor(p);
        // Keep the FD stencil inside one window cell.
        if (std::abs(frac - 0.5) < 1e-3 || frac < 1e-3 || frac > 1.0 - 1e-3) continue;
        ++checked;

        const InterpKernel k = InterpKernel::gaussian(sigma, radius);
        const double analytic = interp_gaussian(x, p, k).dvalue_dp;
        const double h = 1e-6;
        const double fd = (interp_gaussian(x, p + h, k).value -
                           interp_gaussian(x, p - h, k).value) / (2.0 * h);
        CHECK(grad_close(analytic, fd, 1e-6, 1e-9));
    }
}

TEST_CASE("gaussian: feature gradients match finite differences") {
    SeededRng rng(405);
    std::vector<double> x(16);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const InterpKernel k = InterpKernel::gaussian(0.7, 3);
    const double p = 6.3;

    std::vector<double> analytic(x.size(), 0.0);
    for (const auto& [q, a] : interp_grad_features(x, p, k))
        analytic[static_cast<std::size_t>(q)] = a;
    const auto fd = finite_diff_grad(
        [&](std::span<const double> xs) { return interp_gaussian(xs, p, k).value; }, x, 1e-3);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(grad_close(analytic[i], fd[i], 1e-7, 1e-10));
}

TEST_CASE("interpolation: configuration and input errors") {
    const std::vector<double> x = {1.0, 2.0};
    CHECK_THROWS_AS((void)InterpKernel::gaussian(0.0), ConfigError);
    InterpKernel bad = InterpKernel::gaussian(1.0, 2);
    bad.window_radius = 0;
    CHECK_THROWS_AS((void)interp_gaussian(x, 0.5, bad), ConfigError);
    CHECK_THROWS_AS((void)interp_gaussian(x, 0.5, InterpKernel::bilinear()), ConfigError);
    CHECK_THROWS_AS((void)interp_bilinear(x, std::nan("")), ValidationError);
    CHECK_THROWS_AS((void)interp_bilinear(std::vector<double>{}, 0.0), ValidationError);
}
