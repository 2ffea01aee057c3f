#include "anchor/interpolation.hpp"

#include <cmath>
#include <string>

namespace anchor {

InterpKernel InterpKernel::bilinear() {
    InterpKernel k;
    k.kind = InterpKind::Bilinear;
    return k;
}

InterpKernel InterpKernel::gaussian(double sigma, int radius) {
    InterpKernel k;
    k.kind = InterpKind::GaussianRBF;
    k.sigma = sigma;
    k.window_radius = radius > 0 ? radius : std::max(2, static_cast<int>(std::ceil(3.0 * sigma)));
    k.validate();
    return k;
}

void InterpKernel::validate() const {
    if (kind == InterpKind::GaussianRBF) {
        if (!(sigma > 0.0)) throw ConfigError("InterpKernel: sigma must be > 0");
        if (window_radius < 1) throw ConfigError("InterpKernel: window_radius must be >= 1");
    }
}

namespace {

double fetch(std::span<const double> x, long long q) {
    return (q >= 0 && q < static_cast<long long>(x.size())) ? x[static_cast<std::size_t>(q)] : 0.0;
}

bool in_range(std::span<const double> x, long long q) {
    return q >= 0 && q < static_cast<long long>(x.size());
}

void require_finite_coord(double p) {
    if (!std::isfinite(p))
        throw ValidationError("interp: sampling coordinate is not finite");
}

}  // namespace

InterpResult interp_bilinear(std::span<const double> x, double p) {
    if (x.empty()) throw ValidationError("interp_bilinear: empty sequence");
    require_finite_coord(p);

    const long long q_left = static_cast<long long>(std::floor(p));
    const long long q_right = q_left + 1;
    const double d = p - static_cast<double>(q_left);

    const double xl = fetch(x, q_left);
    const double xr = fetch(x, q_right);

    InterpResult r;
    r.value = xl * (1.0 - d) + xr * d;
    // Right-hand derivative at integer p by convention.  At the last in-range
    // grid point the right cell is pure padding, so the derivative falls back
    // to the left cell there.
    if (d == 0.0 && q_left == static_cast<long long>(x.size()) - 1 && q_left > 0)
        r.dvalue_dp = xl - fetch(x, q_left - 1);
    else
        r.dvalue_dp = xr - xl;
    r.weights = {{static_cast<int>(q_left), 1.0 - d}, {static_cast<int>(q_right), d}};
    return r;
}

InterpResult interp_gaussian(std::span<const double> x, double p, const InterpKernel& kernel) {
    if (kernel.kind != InterpKind::GaussianRBF)
        throw ConfigError("interp_gaussian: kernel.kind must be GaussianRBF");
    kernel.validate();
    if (x.empty()) throw ValidationError("interp_gaussian: empty sequence");
    require_finite_coord(p);

    const long long center = std::llround(p);
    const long long lo = center - kernel.window_radius;
    const long long hi = center + kernel.window_radius;
    const double inv_two_sigma2 = 1.0 / (2.0 * kernel.sigma * kernel.sigma);

    InterpResult r;
    r.weights.reserve(static_cast<std::size_t>(2 * kernel.window_radius + 1));

    double normalizer = 0.0;
    double weighted_sum = 0.0;
    for (long long q = lo; q <= hi; ++q) {
        if (kernel.renormalize_in_range && !in_range(x, q)) continue;
        const double dist = p - static_cast<double>(q);
        const double w = std::exp(-dist * dist * inv_two_sigma2);
        normalizer += w;
        weighted_sum += w * fetch(x, q);
        r.weights.emplace_back(static_cast<int>(q), w);
    }
    if (normalizer <= 0.0)
        throw ValidationError("interp_gaussian: empty window at p=" + std::to_string(p));

    const double inv_norm = 1.0 / normalizer;
    r.value = weighted_sum * inv_norm;

    // Mean-shift position gradient: (1/σ²) Σ α_q (q − p) [x(q) − x(p)].
    double grad = 0.0;
    for (auto& [q, w] : r.weights) {
        w *= inv_norm;  // w becomes the normalized weight α_q
        grad += w * (static_cast<double>(q) - p) * (fetch(x, q) - r.value);
    }
    r.dvalue_dp = grad / (kernel.sigma * kernel.sigma);
    return r;
}

InterpResult interp(std::span<const double> x, double p, const InterpKernel& kernel) {
    return kernel.kind == InterpKind::Bilinear ? interp_bilinear(x, p)
                                               : interp_gaussian(x, p, kernel);
}

std::vector<std::pair<int, double>> interp_grad_features(std::span<const double> x, double p,
                                                         const InterpKernel& kernel) {
    const InterpResult r = interp(x, p, kernel);
    std::vector<std::pair<int, double>> grads;
    grads.reserve(r.weights.size());
    for (const auto& [q, alpha] : r.weights)
        if (in_range(x, q)) grads.emplace_back(q, alpha);
    return grads;
}

}  // namespace anchor
