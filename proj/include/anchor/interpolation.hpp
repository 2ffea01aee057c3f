#pragma once

#include <span>
#include <utility>
#include <vector>

#include "anchor/errors.hpp"

namespace anchor {

// ── Sub-pixel sampling rules ─────────────────────────────────────────────────
//
// Two ways to read a discrete sequence x at a continuous coordinate p, with
// analytic derivatives in both p and the feature values.
//
// Bilinear (C⁰), with q_L = ⌊p⌋, q_R = q_L + 1, d = p − q_L:
//     x(p)      = x(q_L)·(1 − d) + x(q_R)·d
//     ∂x(p)/∂p  = x(q_R) − x(q_L)            (constant inside each unit cell)
//
// Gaussian RBF (C∞), over the window Ω = { q : |q − round(p)| ≤ radius }:
//     w_q(p)    = exp(−(p − q)² / (2σ²))
//     α_q(p)    = w_q / Σ_{q'∈Ω} w_{q'}
//     x(p)      = Σ_{q∈Ω} α_q(p)·x(q)
//     ∂x(p)/∂p  = (1/σ²) Σ_{q∈Ω} α_q(p)·(q − p)·[x(q) − x(p)]
//
// The Gaussian position derivative is a mean-shift vector: every window point
// pulls proportionally to its distance times its feature difference, so the
// gradient stays alive far from the nearest grid points where the bilinear
// derivative has already gone flat.
//
// Out-of-range grid points contribute feature value 0 (zero padding).  By
// default they keep their Gaussian weight in the normalizer, matching
// zero-padded convolution semantics and keeping Σ α_q = 1; setting
// renormalize_in_range drops them from the window entirely.

enum class InterpKind { Bilinear, GaussianRBF };

struct InterpKernel {
    InterpKind kind = InterpKind::GaussianRBF;
    double sigma = 1.0;       // σ, grid units (GaussianRBF only)
    int window_radius = 3;    // half-width of Ω in grid points (GaussianRBF only)
    bool renormalize_in_range = false;

    static InterpKernel bilinear();
    // radius defaults to ⌈3σ⌉ clamped to ≥ 2, covering >99.7% of the mass.
    static InterpKernel gaussian(double sigma = 1.0, int radius = -1);

    void validate() const;
};

struct InterpResult {
    double value = 0.0;
    double dvalue_dp = 0.0;                      // ∂x(p)/∂p
    std::vector<std::pair<int, double>> weights; // (grid index q, weight α_q)
};

InterpResult interp_bilinear(std::span<const double> x, double p);
InterpResult interp_gaussian(std::span<const double> x, double p, const InterpKernel& kernel);

// Dispatch on kernel.kind.
InterpResult interp(std::span<const double> x, double p, const InterpKernel& kernel);

// ∂value/∂x(q) for each in-range grid point: α_q for Gaussian, {1−d, d} for
// bilinear.  Padded (out-of-range) points carry no feature gradient.
std::vector<std::pair<int, double>> interp_grad_features(std::span<const double> x, double p,
                                                         const InterpKernel& kernel);

}  // namespace anchor
