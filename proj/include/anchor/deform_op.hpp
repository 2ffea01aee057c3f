#pragma once

#include <cstdint>
#include <vector>

#include "anchor/interpolation.hpp"
#include "anchor/numerics.hpp"
#include "anchor/tensor.hpp"

namespace anchor {

// ── 1D period-anchored deformable convolution ────────────────────────────────
//
// Sampling positions for output position p0 and tap n ∈ {−⌊S/2⌋, …, ⌊S/2⌋}:
//
//     p_n = p0 + T·n + Δp_n
//
// with the integer period T as the dilation anchor and Δp_n a continuous
// learned offset.  Features are gathered at p_n through the configured
// interpolation kernel (zero padding is implicit in the interpolation, no
// buffer is materialized), multiplied by the conv weight, and reduced over
// taps and input channels.
//
// Offset modes:
//   Predicted: Δp_n(p0) = offset_bias[n] + Σ_c offset_weight[n,c]·x[c,p0],
//               a pointwise predictor in the DCN style.  Zero-initialized so
//               training starts from the pure period-anchored grid.
//   Free:      Δp_n = offset_bias[n], one free parameter per tap shared by
//               all positions (the quantization-compensation experiments).

enum class OffsetMode { Predicted, Free };

struct DefOpConfig {
    int kernel_size = 3;   // S, odd ≥ 1
    int period = 1;        // T, dilation anchor in samples, ≥ 1
    int in_channels = 1;
    int out_channels = 1;
    InterpKernel interp = InterpKernel::gaussian();
    OffsetMode offset_mode = OffsetMode::Predicted;

    void validate() const;
    int half_taps() const { return kernel_size / 2; }
};

struct DefOpParams {
    Param weight;         // [out_channels × in_channels × kernel_size]
    Param bias;           // [out_channels]
    Param offset_weight;  // [kernel_size × in_channels], pointwise predictor
    Param offset_bias;    // [kernel_size]

    // Serial of the most recent forward pass; used to reject stale caches.
    std::uint64_t forward_serial = 0;

    void init(const DefOpConfig& config);
    // Conv weights uniform ±1/√fan_in, biases and offset predictor zero.
    void default_init(const DefOpConfig& config, SeededRng& rng);
    // Everything uniform in ±scale; for gradient checks.
    void randomize_all(const DefOpConfig& config, SeededRng& rng, double scale);
    void zero_grad();
    std::vector<ParamView> views(const std::string& prefix);

    double& w(const DefOpConfig& c, int o, int i, int n) {
        return weight.value[(static_cast<std::size_t>(o) * c.in_channels + i) * c.kernel_size + n];
    }
    double& gw(const DefOpConfig& c, int o, int i, int n) {
        return weight.grad[(static_cast<std::size_t>(o) * c.in_channels + i) * c.kernel_size + n];
    }
};

// Everything the backward pass needs from the forward call that produced it.
struct DefOpCache {
    Tensor2D input;                 // [C_in × L]
    std::vector<double> offsets;    // [L × S], predicted or free Δp_n per position
    std::vector<double> sampled;    // [C_in × S × L] gathered features
    std::uint64_t serial = 0;
    // Effective span (S−1)·T reached 4·L: permitted, but most taps land in
    // padding; callers may surface this.
    bool span_warning = false;

    double offset_at(int t, int n, int kernel_size) const {
        return offsets[static_cast<std::size_t>(t) * kernel_size + n];
    }
};

// p_n = p0 + T·n + Δp_n for each tap; offsets indexed 0..S−1 left to right.
std::vector<double> sampling_positions(int p0, const DefOpConfig& config,
                                       std::span<const double> offsets);

// Length-preserving forward pass: y is [C_out × L] for x [C_in × L].
Tensor2D defop_forward(const Tensor2D& x, DefOpParams& params, const DefOpConfig& config,
                       DefOpCache& cache);

// Accumulates parameter gradients and returns dL/dx.  The cache must come
// from the immediately preceding forward on the same params.
Tensor2D defop_backward(const DefOpCache& cache, const Tensor2D& dy, DefOpParams& params,
                        const DefOpConfig& config);

}  // namespace anchor
