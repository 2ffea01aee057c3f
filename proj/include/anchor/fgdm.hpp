#pragma once

#include <string>
#include <vector>

#include "anchor/deform_op.hpp"
#include "anchor/spectral_prior.hpp"
#include "anchor/tensor.hpp"

namespace anchor {

// ── Frequency-Guided Deformable Module ───────────────────────────────────────
//
// Channels are split into N orthogonal partitions x_0..x_{N−1} of width C/N.
// Stage i ∈ {1..N−1} runs a deformable operator D_i with kernel K_i and a
// routed period T_i over the running state, then fuses:
//
//     d     = D_i(y_{i−1}; K_i, T_i)                width i·C/N → i·C/N
//     left  = φ_ci(x_i) + d                         φ_ci: C/N → i·C/N
//     right = d ⊙ φ_vi(y_{i−1})                     φ_vi: i·C/N → i·C/N
//     y_i   = φ_fi([left ∥ right])                  φ_fi: 2i·C/N → (i+1)·C/N
//
// with y_0 = x_0.  The fusion projection φ_fi restores the growth law
// width(y_i) = (i+1)·C/N after the concatenation doubles the width; its
// pointwise cost is O(L·i²·C²/N²), the same order as the stage itself.
//
// Routing pairs the kernel schedule K_1 < … < K_{N−1} with the extracted
// periods sorted by descending spectral energy: EnergyAscKernel sends the
// highest-energy period to the smallest kernel (sharp phase localization for
// dominant oscillations, low-pass smoothing for weak ones), EnergyDescKernel
// is the reverse pairing.

enum class RoutingOrder { EnergyAscKernel, EnergyDescKernel };

struct FgdmConfig {
    int partitions = 2;               // N ≥ 2
    std::vector<int> kernel_schedule; // N−1 strictly increasing odd sizes
    InterpKernel interp = InterpKernel::gaussian();
    RoutingOrder routing_order = RoutingOrder::EnergyAscKernel;

    // One period per stage: the prior is always asked for N−1 periods.
    int topk() const { return partitions - 1; }
    void validate(int channels) const;
};

struct RouteAssignment {
    struct Entry {
        int stage = 0;   // 1-based cascade step
        int kernel = 0;  // K_i
        int period = 1;  // T routed to this stage
        double energy = 0.0;
    };
    std::vector<Entry> entries;
    bool cycled = false;        // prior had fewer periods than stages
    bool no_periodicity = false;
};

// ── Pointwise (1×1) convolution ──────────────────────────────────────────────
struct PointwiseConv {
    int in_channels = 0;
    int out_channels = 0;
    Param weight;  // [out × in]
    Param bias;    // [out]

    void init(int in_ch, int out_ch);
    void default_init(int in_ch, int out_ch, SeededRng& rng);
    void randomize_all(int in_ch, int out_ch, SeededRng& rng, double scale);

    Tensor2D forward(const Tensor2D& x) const;
    // Accumulates weight/bias gradients, returns dL/dx.
    Tensor2D backward(const Tensor2D& x, const Tensor2D& dy);
    void zero_grad();
};

struct FgdmStageParams {
    DefOpParams defop;
    PointwiseConv phi_c, phi_v, phi_f;
};

struct FgdmParams {
    std::vector<FgdmStageParams> stages;  // N−1 entries

    void init(const FgdmConfig& config, int channels);
    void default_init(const FgdmConfig& config, int channels, SeededRng& rng);
    void randomize_all(const FgdmConfig& config, int channels, SeededRng& rng, double scale);
    void zero_grad();
    std::vector<ParamView> views(const std::string& prefix);
    std::size_t param_count() const;
};

struct FgdmStageCache {
    Tensor2D x_static;  // x_i
    Tensor2D y_prev;    // stage input y_{i−1}
    Tensor2D d, g, cat;
    DefOpCache defop;
};

struct FgdmCache {
    std::vector<FgdmStageCache> stages;
};

// Contiguous equal channel slices; channel_concat is the exact inverse.
std::vector<Tensor2D> channel_split(const Tensor2D& x, int n);
Tensor2D channel_concat(const std::vector<Tensor2D>& parts);

// Pair periods (energy-ranked) with the kernel schedule.  Cycles and flags
// when the prior is short; use no_periodicity_routes for constant inputs.
RouteAssignment assign_routes(const SpectralPrior& prior, const FgdmConfig& config);
RouteAssignment no_periodicity_routes(const FgdmConfig& config);

Tensor2D fgdm_forward(const Tensor2D& x, FgdmParams& params, const FgdmConfig& config,
                      const RouteAssignment& routes, FgdmCache& cache);
Tensor2D fgdm_backward(const FgdmCache& cache, const Tensor2D& dy, FgdmParams& params,
                       const FgdmConfig& config, const RouteAssignment& routes);

// ── Cost model ───────────────────────────────────────────────────────────────
// cost_baseline = L·C²·ΣK_i          (dense multi-branch alternative)
// cost_spatial  = L·(C/N)²·Σ i²·K_i  (orthogonal-partition cascade)
// rfft_cost     = C·L·log₂L          (one-off prior extraction)
// rfft_fraction = rfft_cost / (baseline + spatial + rfft_cost), i.e. the share
// of all compute the report prints.
struct CostModel {
    double baseline = 0.0;
    double spatial = 0.0;
    double ratio = 0.0;
    double rfft_cost = 0.0;
    double rfft_fraction = 0.0;
};

CostModel cost_model(int channels, int length, int partitions,
                     const std::vector<int>& kernel_schedule);

}  // namespace anchor
