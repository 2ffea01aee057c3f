#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anchor/fgdm.hpp"

namespace anchor {

// ── Hierarchical backbone ────────────────────────────────────────────────────
// stem (pointwise) → stages of residual FGDM blocks, with strided-average
// downsampling and an optional width transition on entry to each stage →
// task head.  The spectral prior is extracted once from the input and handed
// to every stage with its periods floor-divided by the cumulative downsample
// factor (min 1).

enum class TaskHead { Forecast, Reconstruction, Classification };

struct StageSpec {
    int blocks = 1;
    int width = 8;       // channel width inside this stage, divisible by partitions
    int downsample = 1;  // strided-average factor applied on entry
};

struct BackboneConfig {
    int input_channels = 1;
    int input_length = 96;
    int stem_width = 8;
    std::vector<StageSpec> stages;
    FgdmConfig fgdm;

    TaskHead head = TaskHead::Forecast;
    int horizon = 8;  // Forecast: outputs per input channel
    int classes = 2;  // Classification

    void validate() const;
    int final_length() const;  // input_length after all downsampling
    int final_width() const;
};

struct BackboneStageParams {
    bool has_transition = false;
    PointwiseConv transition;
    std::vector<FgdmParams> blocks;
};

struct BackboneParams {
    PointwiseConv stem;
    std::vector<BackboneStageParams> stages;
    Param head_weight;        // Forecast: [C_in·H × C_last·L_last]; Classification: [classes × C_last]
    Param head_bias;
    PointwiseConv recon_head; // Reconstruction only

    void init(const BackboneConfig& config);
    void default_init(const BackboneConfig& config, SeededRng& rng);
    void randomize_all(const BackboneConfig& config, SeededRng& rng, double scale);
    void zero_grad();
    std::vector<ParamView> views();
    std::size_t param_count();
};

struct BackboneBlockCache {
    Tensor2D input;
    FgdmCache fgdm;
};

struct BackboneStageCache {
    Tensor2D downsample_input;
    bool downsampled = false;
    Tensor2D transition_input;
    std::vector<BackboneBlockCache> blocks;
};

struct BackboneCache {
    Tensor2D input;
    std::vector<BackboneStageCache> stages;
    Tensor2D features;  // head input
};

// Strided averaging over time; backward spreads gradient uniformly.
Tensor2D downsample_avg(const Tensor2D& x, int factor);
Tensor2D downsample_avg_backward(const Tensor2D& dy, int factor, int input_length);

// Periods floor-divided by the cumulative stride, clamped to >= 1.
SpectralPrior rescale_prior(const SpectralPrior& prior, int factor);

// ── BackboneModel ────────────────────────────────────────────────────────────
// Owns parameters and the per-stage routes derived from one global prior.
// Forward/backward operate on a single [C×L] element; batch loops live in the
// training module.
class BackboneModel {
public:
    BackboneModel(BackboneConfig config, std::optional<SpectralPrior> prior,
                  std::uint64_t init_seed);

    Tensor2D forward(const Tensor2D& x, BackboneCache& cache);
    // Returns dL/dx, accumulating parameter gradients.
    Tensor2D backward(const BackboneCache& cache, const Tensor2D& dout);

    const BackboneConfig& config() const { return config_; }
    BackboneParams& params() { return params_; }
    std::vector<ParamView> param_views() { return params_.views(); }
    const std::vector<RouteAssignment>& stage_routes() const { return routes_; }
    void zero_grad() { params_.zero_grad(); }

    // For gradient checks: re-randomize every parameter.
    void randomize_all(SeededRng& rng, double scale) {
        params_.randomize_all(config_, rng, scale);
    }

private:
    BackboneConfig config_;
    BackboneParams params_;
    std::vector<RouteAssignment> routes_;  // one per stage
};

}  // namespace anchor
