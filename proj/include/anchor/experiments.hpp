#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anchor/backbone.hpp"
#include "anchor/synth_data.hpp"
#include "anchor/training.hpp"

namespace anchor {

// Desk-scale experiment drivers shared by the CLI and the acceptance suite.
// Every run is a pure function of its config: same config + seed, same rows.

// ── extract-periods ──────────────────────────────────────────────────────────

struct PeriodRow {
    int rank = 0;
    int frequency = 0;
    int period = 0;
    double energy = 0.0;
};

std::vector<PeriodRow> run_extract_periods(const SeriesBatch& input, int k);

// ── gradcheck ────────────────────────────────────────────────────────────────

enum class GradcheckScope { Interp, Defop, Fgdm, Backbone };

struct GradcheckRow {
    std::string group;
    double max_rel_err = 0.0;
    bool pass = true;
};

struct GradcheckRun {
    std::vector<GradcheckRow> rows;
    double rel_tol = 0.0;
    double abs_floor = 0.0;
    bool pass = true;
};

// inject_fault corrupts one analytic gradient on purpose; the run must then
// report a failure (harness self-test).
GradcheckRun run_gradcheck(GradcheckScope scope, std::uint64_t seed, double rel_tol,
                           bool inject_fault = false);

// Scope defaults: interp 1e-6, defop/fgdm 1e-5, backbone 1e-4.
double default_gradcheck_tol(GradcheckScope scope);

// ── compensation bench ───────────────────────────────────────────────────────
// One free-offset DefOp per fractional period T*, dilation ⌊T*⌋, fixed
// averaging weights; only the per-tap offsets train, by MSE against the
// signal itself.  Error per interpolation kind is the MAE between learned
// and theoretical offsets n·(T*−⌊T*⌋); η = E_linear / E_gaussian.

struct CompensationConfig {
    std::vector<double> periods = default_fractional_periods();
    int steps = 500;
    double lr = 0.02;
    double sigma = 1.0;
    int kernel_size = 3;
    int length = 512;
    std::uint64_t seed = 7;
    int threads = 1;

    static std::vector<double> default_fractional_periods();
};

struct CompensationRow {
    double period = 0.0;
    int integer_period = 0;
    double mae_linear = 0.0;
    double mae_gaussian = 0.0;
    double eta = 0.0;
    std::vector<double> theoretical;      // per tap
    std::vector<double> learned_linear;
    std::vector<double> learned_gaussian;
};

std::vector<CompensationRow> run_compensation_bench(const CompensationConfig& config);

// ── variant ablation ─────────────────────────────────────────────────────────
// Identical layer/channel/hyperparameter budgets; only the sampling mechanism
// changes: plain convolution (dilation 1, frozen offsets), deformable with
// bilinear interpolation, deformable with Gaussian RBF.

enum class AblationVariant { Conv1d, Bilinear, Gaussian };

std::string variant_name(AblationVariant v);

struct ForecastTaskConfig {
    double period = 20.7;  // non-integer so the anchor carries quantization error
    double amplitude = 1.0;
    double phase = 0.9;
    int harmonics = 5;  // waveform sharpness; k-th harmonic at period/k, amp/k^0.9
    double noise_std = 0.01;
    int series_length = 1560;
    int input_length = 96;
    int horizon = 24;
    int stride = 8;

    std::vector<ToneComponent> components() const;
};

struct AblationConfig {
    ForecastTaskConfig task;
    int epochs = 40;
    int batch_size = 16;
    double lr = 3e-3;
    double sigma = 0.3;  // sharp kernel: the task's detail lives in high harmonics
    std::uint64_t seed = 42;
    int threads = 1;
};

struct AblationRow {
    std::string variant;
    double train_mse = 0.0;
    Metrics val;
};

std::vector<AblationRow> run_ablation(const AblationConfig& config);

// ── top-k sweep ──────────────────────────────────────────────────────────────
// One period per cascade stage, so k periods mean k+1 partitions; channel
// width per partition is held fixed across the sweep.

struct TopkConfig {
    int k_min = 1;
    int k_max = 6;
    int channels_per_partition = 2;
    std::vector<ToneComponent> tones = {{32.0, 1.0, 0.4}, {12.0, 0.7, 1.3}, {5.0, 0.5, 2.1}};
    double noise_std = 0.02;
    int series_length = 1560;
    int input_length = 96;
    int horizon = 24;
    int stride = 8;
    int epochs = 8;
    int batch_size = 16;
    double lr = 3e-3;
    double sigma = 1.0;
    // Asserted property: worst/best validation MSE across the sweep stays
    // below this bound.
    double sensitivity_bound = 3.0;
    std::uint64_t seed = 42;
    int threads = 1;
};

struct TopkRow {
    int k = 0;
    double train_mse = 0.0;
    Metrics val;
};

std::vector<TopkRow> run_topk_sweep(const TopkConfig& config);

// ── routing ablation ─────────────────────────────────────────────────────────
// Reconstruction-error anomaly detection on an injected-spike series; the
// EnergyAscKernel and EnergyDescKernel orderings train under identical seeds.

struct RoutingConfig {
    std::vector<ToneComponent> tones = {{24.0, 1.0, 0.3}, {8.0, 0.15, 1.1}};
    int window = 96;
    int windows = 24;           // series length = window · windows
    double noise_std = 0.1;
    int anomaly_count = 23;     // ≈1% of points
    double anomaly_min = 0.6;   // spike magnitude range (sign seeded)
    double anomaly_max = 1.6;
    double quantile_r = 0.01;   // anomaly = error above the (1−r) quantile
    int epochs = 30;
    int batch_size = 8;
    double lr = 3e-3;
    double sigma = 1.0;
    std::uint64_t seed = 42;
};

struct RoutingRow {
    std::string order;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
};

std::vector<RoutingRow> run_routing_ablation(const RoutingConfig& config);

// ── train (user data) ────────────────────────────────────────────────────────

struct TrainRunConfig {
    std::string csv_path;
    bool csv_header = false;
    bool standardize = true;
    TaskHead head = TaskHead::Forecast;
    int horizon = 24;
    int input_length = 96;
    int stride = 8;
    int stem_width = 8;
    int stage_width = 8;
    int blocks = 1;
    int partitions = 2;
    std::vector<int> kernel_schedule = {3};
    double sigma = 1.0;
    int epochs = 10;
    int batch_size = 16;
    double lr = 1e-3;
    std::uint64_t seed = 42;
};

struct TrainRunResult {
    std::vector<TrainRecord> records;
    Metrics final_val;
    std::vector<double> anomaly_scores;  // Reconstruction: per-point |error|
    // Parameter dump: flat little-endian doubles + JSON shape manifest.
    std::vector<double> flat_params;
    std::vector<std::pair<std::string, std::size_t>> manifest;  // (name, count)
};

TrainRunResult run_train(const TrainRunConfig& config);

// ── shared helpers ───────────────────────────────────────────────────────────

// Slice a [C×L] series into (input, horizon-target) forecast samples.
Dataset make_forecast_windows(const Tensor2D& series, int input_length, int horizon, int stride);

// Chronological head/tail split.
std::pair<Dataset, Dataset> chrono_split(const Dataset& all, double train_fraction);

Tensor2D batch_to_tensor(const SeriesBatch& batch, int b);

}  // namespace anchor
