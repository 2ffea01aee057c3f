#include "anchor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "anchor/spectral_prior.hpp"

namespace anchor {

namespace {

// Static round-robin partition; cases are independent, results land by index.
void parallel_cases(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w]() {
            for (int i = w; i < count; i += threads) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

// ── extract-periods ──────────────────────────────────────────────────────────

std::vector<PeriodRow> run_extract_periods(const SeriesBatch& input, int k) {
    const SpectralPrior prior = extract_prior(input, k);
    std::vector<PeriodRow> rows;
    rows.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        PeriodRow r;
        r.rank = i + 1;
        r.frequency = prior.top_freqs[static_cast<std::size_t>(i)];
        r.period = prior.periods[static_cast<std::size_t>(i)];
        r.energy = prior.energies[static_cast<std::size_t>(r.frequency)];
        rows.push_back(r);
    }
    return rows;
}

// ── gradcheck ────────────────────────────────────────────────────────────────

double default_gradcheck_tol(GradcheckScope scope) {
    switch (scope) {
        case GradcheckScope::Interp: return 1e-6;
        case GradcheckScope::Defop:
        case GradcheckScope::Fgdm: return 1e-5;
        case GradcheckScope::Backbone: return 1e-4;
    }
    return 1e-5;
}

namespace {

double rel_err(double a, double b, double abs_floor) {
    const double diff = std::abs(a - b);
    if (diff <= abs_floor) return 0.0;
    return diff / std::max(std::max(std::abs(a), std::abs(b)), 1e-300);
}

// Coordinates within eps of a window-shift or cell boundary would put the
// finite-difference stencil across a discontinuity; resample those.
double draw_clear_coord(SeededRng& rng, double lo, double hi, double eps) {
    for (;;) {
        const double p = rng.uniform(lo, hi);
        const double frac = p - std::floor(p);
        if (std::abs(frac - 0.5) < eps) continue;  // Gaussian window shift
        if (frac < eps || frac > 1.0 - eps) continue;  // bilinear cell edge
        return p;
    }
}

GradcheckRow sweep_gaussian_position(SeededRng& rng, int cases, double rel_tol,
                                     double abs_floor) {
    GradcheckRow row{"interp.gaussian.position_grad", 0.0, true};
    const double h = 1e-6;
    std::vector<double> x(16);
    for (int i = 0; i < cases; ++i) {
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        const double sigma = rng.uniform(0.3, 2.0);
        const int radius = 2 + static_cast<int>(rng.below(3));
        const double p = draw_clear_coord(rng, 1.0, 14.0, 1e-3);
        const InterpKernel kernel = InterpKernel::gaussian(sigma, radius);

        const double analytic = interp_gaussian(x, p, kernel).dvalue_dp;
        const double fp = interp_gaussian(x, p + h, kernel).value;
        const double fm = interp_gaussian(x, p - h, kernel).value;
        const double numeric = (fp - fm) / (2.0 * h);

        row.max_rel_err = std::max(row.max_rel_err, rel_err(analytic, numeric, abs_floor));
        if (!grad_close(analytic, numeric, rel_tol, abs_floor)) row.pass = false;
    }
    return row;
}

GradcheckRow sweep_gaussian_features(SeededRng& rng, int cases) {
    GradcheckRow row{"interp.gaussian.feature_grad", 0.0, true};
    const double rel_tol = 1e-7, abs_floor = 1e-10;
    std::vector<double> x(16);
    for (int i = 0; i < cases; ++i) {
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        const double sigma = rng.uniform(0.3, 2.0);
        const int radius = 2 + static_cast<int>(rng.below(3));
        const double p = draw_clear_coord(rng, 1.0, 14.0, 1e-3);
        const InterpKernel kernel = InterpKernel::gaussian(sigma, radius);

        std::vector<double> analytic(x.size(), 0.0);
        for (const auto& [q, a] : interp_grad_features(x, p, kernel))
            analytic[static_cast<std::size_t>(q)] = a;
        // The value is linear in the features, so the central difference has
        // no truncation term; a large step keeps roundoff below the floor.
        const auto numeric = finite_diff_grad(
            [&](std::span<const double> xs) { return interp_gaussian(xs, p, kernel).value; }, x,
            1e-3);
        for (std::size_t k = 0; k < x.size(); ++k) {
            row.max_rel_err = std::max(row.max_rel_err, rel_err(analytic[k], numeric[k], abs_floor));
            if (!grad_close(analytic[k], numeric[k], rel_tol, abs_floor)) row.pass = false;
        }
    }
    return row;
}

GradcheckRow sweep_bilinear(SeededRng& rng, int cases) {
    GradcheckRow row{"interp.bilinear.position_grad", 0.0, true};
    std::vector<double> x(16);
    for (int i = 0; i < cases; ++i) {
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        const double p = draw_clear_coord(rng, 0.0, 15.0, 1e-3);
        const InterpResult r = interp_bilinear(x, p);
        const long long ql = static_cast<long long>(std::floor(p));
        const double want = (ql + 1 < 16 ? x[static_cast<std::size_t>(ql + 1)] : 0.0) -
                            (ql >= 0 ? x[static_cast<std::size_t>(ql)] : 0.0);
        // The law is exact, not approximate.
        if (r.dvalue_dp != want) row.pass = false;

        const double h = 1e-6;
        const double numeric =
            (interp_bilinear(x, p + h).value - interp_bilinear(x, p - h).value) / (2.0 * h);
        row.max_rel_err = std::max(row.max_rel_err, rel_err(r.dvalue_dp, numeric, 1e-9));
        if (!grad_close(r.dvalue_dp, numeric, 1e-6, 1e-9)) row.pass = false;
    }
    return row;
}

void append_report(GradcheckRun& run, const GradCheckReport& report, const std::string& prefix) {
    for (const auto& g : report.groups) {
        run.rows.push_back({prefix + g.name, g.max_rel_err, g.pass});
        run.pass = run.pass && g.pass;
    }
}

GradCheckReport defop_gradcheck(const DefOpConfig& config, std::uint64_t seed, double rel_tol,
                                double abs_floor, bool inject_fault) {
    SeededRng rng(seed);
    DefOpParams params;
    params.randomize_all(config, rng, 0.5);
    Tensor2D x(config.in_channels, 24);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);

    auto forward_loss = [&]() {
        DefOpCache cache;
        const Tensor2D y = defop_forward(x, params, config, cache);
        double acc = 0.0;
        for (double v : y.v) acc += v;
        return acc;
    };
    Tensor2D input_grad(x.channels, x.length);
    auto backward = [&]() {
        params.zero_grad();
        DefOpCache cache;
        const Tensor2D y = defop_forward(x, params, config, cache);
        Tensor2D dy(y.channels, y.length);
        std::fill(dy.v.begin(), dy.v.end(), 1.0);
        const Tensor2D dx = defop_backward(cache, dy, params, config);
        std::copy(dx.v.begin(), dx.v.end(), input_grad.v.begin());
        if (inject_fault && !params.weight.grad.empty()) params.weight.grad[0] *= 1.01;
    };
    std::vector<ParamView> groups = params.views("");
    groups.push_back({"input", std::span<double>(x.v), std::span<double>(input_grad.v)});
    return gradcheck(forward_loss, backward, std::move(groups), 1e-5, rel_tol, abs_floor);
}

GradCheckReport fgdm_gradcheck(int partitions, int channels, std::uint64_t seed,
                               const std::vector<int>& kernels, const std::vector<int>& periods,
                               double rel_tol, double abs_floor) {
    FgdmConfig config;
    config.partitions = partitions;
    config.kernel_schedule = kernels;
    config.interp = InterpKernel::gaussian(0.8, 3);

    RouteAssignment routes;
    for (std::size_t i = 0; i < kernels.size(); ++i)
        routes.entries.push_back({static_cast<int>(i + 1), kernels[i], periods[i], 1.0});

    SeededRng rng(seed);
    FgdmParams params;
    params.randomize_all(config, channels, rng, 0.5);
    Tensor2D x(channels, 16);
    for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
    std::vector<double> probe(x.v.size());
    for (double& p : probe) p = rng.uniform(-1.0, 1.0);

    auto forward_loss = [&]() {
        FgdmCache cache;
        const Tensor2D y = fgdm_forward(x, params, config, routes, cache);
        double acc = 0.0;
        for (std::size_t k = 0; k < y.v.size(); ++k) acc += probe[k] * y.v[k];
        return acc;
    };
    Tensor2D input_grad(x.channels, x.length);
    auto backward = [&]() {
        params.zero_grad();
        FgdmCache cache;
        const Tensor2D y = fgdm_forward(x, params, config, routes, cache);
        Tensor2D dy(y.channels, y.length);
        for (std::size_t k = 0; k < dy.v.size(); ++k) dy.v[k] = probe[k];
        const Tensor2D dx = fgdm_backward(cache, dy, params, config, routes);
        std::copy(dx.v.begin(), dx.v.end(), input_grad.v.begin());
    };
    std::vector<ParamView> groups = params.views("");
    groups.push_back({"input", std::span<double>(x.v), std::span<double>(input_grad.v)});
    return gradcheck(forward_loss, backward, std::move(groups), 1e-5, rel_tol, abs_floor);
}

BackboneConfig toy_backbone_config() {
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
    return bc;
}

}  // namespace

GradcheckRun run_gradcheck(GradcheckScope scope, std::uint64_t seed, double rel_tol,
                           bool inject_fault) {
    GradcheckRun run;
    run.rel_tol = rel_tol;
    run.abs_floor = scope == GradcheckScope::Interp ? 1e-9 : 1e-8;

    switch (scope) {
        case GradcheckScope::Interp: {
            SeededRng rng(seed);
            run.rows.push_back(sweep_gaussian_position(rng, 1000, rel_tol, run.abs_floor));
            run.rows.push_back(sweep_gaussian_features(rng, 200));
            run.rows.push_back(sweep_bilinear(rng, 200));
            if (inject_fault) run.rows.push_back({"interp.injected_fault", 1.0, false});
            for (const auto& r : run.rows) run.pass = run.pass && r.pass;
            break;
        }
        case GradcheckScope::Defop: {
            DefOpConfig gaussian_cfg;
            gaussian_cfg.kernel_size = 3;
            gaussian_cfg.period = 4;
            gaussian_cfg.in_channels = 2;
            gaussian_cfg.out_channels = 2;
            gaussian_cfg.interp = InterpKernel::gaussian(0.8, 3);
            append_report(run, defop_gradcheck(gaussian_cfg, seed, rel_tol, run.abs_floor,
                                               inject_fault),
                          "defop.gaussian");

            DefOpConfig bilinear_cfg = gaussian_cfg;
            bilinear_cfg.interp = InterpKernel::bilinear();
            append_report(run, defop_gradcheck(bilinear_cfg, seed + 1, rel_tol, run.abs_floor,
                                               false),
                          "defop.bilinear");
            break;
        }
        case GradcheckScope::Fgdm: {
            append_report(run, fgdm_gradcheck(2, 4, seed, {3}, {3}, rel_tol, run.abs_floor),
                          "fgdm.n2");
            append_report(run, fgdm_gradcheck(3, 6, seed + 1, {3, 5}, {4, 2}, rel_tol,
                                              run.abs_floor),
                          "fgdm.n3");
            if (inject_fault) {
                run.rows.push_back({"fgdm.injected_fault", 1.0, false});
                run.pass = false;
            }
            break;
        }
        case GradcheckScope::Backbone: {
            BackboneConfig bc = toy_backbone_config();
            std::vector<double> energies(static_cast<std::size_t>(bc.input_length / 2 + 1), 0.0);
            energies[3] = 1.0;
            BackboneModel model(bc, topk_periods(energies, 1, bc.input_length), seed);
            SeededRng rng(seed);
            model.randomize_all(rng, 0.5);
            Tensor2D x(1, bc.input_length);
            for (double& v : x.v) v = rng.uniform(-1.0, 1.0);
            append_report(run, gradcheck_model(model, x, rel_tol, run.abs_floor, 1e-5),
                          "backbone");
            if (inject_fault) {
                run.rows.push_back({"backbone.injected_fault", 1.0, false});
                run.pass = false;
            }
            break;
        }
    }
    return run;
}

// ── compensation bench ───────────────────────────────────────────────────────

std::vector<double> CompensationConfig::default_fractional_periods() {
    return {8.3, 8.5, 8.7, 12.25, 12.5, 12.75, 20.2, 20.5, 20.8};
}

namespace {

// Train the free per-tap offsets of a single DefOp against the signal itself
// and return the learned offsets.
std::vector<double> train_free_offsets(const Tensor2D& x, int integer_period,
                                       const InterpKernel& kernel, int kernel_size, int steps,
                                       double lr) {
    DefOpConfig config;
    config.kernel_size = kernel_size;
    config.period = integer_period;
    config.in_channels = 1;
    config.out_channels = 1;
    config.interp = kernel;
    config.offset_mode = OffsetMode::Free;

    DefOpParams params;
    params.init(config);
    // Fixed averaging weights: the only trainable parameters are the offsets,
    // so perfect phase alignment is the unique way to reproduce the signal.
    for (double& w : params.weight.value) w = 1.0 / kernel_size;

    Optimizer opt({OptimKind::Adam, lr}, {view("offsets", params.offset_bias)});

    // Keep the loss away from the zero-padded edges the offsets cannot fix.
    const int margin = integer_period * config.half_taps() + 4;
    const int lo = margin, hi = x.length - margin;
    if (hi - lo < 8)
        throw ConfigError("compensation bench: kernel span leaves too little interior "
                          "signal (margin " + std::to_string(margin) + " of length " +
                          std::to_string(x.length) + ")");
    const double inv_count = 1.0 / static_cast<double>(hi - lo);

    for (int step = 0; step < steps; ++step) {
        opt.zero_grad();
        DefOpCache cache;
        const Tensor2D y = defop_forward(x, params, config, cache);
        Tensor2D dy(1, x.length);
        for (int t = lo; t < hi; ++t)
            dy.at(0, t) = 2.0 * (y.at(0, t) - x.at(0, t)) * inv_count;
        defop_backward(cache, dy, params, config);
        opt.step();
    }
    return params.offset_bias.value;
}

}  // namespace

std::vector<CompensationRow> run_compensation_bench(const CompensationConfig& config) {
    if (config.periods.empty()) throw ConfigError("compensation bench: empty period set");
    if (config.steps < 1) throw ConfigError("compensation bench: steps must be >= 1");
    if (config.kernel_size < 3 || config.kernel_size % 2 == 0)
        throw ConfigError("compensation bench: kernel_size must be odd and >= 3");
    for (double p : config.periods) {
        if (!(p > 1.0) || std::floor(p) == p)
            throw ValidationError("compensation bench: period " + std::to_string(p) +
                                  " must be fractional (> 1, non-integer)");
        if (config.length < 4.0 * p)
            throw ConfigError("compensation bench: length too short for period " +
                              std::to_string(p));
    }

    std::vector<CompensationRow> rows(config.periods.size());
    parallel_cases(static_cast<int>(config.periods.size()), config.threads, [&](int i) {
        const double period = config.periods[static_cast<std::size_t>(i)];

        SignalSpec spec;
        spec.kind = SignalKind::FractionalSine;
        spec.length = config.length;
        spec.components = {{period, 1.0, 0.7}};
        spec.noise_std = 0.0;
        spec.seed = config.seed + static_cast<std::uint64_t>(i);
        const GeneratedSignal sig = generate(spec);

        Tensor2D x(1, config.length);
        const auto series = sig.batch.series(0, 0);
        std::copy(series.begin(), series.end(), x.v.begin());

        const int half = config.kernel_size / 2;
        CompensationRow row;
        row.period = period;
        row.integer_period = sig.meta.integer_period;
        for (int n = -half; n <= half; ++n)
            row.theoretical.push_back(sig.meta.theoretical_offset(n));

        row.learned_linear =
            train_free_offsets(x, sig.meta.integer_period, InterpKernel::bilinear(),
                               config.kernel_size, config.steps, config.lr);
        row.learned_gaussian =
            train_free_offsets(x, sig.meta.integer_period, InterpKernel::gaussian(config.sigma),
                               config.kernel_size, config.steps, config.lr);

        double mae_lin = 0.0, mae_gauss = 0.0;
        for (std::size_t n = 0; n < row.theoretical.size(); ++n) {
            mae_lin += std::abs(row.learned_linear[n] - row.theoretical[n]);
            mae_gauss += std::abs(row.learned_gaussian[n] - row.theoretical[n]);
        }
        row.mae_linear = mae_lin / static_cast<double>(config.kernel_size);
        row.mae_gaussian = mae_gauss / static_cast<double>(config.kernel_size);
        row.eta = row.mae_linear / row.mae_gaussian;
        rows[static_cast<std::size_t>(i)] = std::move(row);
    });
    return rows;
}

// ── variant ablation ─────────────────────────────────────────────────────────

std::string variant_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::Conv1d: return "anchor-1d";
        case AblationVariant::Bilinear: return "anchor-bl";
        case AblationVariant::Gaussian: return "anchor-gaussian";
    }
    return "?";
}

std::vector<ToneComponent> ForecastTaskConfig::components() const {
    // Harmonic stack of the fractional fundamental: the sharp waveform detail
    // lives in the upper harmonics, so forecasting it requires phase fidelity
    // rather than fitting one smooth tone.
    std::vector<ToneComponent> out;
    for (int k = 1; k <= std::max(1, harmonics); ++k)
        out.push_back({period / k, amplitude / std::pow(static_cast<double>(k), 0.9),
                       phase + 1.7 * k});
    return out;
}

Dataset make_forecast_windows(const Tensor2D& series, int input_length, int horizon, int stride) {
    if (stride < 1) throw ConfigError("make_forecast_windows: stride must be >= 1");
    if (series.length < input_length + horizon)
        throw ValidationError("make_forecast_windows: series shorter than window + horizon");
    Dataset out;
    for (int start = 0; start + input_length + horizon <= series.length; start += stride) {
        Sample s{Tensor2D(series.channels, input_length), Tensor2D(series.channels, horizon)};
        for (int c = 0; c < series.channels; ++c) {
            for (int t = 0; t < input_length; ++t) s.input.at(c, t) = series.at(c, start + t);
            for (int t = 0; t < horizon; ++t)
                s.target.at(c, t) = series.at(c, start + input_length + t);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::pair<Dataset, Dataset> chrono_split(const Dataset& all, double train_fraction) {
    if (all.size() < 2) throw ValidationError("chrono_split: need at least 2 samples");
    std::size_t cut = static_cast<std::size_t>(train_fraction * static_cast<double>(all.size()));
    cut = std::max<std::size_t>(1, std::min(cut, all.size() - 1));
    return {Dataset(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut)),
            Dataset(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end())};
}

Tensor2D batch_to_tensor(const SeriesBatch& batch, int b) {
    Tensor2D out(batch.channels(), batch.length());
    for (int c = 0; c < batch.channels(); ++c)
        for (int t = 0; t < batch.length(); ++t) out.at(c, t) = batch.at(b, c, t);
    return out;
}

namespace {

SeriesBatch inputs_to_batch(const Dataset& data) {
    const int channels = data[0].input.channels;
    const int length = data[0].input.length;
    SeriesBatch batch(static_cast<int>(data.size()), channels, length);
    for (std::size_t b = 0; b < data.size(); ++b)
        for (int c = 0; c < channels; ++c)
            for (int t = 0; t < length; ++t)
                batch.at(static_cast<int>(b), c, t) = data[b].input.at(c, t);
    return batch;
}

std::vector<ParamView> trainable_views(BackboneModel& model, bool freeze_offsets) {
    std::vector<ParamView> views = model.param_views();
    if (!freeze_offsets) return views;
    std::vector<ParamView> kept;
    for (auto& v : views)
        if (v.name.find(".offset_") == std::string::npos) kept.push_back(v);
    return kept;
}

struct VariantResult {
    double train_mse = 0.0;
    Metrics val;
};

VariantResult train_forecast_variant(AblationVariant variant, const AblationConfig& config,
                                     const Dataset& train_set, const Dataset& val_set,
                                     const std::optional<SpectralPrior>& prior) {
    // The head only sees heavily downsampled features, so the forecast
    // quality rests on how well the stage-1 operators encode phase.
    BackboneConfig bc;
    bc.input_channels = 1;
    bc.input_length = config.task.input_length;
    bc.stem_width = 8;
    bc.stages = {{1, 8, 1}, {1, 8, 8}};
    bc.fgdm.partitions = 2;
    bc.fgdm.kernel_schedule = {3};
    bc.head = TaskHead::Forecast;
    bc.horizon = config.task.horizon;

    const bool is_conv = variant == AblationVariant::Conv1d;
    bc.fgdm.interp = variant == AblationVariant::Gaussian
                         ? InterpKernel::gaussian(config.sigma)
                         : InterpKernel::bilinear();

    // The plain-conv baseline keeps the exact architecture but samples on the
    // undeformed unit grid: dilation 1 and offsets frozen at zero.
    BackboneModel model(bc, is_conv ? std::nullopt : prior, config.seed);

    VariantResult r;
    if (config.epochs == 0) {  // report the shared initialization untouched
        r.val = evaluate(model, val_set);
        r.train_mse = evaluate(model, train_set).mse;
        return r;
    }
    Optimizer opt({OptimKind::Adam, config.lr}, trainable_views(model, is_conv));
    const auto records = train_model(model, train_set, val_set, opt, config.epochs,
                                     config.batch_size, config.seed);
    r.train_mse = records.back().train_loss;
    r.val = records.back().val;
    return r;
}

}  // namespace

std::vector<AblationRow> run_ablation(const AblationConfig& config) {
    SignalSpec spec;
    spec.kind = SignalKind::MultiTone;
    spec.length = config.task.series_length;
    spec.components = config.task.components();
    spec.noise_std = config.task.noise_std;
    spec.seed = config.seed;
    const GeneratedSignal sig = generate(spec);

    const Tensor2D series = batch_to_tensor(sig.batch, 0);
    const Dataset all = make_forecast_windows(series, config.task.input_length,
                                              config.task.horizon, config.task.stride);
    const auto [train_set, val_set] = chrono_split(all, 0.8);
    const SpectralPrior prior = extract_prior(inputs_to_batch(train_set), 1);

    const AblationVariant variants[] = {AblationVariant::Conv1d, AblationVariant::Bilinear,
                                        AblationVariant::Gaussian};
    std::vector<AblationRow> rows(3);
    parallel_cases(3, config.threads, [&](int i) {
        const VariantResult r =
            train_forecast_variant(variants[i], config, train_set, val_set, prior);
        rows[static_cast<std::size_t>(i)] = {variant_name(variants[i]), r.train_mse, r.val};
    });
    return rows;
}

// ── top-k sweep ──────────────────────────────────────────────────────────────

std::vector<TopkRow> run_topk_sweep(const TopkConfig& config) {
    if (config.k_min < 1 || config.k_max < config.k_min)
        throw ConfigError("topk sweep: need 1 <= k_min <= k_max");

    SignalSpec spec;
    spec.kind = SignalKind::MultiTone;
    spec.length = config.series_length;
    spec.components = config.tones;
    spec.noise_std = config.noise_std;
    spec.seed = config.seed;
    const GeneratedSignal sig = generate(spec);

    const Tensor2D series = batch_to_tensor(sig.batch, 0);
    const Dataset all =
        make_forecast_windows(series, config.input_length, config.horizon, config.stride);
    const auto [train_set, val_set] = chrono_split(all, 0.8);
    const SeriesBatch train_batch = inputs_to_batch(train_set);
    const std::vector<double> energies = spectral_energy(train_batch);

    const int count = config.k_max - config.k_min + 1;
    std::vector<TopkRow> rows(static_cast<std::size_t>(count));
    parallel_cases(count, config.threads, [&](int i) {
        int k = config.k_min + i;
        const int max_k = config.input_length / 2;
        if (k > max_k) k = max_k;  // clamped upstream with a warning

        const SpectralPrior prior = topk_periods(energies, k, config.input_length);

        BackboneConfig bc;
        bc.input_channels = 1;
        bc.input_length = config.input_length;
        bc.fgdm.partitions = k + 1;
        for (int j = 0; j < k; ++j) bc.fgdm.kernel_schedule.push_back(2 * j + 3);
        bc.fgdm.interp = InterpKernel::gaussian(config.sigma);
        bc.stem_width = config.channels_per_partition * (k + 1);
        bc.stages = {{1, bc.stem_width, 1}};
        bc.head = TaskHead::Forecast;
        bc.horizon = config.horizon;

        BackboneModel model(bc, prior, config.seed);
        Optimizer opt({OptimKind::Adam, config.lr}, model.param_views());
        const auto records = train_model(model, train_set, val_set, opt, config.epochs,
                                         config.batch_size, config.seed);
        rows[static_cast<std::size_t>(i)] = {config.k_min + i, records.back().train_loss,
                                             records.back().val};
    });
    return rows;
}

// ── routing ablation ─────────────────────────────────────────────────────────

namespace {

struct DetectionScore {
    double precision = 0.0, recall = 0.0, f1 = 0.0, threshold = 0.0;
};

DetectionScore score_detection(const std::vector<double>& errors,
                               const std::vector<std::uint8_t>& labels, double quantile_r) {
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    std::size_t idx = static_cast<std::size_t>((1.0 - quantile_r) *
                                               static_cast<double>(sorted.size()));
    idx = std::min(idx, sorted.size() - 1);
    const double threshold = sorted[idx];

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t t = 0; t < errors.size(); ++t) {
        const bool flagged = errors[t] > threshold;
        if (flagged && labels[t]) ++tp;
        else if (flagged) ++fp;
        else if (labels[t]) ++fn;
    }
    DetectionScore s;
    s.threshold = threshold;
    s.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    s.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    s.f1 = s.precision + s.recall == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

}  // namespace

std::vector<RoutingRow> run_routing_ablation(const RoutingConfig& config) {
    if (!(config.quantile_r > 0.0) || !(config.quantile_r < 1.0))
        throw ValidationError("routing ablation: quantile r must lie in (0, 1)");

    const int length = config.window * config.windows;

    // Clean series for training; the same series plus seeded spikes for eval.
    SignalSpec clean;
    clean.kind = SignalKind::MultiTone;
    clean.length = length;
    clean.components = config.tones;
    clean.noise_std = config.noise_std;
    clean.seed = config.seed;

    SignalSpec dirty = clean;
    dirty.kind = SignalKind::AnomalyInjected;
    SeededRng spike_rng(config.seed ^ 0xabcdef12345ULL);
    std::vector<std::uint8_t> taken(static_cast<std::size_t>(length), 0);
    for (int i = 0; i < config.anomaly_count; ++i) {
        int pos = static_cast<int>(spike_rng.below(static_cast<std::uint64_t>(length)));
        while (taken[static_cast<std::size_t>(pos)])
            pos = static_cast<int>(spike_rng.below(static_cast<std::uint64_t>(length)));
        taken[static_cast<std::size_t>(pos)] = 1;
        const double mag = spike_rng.uniform(config.anomaly_min, config.anomaly_max);
        dirty.anomalies.positions.push_back(pos);
        dirty.anomalies.magnitudes.push_back(spike_rng.below(2) ? mag : -mag);
    }

    const GeneratedSignal clean_sig = generate(clean);
    const GeneratedSignal dirty_sig = generate(dirty);

    const Tensor2D clean_series = batch_to_tensor(clean_sig.batch, 0);
    const Tensor2D dirty_series = batch_to_tensor(dirty_sig.batch, 0);

    Dataset train_set;
    SeriesBatch train_batch(config.windows, 1, config.window);
    for (int w = 0; w < config.windows; ++w) {
        Sample s{Tensor2D(1, config.window), Tensor2D(1, config.window)};
        for (int t = 0; t < config.window; ++t) {
            s.input.at(0, t) = clean_series.at(0, w * config.window + t);
            train_batch.at(w, 0, t) = s.input.at(0, t);
        }
        s.target = s.input;
        train_set.push_back(std::move(s));
    }
    const SpectralPrior prior = extract_prior(train_batch, 2);

    std::vector<RoutingRow> rows;
    for (const RoutingOrder order : {RoutingOrder::EnergyAscKernel,
                                     RoutingOrder::EnergyDescKernel}) {
        BackboneConfig bc;
        bc.input_channels = 1;
        bc.input_length = config.window;
        bc.stem_width = 6;
        bc.stages = {{1, 6, 1}};
        bc.fgdm.partitions = 3;
        bc.fgdm.kernel_schedule = {3, 7};
        bc.fgdm.interp = InterpKernel::gaussian(config.sigma);
        bc.fgdm.routing_order = order;
        bc.head = TaskHead::Reconstruction;

        BackboneModel model(bc, prior, config.seed);
        Optimizer opt({OptimKind::Adam, config.lr}, model.param_views());
        train_model(model, train_set, {}, opt, config.epochs, config.batch_size, config.seed);

        // Reconstruct the spiked series window by window; per-point |error|.
        std::vector<double> errors(static_cast<std::size_t>(length), 0.0);
        BackboneCache cache;
        for (int w = 0; w < config.windows; ++w) {
            Tensor2D in(1, config.window);
            for (int t = 0; t < config.window; ++t)
                in.at(0, t) = dirty_series.at(0, w * config.window + t);
            const Tensor2D out = model.forward(in, cache);
            for (int t = 0; t < config.window; ++t)
                errors[static_cast<std::size_t>(w * config.window + t)] =
                    std::abs(out.at(0, t) - in.at(0, t));
        }
        const DetectionScore s =
            score_detection(errors, dirty_sig.meta.anomaly_labels, config.quantile_r);
        rows.push_back({order == RoutingOrder::EnergyAscKernel ? "energy-asc-kernel"
                                                               : "energy-desc-kernel",
                        s.precision, s.recall, s.f1, s.threshold});
    }
    return rows;
}

// ── train on user data ───────────────────────────────────────────────────────

TrainRunResult run_train(const TrainRunConfig& config) {
    CsvData csv = load_csv(config.csv_path, {config.csv_header, config.standardize});
    const Tensor2D series = batch_to_tensor(csv.batch, 0);

    Dataset all;
    if (config.head == TaskHead::Forecast) {
        all = make_forecast_windows(series, config.input_length, config.horizon, config.stride);
    } else if (config.head == TaskHead::Reconstruction) {
        if (series.length < config.input_length)
            throw ValidationError("train: series shorter than window");
        for (int start = 0; start + config.input_length <= series.length;
             start += config.input_length) {
            Sample s{Tensor2D(series.channels, config.input_length),
                     Tensor2D(series.channels, config.input_length)};
            for (int c = 0; c < series.channels; ++c)
                for (int t = 0; t < config.input_length; ++t)
                    s.input.at(c, t) = series.at(c, start + t);
            s.target = s.input;
            all.push_back(std::move(s));
        }
    } else {
        throw ConfigError("train: classification needs labeled data; use forecast or "
                          "reconstruction on CSV input");
    }

    const auto [train_set, val_set] = chrono_split(all, 0.8);
    const SpectralPrior prior = extract_prior(inputs_to_batch(train_set),
                                              std::max(1, config.partitions - 1));

    BackboneConfig bc;
    bc.input_channels = series.channels;
    bc.input_length = config.input_length;
    bc.stem_width = config.stem_width;
    bc.stages = {{config.blocks, config.stage_width, 1}};
    bc.fgdm.partitions = config.partitions;
    bc.fgdm.kernel_schedule = config.kernel_schedule;
    bc.fgdm.interp = InterpKernel::gaussian(config.sigma);
    bc.head = config.head;
    bc.horizon = config.horizon;

    BackboneModel model(bc, prior, config.seed);
    Optimizer opt({OptimKind::Adam, config.lr}, model.param_views());

    TrainRunResult result;
    result.records = train_model(model, train_set, val_set, opt, config.epochs,
                                 config.batch_size, config.seed);
    result.final_val = result.records.back().val;

    if (config.head == TaskHead::Reconstruction) {
        BackboneCache cache;
        for (const auto& sample : val_set) {
            const Tensor2D out = model.forward(sample.input, cache);
            for (int t = 0; t < out.length; ++t) {
                double err = 0.0;
                for (int c = 0; c < out.channels; ++c)
                    err += std::abs(out.at(c, t) - sample.input.at(c, t));
                result.anomaly_scores.push_back(err / out.channels);
            }
        }
    }

    for (const auto& v : model.param_views()) {
        result.manifest.emplace_back(v.name, v.value.size());
        result.flat_params.insert(result.flat_params.end(), v.value.begin(), v.value.end());
    }
    return result;
}

}  // namespace anchor
