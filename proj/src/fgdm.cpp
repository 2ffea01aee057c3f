#include "anchor/fgdm.hpp"

#include <cmath>
#include <string>

namespace anchor {

void FgdmConfig::validate(int channels) const {
    if (partitions < 2)
        throw ConfigError("FgdmConfig: partitions must be >= 2, got " +
                          std::to_string(partitions));
    if (channels % partitions != 0)
        throw ConfigError("FgdmConfig: channel count " + std::to_string(channels) +
                          " not divisible by partitions " + std::to_string(partitions));
    if (static_cast<int>(kernel_schedule.size()) != partitions - 1)
        throw ConfigError("FgdmConfig: kernel_schedule needs exactly N-1 = " +
                          std::to_string(partitions - 1) + " entries, got " +
                          std::to_string(kernel_schedule.size()));
    int prev = 0;
    for (int k : kernel_schedule) {
        if (k < 1 || k % 2 == 0)
            throw ConfigError("FgdmConfig: kernel sizes must be odd and >= 1");
        if (k <= prev) throw ConfigError("FgdmConfig: kernel_schedule must be strictly increasing");
        prev = k;
    }
    interp.validate();
}

// ── PointwiseConv ────────────────────────────────────────────────────────────

void PointwiseConv::init(int in_ch, int out_ch) {
    if (in_ch < 1 || out_ch < 1) throw ConfigError("PointwiseConv: channel counts must be >= 1");
    in_channels = in_ch;
    out_channels = out_ch;
    weight.resize(static_cast<std::size_t>(out_ch) * in_ch);
    bias.resize(static_cast<std::size_t>(out_ch));
}

void PointwiseConv::default_init(int in_ch, int out_ch, SeededRng& rng) {
    init(in_ch, out_ch);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_ch));
    for (double& w : weight.value) w = rng.uniform(-scale, scale);
}

void PointwiseConv::randomize_all(int in_ch, int out_ch, SeededRng& rng, double scale) {
    init(in_ch, out_ch);
    for (double& w : weight.value) w = rng.uniform(-scale, scale);
    for (double& b : bias.value) b = rng.uniform(-scale, scale);
}

Tensor2D PointwiseConv::forward(const Tensor2D& x) const {
    if (x.channels != in_channels)
        throw ConfigError("PointwiseConv: input has " + std::to_string(x.channels) +
                          " channels, expected " + std::to_string(in_channels));
    Tensor2D y(out_channels, x.length);
    for (int o = 0; o < out_channels; ++o) {
        for (int t = 0; t < x.length; ++t) {
            double acc = bias.value[o];
            for (int c = 0; c < in_channels; ++c)
                acc += weight.value[static_cast<std::size_t>(o) * in_channels + c] * x.at(c, t);
            y.at(o, t) = acc;
        }
    }
    return y;
}

Tensor2D PointwiseConv::backward(const Tensor2D& x, const Tensor2D& dy) {
    if (dy.channels != out_channels || dy.length != x.length)
        throw ConfigError("PointwiseConv::backward: shape mismatch");
    Tensor2D dx(in_channels, x.length);
    for (int o = 0; o < out_channels; ++o) {
        for (int t = 0; t < x.length; ++t) {
            const double g = dy.at(o, t);
            bias.grad[o] += g;
            for (int c = 0; c < in_channels; ++c) {
                weight.grad[static_cast<std::size_t>(o) * in_channels + c] += g * x.at(c, t);
                dx.at(c, t) += g * weight.value[static_cast<std::size_t>(o) * in_channels + c];
            }
        }
    }
    return dx;
}

void PointwiseConv::zero_grad() {
    weight.zero_grad();
    bias.zero_grad();
}

// ── FgdmParams ───────────────────────────────────────────────────────────────

namespace {

DefOpConfig stage_defop_config(const FgdmConfig& config, int channels, int stage, int period) {
    const int sub = channels / config.partitions;
    DefOpConfig dc;
    dc.kernel_size = config.kernel_schedule[static_cast<std::size_t>(stage - 1)];
    dc.period = period;
    dc.in_channels = stage * sub;
    dc.out_channels = stage * sub;
    dc.interp = config.interp;
    dc.offset_mode = OffsetMode::Predicted;
    return dc;
}

}  // namespace

void FgdmParams::init(const FgdmConfig& config, int channels) {
    config.validate(channels);
    const int sub = channels / config.partitions;
    stages.assign(static_cast<std::size_t>(config.partitions - 1), {});
    for (int i = 1; i < config.partitions; ++i) {
        FgdmStageParams& s = stages[static_cast<std::size_t>(i - 1)];
        s.defop.init(stage_defop_config(config, channels, i, 1));
        s.phi_c.init(sub, i * sub);
        s.phi_v.init(i * sub, i * sub);
        s.phi_f.init(2 * i * sub, (i + 1) * sub);
    }
}

void FgdmParams::default_init(const FgdmConfig& config, int channels, SeededRng& rng) {
    config.validate(channels);
    const int sub = channels / config.partitions;
    stages.assign(static_cast<std::size_t>(config.partitions - 1), {});
    for (int i = 1; i < config.partitions; ++i) {
        FgdmStageParams& s = stages[static_cast<std::size_t>(i - 1)];
        s.defop.default_init(stage_defop_config(config, channels, i, 1), rng);
        s.phi_c.default_init(sub, i * sub, rng);
        s.phi_v.default_init(i * sub, i * sub, rng);
        // Fusion layer starts at zero so a residual block opens as identity.
        s.phi_f.init(2 * i * sub, (i + 1) * sub);
    }
}

void FgdmParams::randomize_all(const FgdmConfig& config, int channels, SeededRng& rng,
                               double scale) {
    config.validate(channels);
    const int sub = channels / config.partitions;
    stages.assign(static_cast<std::size_t>(config.partitions - 1), {});
    for (int i = 1; i < config.partitions; ++i) {
        FgdmStageParams& s = stages[static_cast<std::size_t>(i - 1)];
        s.defop.randomize_all(stage_defop_config(config, channels, i, 1), rng, scale);
        s.phi_c.randomize_all(sub, i * sub, rng, scale);
        s.phi_v.randomize_all(i * sub, i * sub, rng, scale);
        s.phi_f.randomize_all(2 * i * sub, (i + 1) * sub, rng, scale);
    }
}

void FgdmParams::zero_grad() {
    for (auto& s : stages) {
        s.defop.zero_grad();
        s.phi_c.zero_grad();
        s.phi_v.zero_grad();
        s.phi_f.zero_grad();
    }
}

std::vector<ParamView> FgdmParams::views(const std::string& prefix) {
    std::vector<ParamView> out;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const std::string p = prefix + ".stage" + std::to_string(i + 1);
        for (auto& v : stages[i].defop.views(p + ".defop")) out.push_back(v);
        out.push_back(view(p + ".phi_c.weight", stages[i].phi_c.weight));
        out.push_back(view(p + ".phi_c.bias", stages[i].phi_c.bias));
        out.push_back(view(p + ".phi_v.weight", stages[i].phi_v.weight));
        out.push_back(view(p + ".phi_v.bias", stages[i].phi_v.bias));
        out.push_back(view(p + ".phi_f.weight", stages[i].phi_f.weight));
        out.push_back(view(p + ".phi_f.bias", stages[i].phi_f.bias));
    }
    return out;
}

std::size_t FgdmParams::param_count() const {
    std::size_t n = 0;
    for (const auto& s : stages) {
        n += s.defop.weight.size() + s.defop.bias.size() + s.defop.offset_weight.size() +
             s.defop.offset_bias.size();
        n += s.phi_c.weight.size() + s.phi_c.bias.size();
        n += s.phi_v.weight.size() + s.phi_v.bias.size();
        n += s.phi_f.weight.size() + s.phi_f.bias.size();
    }
    return n;
}

// ── Split / concat ───────────────────────────────────────────────────────────

std::vector<Tensor2D> channel_split(const Tensor2D& x, int n) {
    if (n < 2) throw ConfigError("channel_split: partitions must be >= 2");
    if (x.channels % n != 0)
        throw ConfigError("channel_split: " + std::to_string(x.channels) +
                          " channels not divisible by " + std::to_string(n));
    const int sub = x.channels / n;
    std::vector<Tensor2D> parts;
    parts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Tensor2D p(sub, x.length);
        for (int c = 0; c < sub; ++c)
            for (int t = 0; t < x.length; ++t) p.at(c, t) = x.at(i * sub + c, t);
        parts.push_back(std::move(p));
    }
    return parts;
}

Tensor2D channel_concat(const std::vector<Tensor2D>& parts) {
    if (parts.empty()) throw ConfigError("channel_concat: no parts");
    int total = 0;
    for (const auto& p : parts) {
        if (p.length != parts[0].length) throw ConfigError("channel_concat: length mismatch");
        total += p.channels;
    }
    Tensor2D out(total, parts[0].length);
    int base = 0;
    for (const auto& p : parts) {
        for (int c = 0; c < p.channels; ++c)
            for (int t = 0; t < p.length; ++t) out.at(base + c, t) = p.at(c, t);
        base += p.channels;
    }
    return out;
}

// ── Routing ──────────────────────────────────────────────────────────────────

RouteAssignment assign_routes(const SpectralPrior& prior, const FgdmConfig& config) {
    const int stages = config.partitions - 1;
    if (prior.periods.empty())
        throw ValidationError("assign_routes: prior carries no periods");

    RouteAssignment out;
    out.cycled = static_cast<int>(prior.periods.size()) < stages;

    // Energy-descending period list, cycled to stage count, then reversed for
    // the EnergyDescKernel pairing.
    std::vector<std::size_t> ranks(static_cast<std::size_t>(stages));
    for (int i = 0; i < stages; ++i)
        ranks[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i) % prior.periods.size();
    if (config.routing_order == RoutingOrder::EnergyDescKernel)
        std::reverse(ranks.begin(), ranks.end());

    out.entries.reserve(static_cast<std::size_t>(stages));
    for (int i = 1; i <= stages; ++i) {
        const std::size_t r = ranks[static_cast<std::size_t>(i - 1)];
        RouteAssignment::Entry e;
        e.stage = i;
        e.kernel = config.kernel_schedule[static_cast<std::size_t>(i - 1)];
        e.period = prior.periods[r];
        e.energy = prior.energies[static_cast<std::size_t>(prior.top_freqs[r])];
        out.entries.push_back(e);
    }
    return out;
}

RouteAssignment no_periodicity_routes(const FgdmConfig& config) {
    RouteAssignment out;
    out.no_periodicity = true;
    for (int i = 1; i < config.partitions; ++i) {
        RouteAssignment::Entry e;
        e.stage = i;
        e.kernel = config.kernel_schedule[static_cast<std::size_t>(i - 1)];
        e.period = 1;  // standard dilation fallback
        e.energy = 0.0;
        out.entries.push_back(e);
    }
    return out;
}

// ── Cascade forward / backward ───────────────────────────────────────────────

namespace {

void check_routes(const RouteAssignment& routes, const FgdmConfig& config) {
    if (static_cast<int>(routes.entries.size()) != config.partitions - 1)
        throw ConfigError("fgdm: routes have " + std::to_string(routes.entries.size()) +
                          " entries, config has " + std::to_string(config.partitions - 1) +
                          " stages");
}

void check_width(const Tensor2D& t, int want, const char* what) {
    if (t.channels != want)
        throw std::logic_error(std::string("fgdm: width invariant violated at ") + what +
                               ": have " + std::to_string(t.channels) + ", want " +
                               std::to_string(want));
}

}  // namespace

Tensor2D fgdm_forward(const Tensor2D& x, FgdmParams& params, const FgdmConfig& config,
                      const RouteAssignment& routes, FgdmCache& cache) {
    config.validate(x.channels);
    check_routes(routes, config);
    if (static_cast<int>(params.stages.size()) != config.partitions - 1)
        throw ConfigError("fgdm_forward: params not initialized for this config");

    const int sub = x.channels / config.partitions;
    std::vector<Tensor2D> parts = channel_split(x, config.partitions);
    cache.stages.assign(static_cast<std::size_t>(config.partitions - 1), {});

    Tensor2D y = parts[0];  // y_0 = x_0
    for (int i = 1; i < config.partitions; ++i) {
        FgdmStageCache& sc = cache.stages[static_cast<std::size_t>(i - 1)];
        FgdmStageParams& sp = params.stages[static_cast<std::size_t>(i - 1)];
        const DefOpConfig dc =
            stage_defop_config(config, x.channels, i, routes.entries[static_cast<std::size_t>(i - 1)].period);

        check_width(y, i * sub, "stage input");
        sc.x_static = parts[static_cast<std::size_t>(i)];
        sc.y_prev = y;

        sc.d = defop_forward(y, sp.defop, dc, sc.defop);
        Tensor2D left = sp.phi_c.forward(sc.x_static);
        for (std::size_t k = 0; k < left.v.size(); ++k) left.v[k] += sc.d.v[k];

        sc.g = sp.phi_v.forward(y);
        Tensor2D right(sc.d.channels, sc.d.length);
        for (std::size_t k = 0; k < right.v.size(); ++k) right.v[k] = sc.d.v[k] * sc.g.v[k];

        sc.cat = channel_concat({left, right});
        y = sp.phi_f.forward(sc.cat);
        check_width(y, (i + 1) * sub, "stage output");
    }
    check_width(y, x.channels, "module output");
    return y;
}

Tensor2D fgdm_backward(const FgdmCache& cache, const Tensor2D& dy, FgdmParams& params,
                       const FgdmConfig& config, const RouteAssignment& routes) {
    check_routes(routes, config);
    if (cache.stages.size() != params.stages.size())
        throw std::logic_error("fgdm_backward: cache does not match params");

    const int n = config.partitions;
    std::vector<Tensor2D> dparts(static_cast<std::size_t>(n));

    Tensor2D grad = dy;
    for (int i = n - 1; i >= 1; --i) {
        const FgdmStageCache& sc = cache.stages[static_cast<std::size_t>(i - 1)];
        FgdmStageParams& sp = params.stages[static_cast<std::size_t>(i - 1)];
        const DefOpConfig dc = stage_defop_config(
            config, n * sc.x_static.channels, i,
            routes.entries[static_cast<std::size_t>(i - 1)].period);

        const Tensor2D dcat = sp.phi_f.backward(sc.cat, grad);

        const int half = sc.d.channels;
        Tensor2D dleft(half, dcat.length), dright(half, dcat.length);
        for (int c = 0; c < half; ++c)
            for (int t = 0; t < dcat.length; ++t) {
                dleft.at(c, t) = dcat.at(c, t);
                dright.at(c, t) = dcat.at(half + c, t);
            }

        // d is shared by both branches: dd = dleft + dright ⊙ g.
        Tensor2D dd(half, dcat.length);
        Tensor2D dg(half, dcat.length);
        for (std::size_t k = 0; k < dd.v.size(); ++k) {
            dd.v[k] = dleft.v[k] + dright.v[k] * sc.g.v[k];
            dg.v[k] = dright.v[k] * sc.d.v[k];
        }

        dparts[static_cast<std::size_t>(i)] = sp.phi_c.backward(sc.x_static, dleft);
        Tensor2D dy_prev = sp.phi_v.backward(sc.y_prev, dg);
        const Tensor2D dy_defop = defop_backward(sc.defop, dd, sp.defop, dc);
        for (std::size_t k = 0; k < dy_prev.v.size(); ++k) dy_prev.v[k] += dy_defop.v[k];

        grad = std::move(dy_prev);
    }
    dparts[0] = std::move(grad);
    return channel_concat(dparts);
}

// ── Cost model ───────────────────────────────────────────────────────────────

CostModel cost_model(int channels, int length, int partitions,
                     const std::vector<int>& kernel_schedule) {
    if (partitions < 2) throw ConfigError("cost_model: partitions must be >= 2");
    if (channels < 1 || length < 2) throw ConfigError("cost_model: invalid dims");
    if (static_cast<int>(kernel_schedule.size()) != partitions - 1)
        throw ConfigError("cost_model: kernel_schedule needs N-1 entries");

    double sum_k = 0.0;
    double sum_i2k = 0.0;
    for (std::size_t j = 0; j < kernel_schedule.size(); ++j) {
        const double i = static_cast<double>(j + 1);
        sum_k += kernel_schedule[j];
        sum_i2k += i * i * kernel_schedule[j];
    }

    CostModel m;
    const double c = channels, l = length, n = partitions;
    m.baseline = l * c * c * sum_k;
    m.spatial = l * (c / n) * (c / n) * sum_i2k;
    m.ratio = m.spatial / m.baseline;
    m.rfft_cost = c * l * std::log2(l);
    m.rfft_fraction = m.rfft_cost / (m.baseline + m.spatial + m.rfft_cost);
    return m;
}

}  // namespace anchor
