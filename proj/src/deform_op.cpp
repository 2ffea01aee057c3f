#include "anchor/deform_op.hpp"

#include <cmath>
#include <string>

namespace anchor {

void DefOpConfig::validate() const {
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ConfigError("DefOpConfig: kernel_size must be odd and >= 1, got " +
                          std::to_string(kernel_size));
    if (period < 1) throw ConfigError("DefOpConfig: period must be >= 1");
    if (in_channels < 1 || out_channels < 1)
        throw ConfigError("DefOpConfig: channel counts must be >= 1");
    interp.validate();
}

void DefOpParams::init(const DefOpConfig& config) {
    config.validate();
    weight.resize(static_cast<std::size_t>(config.out_channels) * config.in_channels *
                  config.kernel_size);
    bias.resize(static_cast<std::size_t>(config.out_channels));
    offset_weight.resize(static_cast<std::size_t>(config.kernel_size) * config.in_channels);
    offset_bias.resize(static_cast<std::size_t>(config.kernel_size));
}

void DefOpParams::default_init(const DefOpConfig& config, SeededRng& rng) {
    init(config);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.in_channels) *
                                         config.kernel_size);
    for (double& w : weight.value) w = rng.uniform(-scale, scale);
    // bias and offset predictor stay at zero: the starting point is the pure
    // period-anchored sampling grid.
}

void DefOpParams::randomize_all(const DefOpConfig& config, SeededRng& rng, double scale) {
    init(config);
    for (double& w : weight.value) w = rng.uniform(-scale, scale);
    for (double& b : bias.value) b = rng.uniform(-scale, scale);
    for (double& w : offset_weight.value) w = rng.uniform(-scale, scale);
    for (double& b : offset_bias.value) b = rng.uniform(-scale, scale);
}

void DefOpParams::zero_grad() {
    weight.zero_grad();
    bias.zero_grad();
    offset_weight.zero_grad();
    offset_bias.zero_grad();
}

std::vector<ParamView> DefOpParams::views(const std::string& prefix) {
    return {view(prefix + ".weight", weight), view(prefix + ".bias", bias),
            view(prefix + ".offset_weight", offset_weight),
            view(prefix + ".offset_bias", offset_bias)};
}

std::vector<double> sampling_positions(int p0, const DefOpConfig& config,
                                       std::span<const double> offsets) {
    if (static_cast<int>(offsets.size()) != config.kernel_size)
        throw ConfigError("sampling_positions: expected " + std::to_string(config.kernel_size) +
                          " offsets, got " + std::to_string(offsets.size()));
    std::vector<double> pos(offsets.size());
    const int half = config.half_taps();
    for (int n = 0; n < config.kernel_size; ++n) {
        if (!std::isfinite(offsets[n]))
            throw ValidationError("sampling_positions: non-finite offset at tap " +
                                  std::to_string(n));
        pos[n] = static_cast<double>(p0) + static_cast<double>(config.period) * (n - half) +
                 offsets[n];
    }
    return pos;
}

namespace {

void check_shapes(const Tensor2D& x, const DefOpParams& params, const DefOpConfig& config) {
    if (x.channels != config.in_channels)
        throw ConfigError("defop: input has " + std::to_string(x.channels) +
                          " channels, config expects " + std::to_string(config.in_channels));
    const std::size_t want_w = static_cast<std::size_t>(config.out_channels) *
                               config.in_channels * config.kernel_size;
    if (params.weight.size() != want_w || params.offset_bias.size() !=
        static_cast<std::size_t>(config.kernel_size))
        throw ConfigError("defop: params not initialized for this config");
}

}  // namespace

Tensor2D defop_forward(const Tensor2D& x, DefOpParams& params, const DefOpConfig& config,
                       DefOpCache& cache) {
    config.validate();
    check_shapes(x, params, config);
    for (int c = 0; c < x.channels; ++c)
        for (int t = 0; t < x.length; ++t)
            if (!std::isfinite(x.at(c, t)))
                throw ValidationError("defop_forward: non-finite input at (c=" +
                                      std::to_string(c) + ", t=" + std::to_string(t) + ")");

    const int len = x.length;
    const int taps = config.kernel_size;
    const int cin = config.in_channels;
    const int cout = config.out_channels;

    cache.input = x;
    cache.offsets.assign(static_cast<std::size_t>(len) * taps, 0.0);
    cache.sampled.assign(static_cast<std::size_t>(cin) * taps * len, 0.0);
    cache.serial = ++params.forward_serial;
    cache.span_warning = (taps - 1) * config.period >= 4 * len;

    Tensor2D y(cout, len);
    std::vector<double> off(taps);

    for (int t = 0; t < len; ++t) {
        for (int n = 0; n < taps; ++n) {
            double o = params.offset_bias.value[n];
            if (config.offset_mode == OffsetMode::Predicted)
                for (int c = 0; c < cin; ++c)
                    o += params.offset_weight.value[static_cast<std::size_t>(n) * cin + c] *
                         x.at(c, t);
            off[n] = o;
            cache.offsets[static_cast<std::size_t>(t) * taps + n] = o;
        }
        const std::vector<double> pos = sampling_positions(t, config, off);

        for (int c = 0; c < cin; ++c) {
            for (int n = 0; n < taps; ++n) {
                const double s = interp(x.row(c), pos[n], config.interp).value;
                cache.sampled[(static_cast<std::size_t>(c) * taps + n) * len + t] = s;
            }
        }
        for (int o = 0; o < cout; ++o) {
            double acc = params.bias.value[o];
            for (int c = 0; c < cin; ++c)
                for (int n = 0; n < taps; ++n)
                    acc += params.weight.value[(static_cast<std::size_t>(o) * cin + c) * taps + n] *
                           cache.sampled[(static_cast<std::size_t>(c) * taps + n) * len + t];
            if (!std::isfinite(acc))
                throw std::runtime_error("defop_forward: non-finite activation at (out=" +
                                         std::to_string(o) + ", t=" + std::to_string(t) + ")");
            y.at(o, t) = acc;
        }
    }
    return y;
}

Tensor2D defop_backward(const DefOpCache& cache, const Tensor2D& dy, DefOpParams& params,
                        const DefOpConfig& config) {
    if (cache.serial != params.forward_serial)
        throw std::logic_error("defop_backward: cache is stale (params saw another forward)");
    if (dy.channels != config.out_channels || dy.length != cache.input.length)
        throw ConfigError("defop_backward: dy shape mismatch");

    const Tensor2D& x = cache.input;
    const int len = x.length;
    const int taps = config.kernel_size;
    const int cin = config.in_channels;
    const int cout = config.out_channels;

    Tensor2D dx(cin, len);
    std::vector<double> off(taps);

    for (int t = 0; t < len; ++t) {
        for (int o = 0; o < cout; ++o) params.bias.grad[o] += dy.at(o, t);

        for (int n = 0; n < taps; ++n) off[n] = cache.offset_at(t, n, taps);
        const std::vector<double> pos = sampling_positions(t, config, off);

        for (int n = 0; n < taps; ++n) {
            double dpos = 0.0;
            for (int c = 0; c < cin; ++c) {
                // dL/dsampled(c, n, t) through the weighted reduction.
                double ds = 0.0;
                for (int o = 0; o < cout; ++o)
                    ds += dy.at(o, t) *
                          params.weight.value[(static_cast<std::size_t>(o) * cin + c) * taps + n];

                const double s = cache.sampled[(static_cast<std::size_t>(c) * taps + n) * len + t];
                for (int o = 0; o < cout; ++o)
                    params.weight.grad[(static_cast<std::size_t>(o) * cin + c) * taps + n] +=
                        dy.at(o, t) * s;

                const InterpResult r = interp(x.row(c), pos[n], config.interp);
                for (const auto& [q, alpha] : r.weights)
                    if (q >= 0 && q < len) dx.at(c, q) += ds * alpha;
                dpos += ds * r.dvalue_dp;
            }
            // Δp_n routes: ∂p_n/∂Δp_n = 1.
            params.offset_bias.grad[n] += dpos;
            if (config.offset_mode == OffsetMode::Predicted) {
                for (int c = 0; c < cin; ++c) {
                    params.offset_weight.grad[static_cast<std::size_t>(n) * cin + c] +=
                        dpos * x.at(c, t);
                    dx.at(c, t) +=
                        dpos * params.offset_weight.value[static_cast<std::size_t>(n) * cin + c];
                }
            }
        }
    }
    return dx;
}

}  // namespace anchor
