#include "anchor/backbone.hpp"

#include <cmath>
#include <string>

namespace anchor {

void BackboneConfig::validate() const {
    if (input_channels < 1 || input_length < 4)
        throw ConfigError("BackboneConfig: need input_channels >= 1 and input_length >= 4");
    if (stem_width < 1) throw ConfigError("BackboneConfig: stem_width must be >= 1");
    if (stages.empty()) throw ConfigError("BackboneConfig: at least one stage required");

    int length = input_length;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const StageSpec& st = stages[s];
        if (st.blocks < 1) throw ConfigError("BackboneConfig: stage needs >= 1 block");
        if (st.downsample < 1) throw ConfigError("BackboneConfig: downsample factor must be >= 1");
        if (length % st.downsample != 0)
            throw ConfigError("BackboneConfig: length " + std::to_string(length) +
                              " not divisible by downsample " + std::to_string(st.downsample) +
                              " at stage " + std::to_string(s));
        length /= st.downsample;
        fgdm.validate(st.width);  // width divisible by partitions at every stage
    }
    if (head == TaskHead::Reconstruction && final_length() != input_length)
        throw ConfigError("BackboneConfig: reconstruction head requires total downsample == 1");
    if (head == TaskHead::Forecast && horizon < 1)
        throw ConfigError("BackboneConfig: forecast horizon must be >= 1");
    if (head == TaskHead::Classification && classes < 2)
        throw ConfigError("BackboneConfig: classification needs >= 2 classes");
}

int BackboneConfig::final_length() const {
    int length = input_length;
    for (const auto& st : stages) length /= st.downsample;
    return length;
}

int BackboneConfig::final_width() const { return stages.back().width; }

// ── BackboneParams ───────────────────────────────────────────────────────────

namespace {

void head_sizes(const BackboneConfig& c, std::size_t& w, std::size_t& b) {
    switch (c.head) {
        case TaskHead::Forecast:
            w = static_cast<std::size_t>(c.input_channels) * c.horizon * c.final_width() *
                c.final_length();
            b = static_cast<std::size_t>(c.input_channels) * c.horizon;
            break;
        case TaskHead::Classification:
            w = static_cast<std::size_t>(c.classes) * c.final_width();
            b = static_cast<std::size_t>(c.classes);
            break;
        case TaskHead::Reconstruction:
            w = b = 0;
            break;
    }
}

}  // namespace

void BackboneParams::init(const BackboneConfig& config) {
    config.validate();
    stem.init(config.input_channels, config.stem_width);
    stages.assign(config.stages.size(), {});
    int prev_width = config.stem_width;
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
        const StageSpec& st = config.stages[s];
        stages[s].has_transition = prev_width != st.width;
        if (stages[s].has_transition) stages[s].transition.init(prev_width, st.width);
        stages[s].blocks.assign(static_cast<std::size_t>(st.blocks), {});
        for (auto& blk : stages[s].blocks) blk.init(config.fgdm, st.width);
        prev_width = st.width;
    }
    std::size_t hw = 0, hb = 0;
    head_sizes(config, hw, hb);
    head_weight.resize(hw);
    head_bias.resize(hb);
    if (config.head == TaskHead::Reconstruction)
        recon_head.init(config.final_width(), config.input_channels);
}

void BackboneParams::default_init(const BackboneConfig& config, SeededRng& rng) {
    config.validate();
    stem.default_init(config.input_channels, config.stem_width, rng);
    stages.assign(config.stages.size(), {});
    int prev_width = config.stem_width;
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
        const StageSpec& st = config.stages[s];
        stages[s].has_transition = prev_width != st.width;
        if (stages[s].has_transition) stages[s].transition.default_init(prev_width, st.width, rng);
        stages[s].blocks.assign(static_cast<std::size_t>(st.blocks), {});
        for (auto& blk : stages[s].blocks) blk.default_init(config.fgdm, st.width, rng);
        prev_width = st.width;
    }
    std::size_t hw = 0, hb = 0;
    head_sizes(config, hw, hb);
    head_weight.resize(hw);
    head_bias.resize(hb);
    if (config.head == TaskHead::Reconstruction) {
        recon_head.default_init(config.final_width(), config.input_channels, rng);
    } else if (hw > 0) {
        const double fan_in = config.head == TaskHead::Forecast
                                  ? static_cast<double>(config.final_width()) * config.final_length()
                                  : static_cast<double>(config.final_width());
        const double scale = 1.0 / std::sqrt(fan_in);
        for (double& w : head_weight.value) w = rng.uniform(-scale, scale);
    }
}

void BackboneParams::randomize_all(const BackboneConfig& config, SeededRng& rng, double scale) {
    init(config);
    stem.randomize_all(config.input_channels, config.stem_width, rng, scale);
    int prev_width = config.stem_width;
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
        const StageSpec& st = config.stages[s];
        if (stages[s].has_transition)
            stages[s].transition.randomize_all(prev_width, st.width, rng, scale);
        for (auto& blk : stages[s].blocks) blk.randomize_all(config.fgdm, st.width, rng, scale);
        prev_width = st.width;
    }
    for (double& w : head_weight.value) w = rng.uniform(-scale, scale);
    for (double& b : head_bias.value) b = rng.uniform(-scale, scale);
    if (config.head == TaskHead::Reconstruction)
        recon_head.randomize_all(config.final_width(), config.input_channels, rng, scale);
}

void BackboneParams::zero_grad() {
    stem.zero_grad();
    for (auto& s : stages) {
        if (s.has_transition) s.transition.zero_grad();
        for (auto& blk : s.blocks) blk.zero_grad();
    }
    head_weight.zero_grad();
    head_bias.zero_grad();
    recon_head.zero_grad();
}

std::vector<ParamView> BackboneParams::views() {
    std::vector<ParamView> out;
    out.push_back(view("stem.weight", stem.weight));
    out.push_back(view("stem.bias", stem.bias));
    for (std::size_t s = 0; s < stages.size(); ++s) {
        const std::string p = "stage" + std::to_string(s);
        if (stages[s].has_transition) {
            out.push_back(view(p + ".transition.weight", stages[s].transition.weight));
            out.push_back(view(p + ".transition.bias", stages[s].transition.bias));
        }
        for (std::size_t b = 0; b < stages[s].blocks.size(); ++b)
            for (auto& v : stages[s].blocks[b].views(p + ".block" + std::to_string(b)))
                out.push_back(v);
    }
    if (!head_weight.value.empty()) {
        out.push_back(view("head.weight", head_weight));
        out.push_back(view("head.bias", head_bias));
    }
    if (recon_head.in_channels > 0) {
        out.push_back(view("head.recon.weight", recon_head.weight));
        out.push_back(view("head.recon.bias", recon_head.bias));
    }
    return out;
}

std::size_t BackboneParams::param_count() {
    std::size_t n = 0;
    for (const auto& v : views()) n += v.value.size();
    return n;
}

// ── Downsampling ─────────────────────────────────────────────────────────────

Tensor2D downsample_avg(const Tensor2D& x, int factor) {
    if (factor < 1) throw ConfigError("downsample_avg: factor must be >= 1");
    if (factor == 1) return x;
    if (x.length % factor != 0)
        throw ConfigError("downsample_avg: length not divisible by factor");
    Tensor2D y(x.channels, x.length / factor);
    const double inv = 1.0 / factor;
    for (int c = 0; c < x.channels; ++c)
        for (int t = 0; t < y.length; ++t) {
            double acc = 0.0;
            for (int j = 0; j < factor; ++j) acc += x.at(c, t * factor + j);
            y.at(c, t) = acc * inv;
        }
    return y;
}

Tensor2D downsample_avg_backward(const Tensor2D& dy, int factor, int input_length) {
    if (factor == 1) return dy;
    Tensor2D dx(dy.channels, input_length);
    const double inv = 1.0 / factor;
    for (int c = 0; c < dy.channels; ++c)
        for (int t = 0; t < dy.length; ++t)
            for (int j = 0; j < factor; ++j) dx.at(c, t * factor + j) = dy.at(c, t) * inv;
    return dx;
}

SpectralPrior rescale_prior(const SpectralPrior& prior, int factor) {
    SpectralPrior out = prior;
    for (int& p : out.periods) p = std::max(1, p / factor);
    return out;
}

// ── BackboneModel ────────────────────────────────────────────────────────────

BackboneModel::BackboneModel(BackboneConfig config, std::optional<SpectralPrior> prior,
                             std::uint64_t init_seed)
    : config_(std::move(config)) {
    config_.validate();
    SeededRng rng(init_seed);
    params_.default_init(config_, rng);

    int cumulative = 1;
    routes_.reserve(config_.stages.size());
    for (const auto& st : config_.stages) {
        cumulative *= st.downsample;
        if (prior.has_value())
            routes_.push_back(assign_routes(rescale_prior(*prior, cumulative), config_.fgdm));
        else
            routes_.push_back(no_periodicity_routes(config_.fgdm));
    }
}

Tensor2D BackboneModel::forward(const Tensor2D& x, BackboneCache& cache) {
    if (x.channels != config_.input_channels || x.length != config_.input_length)
        throw ConfigError("BackboneModel: input is [" + std::to_string(x.channels) + "x" +
                          std::to_string(x.length) + "], config expects [" +
                          std::to_string(config_.input_channels) + "x" +
                          std::to_string(config_.input_length) + "]");

    cache.input = x;
    cache.stages.assign(config_.stages.size(), {});

    Tensor2D h = params_.stem.forward(x);
    for (std::size_t s = 0; s < config_.stages.size(); ++s) {
        const StageSpec& st = config_.stages[s];
        BackboneStageCache& scache = cache.stages[s];

        scache.downsample_input = h;
        scache.downsampled = st.downsample > 1;
        if (scache.downsampled) h = downsample_avg(h, st.downsample);

        scache.transition_input = h;
        if (params_.stages[s].has_transition) h = params_.stages[s].transition.forward(h);

        scache.blocks.assign(params_.stages[s].blocks.size(), {});
        for (std::size_t b = 0; b < params_.stages[s].blocks.size(); ++b) {
            scache.blocks[b].input = h;
            Tensor2D f = fgdm_forward(h, params_.stages[s].blocks[b], config_.fgdm, routes_[s],
                                      scache.blocks[b].fgdm);
            for (std::size_t k = 0; k < h.v.size(); ++k) h.v[k] += f.v[k];  // residual
        }
    }
    cache.features = h;

    switch (config_.head) {
        case TaskHead::Forecast: {
            const int co = config_.input_channels, hor = config_.horizon;
            const std::size_t flat = h.v.size();
            Tensor2D out(co, hor);
            for (int c = 0; c < co; ++c)
                for (int t = 0; t < hor; ++t) {
                    const std::size_t row = static_cast<std::size_t>(c) * hor + t;
                    double acc = params_.head_bias.value[row];
                    for (std::size_t k = 0; k < flat; ++k)
                        acc += params_.head_weight.value[row * flat + k] * h.v[k];
                    out.at(c, t) = acc;
                }
            return out;
        }
        case TaskHead::Reconstruction:
            return params_.recon_head.forward(h);
        case TaskHead::Classification: {
            Tensor2D out(config_.classes, 1);
            const double inv_len = 1.0 / h.length;
            for (int k = 0; k < config_.classes; ++k) {
                double acc = params_.head_bias.value[k];
                for (int c = 0; c < h.channels; ++c) {
                    double pooled = 0.0;
                    for (int t = 0; t < h.length; ++t) pooled += h.at(c, t);
                    acc += params_.head_weight.value[static_cast<std::size_t>(k) * h.channels + c] *
                           pooled * inv_len;
                }
                out.at(k, 0) = acc;
            }
            return out;
        }
    }
    throw std::logic_error("BackboneModel: unknown head");
}

Tensor2D BackboneModel::backward(const BackboneCache& cache, const Tensor2D& dout) {
    const Tensor2D& feat = cache.features;
    Tensor2D dh(feat.channels, feat.length);

    switch (config_.head) {
        case TaskHead::Forecast: {
            const int co = config_.input_channels, hor = config_.horizon;
            const std::size_t flat = feat.v.size();
            for (int c = 0; c < co; ++c)
                for (int t = 0; t < hor; ++t) {
                    const std::size_t row = static_cast<std::size_t>(c) * hor + t;
                    const double g = dout.at(c, t);
                    params_.head_bias.grad[row] += g;
                    for (std::size_t k = 0; k < flat; ++k) {
                        params_.head_weight.grad[row * flat + k] += g * feat.v[k];
                        dh.v[k] += g * params_.head_weight.value[row * flat + k];
                    }
                }
            break;
        }
        case TaskHead::Reconstruction:
            dh = params_.recon_head.backward(feat, dout);
            break;
        case TaskHead::Classification: {
            const double inv_len = 1.0 / feat.length;
            for (int k = 0; k < config_.classes; ++k) {
                const double g = dout.at(k, 0);
                params_.head_bias.grad[k] += g;
                for (int c = 0; c < feat.channels; ++c) {
                    double pooled = 0.0;
                    for (int t = 0; t < feat.length; ++t) pooled += feat.at(c, t);
                    params_.head_weight.grad[static_cast<std::size_t>(k) * feat.channels + c] +=
                        g * pooled * inv_len;
                    const double w =
                        params_.head_weight.value[static_cast<std::size_t>(k) * feat.channels + c];
                    for (int t = 0; t < feat.length; ++t) dh.at(c, t) += g * w * inv_len;
                }
            }
            break;
        }
    }

    for (std::size_t s = config_.stages.size(); s-- > 0;) {
        const BackboneStageCache& scache = cache.stages[s];
        for (std::size_t b = params_.stages[s].blocks.size(); b-- > 0;) {
            Tensor2D df = fgdm_backward(scache.blocks[b].fgdm, dh, params_.stages[s].blocks[b],
                                        config_.fgdm, routes_[s]);
            for (std::size_t k = 0; k < dh.v.size(); ++k) dh.v[k] += df.v[k];
        }
        if (params_.stages[s].has_transition)
            dh = params_.stages[s].transition.backward(scache.transition_input, dh);
        if (scache.downsampled)
            dh = downsample_avg_backward(dh, config_.stages[s].downsample,
                                         scache.downsample_input.length);
    }
    return params_.stem.backward(cache.input, dh);
}

}  // namespace anchor
