#pragma once

#include <span>
#include <string>
#include <vector>

#include "anchor/errors.hpp"

namespace anchor {

// ── Tensor2D ─────────────────────────────────────────────────────────────────
// Dense [channels × length] slice, the working currency of the operators.
// Row-major with the time axis contiguous.
struct Tensor2D {
    int channels = 0;
    int length = 0;
    std::vector<double> v;

    Tensor2D() = default;
    Tensor2D(int ch, int len) : channels(ch), length(len) {
        if (ch < 0 || len < 0) throw ConfigError("Tensor2D: negative dims");
        v.assign(static_cast<std::size_t>(ch) * len, 0.0);
    }

    double& at(int c, int t) { return v[static_cast<std::size_t>(c) * length + t]; }
    double at(int c, int t) const { return v[static_cast<std::size_t>(c) * length + t]; }

    std::span<double> row(int c) { return {v.data() + static_cast<std::size_t>(c) * length,
                                           static_cast<std::size_t>(length)}; }
    std::span<const double> row(int c) const {
        return {v.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
    }

    void zero() { std::fill(v.begin(), v.end(), 0.0); }

    bool same_shape(const Tensor2D& o) const {
        return channels == o.channels && length == o.length;
    }
};

// ── Param ────────────────────────────────────────────────────────────────────
// A learnable buffer with its paired gradient accumulator.
struct Param {
    std::vector<double> value;
    std::vector<double> grad;

    void resize(std::size_t n) {
        value.assign(n, 0.0);
        grad.assign(n, 0.0);
    }
    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Named view over one parameter group, the unit of the optimizer and of the
// gradient-check report.
struct ParamView {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
};

inline ParamView view(const std::string& name, Param& p) {
    return {name, std::span<double>(p.value), std::span<double>(p.grad)};
}

}  // namespace anchor
