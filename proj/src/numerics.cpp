#include "anchor/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace anchor {

// ── SeriesBatch ──────────────────────────────────────────────────────────────

SeriesBatch::SeriesBatch(int batch, int channels, int length)
    : b_(batch), c_(channels), l_(length) {
    if (batch < 1 || channels < 1 || length < 1) {
        throw ConfigError("SeriesBatch: dims must be >= 1, got B=" + std::to_string(batch) +
                          " C=" + std::to_string(channels) + " L=" + std::to_string(length));
    }
    data_.assign(static_cast<std::size_t>(batch) * channels * length, 0.0);
}

std::span<double> SeriesBatch::series(int b, int c) {
    return {data_.data() + index(b, c, 0), static_cast<std::size_t>(l_)};
}

std::span<const double> SeriesBatch::series(int b, int c) const {
    return {data_.data() + index(b, c, 0), static_cast<std::size_t>(l_)};
}

void SeriesBatch::require_finite(const char* context) const {
    for (int b = 0; b < b_; ++b)
        for (int c = 0; c < c_; ++c)
            for (int t = 0; t < l_; ++t)
                if (!std::isfinite(at(b, c, t)))
                    throw ValidationError(std::string(context) + ": non-finite value at (b=" +
                                          std::to_string(b) + ", c=" + std::to_string(c) +
                                          ", t=" + std::to_string(t) + ")");
}

// ── FFT ──────────────────────────────────────────────────────────────────────

namespace {

using cplx = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey.  n must be a power of two.
void fft_pow2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

// Bluestein's chirp-z transform: forward DFT of arbitrary length via a linear
// convolution carried out with power-of-two FFTs.  Chirp phases are reduced
// mod 2n in exact integer arithmetic before the trig call.
std::vector<cplx> dft_bluestein(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    std::vector<cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
        const double ang = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cplx(std::cos(ang), -std::sin(ang));
    }

    std::vector<cplx> a(m, cplx(0.0, 0.0));
    std::vector<cplx> b(m, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, true);

    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
    return out;
}

}  // namespace

ComplexSpectrum rfft(std::span<const double> signal) {
    const std::size_t n = signal.size();
    if (n < 2) throw ValidationError("rfft: signal length must be >= 2");
    for (std::size_t t = 0; t < n; ++t)
        if (!std::isfinite(signal[t]))
            throw ValidationError("rfft: non-finite input at t=" + std::to_string(t));

    std::vector<cplx> buf(n);
    for (std::size_t t = 0; t < n; ++t) buf[t] = cplx(signal[t], 0.0);

    if (is_pow2(n)) {
        fft_pow2(buf, false);
    } else {
        buf = dft_bluestein(buf);
    }

    ComplexSpectrum spec;
    spec.origin_length = static_cast<int>(n);
    spec.bins.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n / 2 + 1));
    return spec;
}

// ── SeededRng ────────────────────────────────────────────────────────────────

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double SeededRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller; u1 nudged away from zero so log() stays finite.
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::uint64_t SeededRng::below(std::uint64_t n) {
    if (n == 0) throw ConfigError("SeededRng::below: n must be >= 1");
    // Rejection sampling over the largest multiple of n; unbiased and portable.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
}

// ── Finite differences ───────────────────────────────────────────────────────

std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step h must be > 0");

    std::vector<double> point(x.begin(), x.end());
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t k = 0; k < point.size(); ++k) {
        const double saved = point[k];
        point[k] = saved + h;
        const double fp = f(point);
        point[k] = saved - h;
        const double fm = f(point);
        point[k] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw ValidationError("finite_diff_grad: non-finite evaluation at component " +
                                  std::to_string(k));
        grad[k] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

bool grad_close(double analytic, double numeric, double rel_tol, double abs_floor) {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    return diff <= std::max(abs_floor, rel_tol * scale);
}

}  // namespace anchor
