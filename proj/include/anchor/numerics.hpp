#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "anchor/errors.hpp"

namespace anchor {

// ── SeriesBatch ──────────────────────────────────────────────────────────────
// Dense rank-3 real array (batch B × channels C × length L), the universal
// signal carrier.  Dimensions are fixed at construction; storage is row-major
// with the time axis contiguous, so series(b, c) is a cheap span.
class SeriesBatch {
public:
    SeriesBatch(int batch, int channels, int length);

    int batch() const { return b_; }
    int channels() const { return c_; }
    int length() const { return l_; }

    double& at(int b, int c, int t) { return data_[index(b, c, t)]; }
    double at(int b, int c, int t) const { return data_[index(b, c, t)]; }

    std::span<double> series(int b, int c);
    std::span<const double> series(int b, int c) const;

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // Throws ValidationError naming the first non-finite element.
    void require_finite(const char* context) const;

private:
    std::size_t index(int b, int c, int t) const {
        return (static_cast<std::size_t>(b) * c_ + c) * l_ + t;
    }

    int b_, c_, l_;
    std::vector<double> data_;
};

// ── ComplexSpectrum ──────────────────────────────────────────────────────────
// One-sided spectrum of a length-L real signal: ⌊L/2⌋+1 bins, forward DFT
// convention bins[f] = Σ_t x[t]·exp(−2πi·f·t/L), no normalization.
struct ComplexSpectrum {
    std::vector<std::complex<double>> bins;
    int origin_length = 0;

    int bin_count() const { return static_cast<int>(bins.size()); }
};

// Real FFT of an arbitrary-length signal (L ≥ 2).  Radix-2 for powers of two,
// Bluestein's chirp-z otherwise, so non-power-of-two windows (96, 24, ...)
// keep O(L log L) cost.  Rejects non-finite input.
ComplexSpectrum rfft(std::span<const double> signal);

// ── SeededRng ────────────────────────────────────────────────────────────────
// xoshiro256++ seeded through SplitMix64.  Pure 64-bit integer arithmetic and
// explicit double conversion, so identical seeds give identical streams on
// every platform.  std::mt19937 + distributions are avoided on purpose: the
// standard leaves distribution output implementation-defined.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (second draw cached).
    double normal();
    // Uniform integer in [0, n), n ≥ 1.
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// ── Finite-difference oracle ─────────────────────────────────────────────────
// Central differences: component k of the result is
//   (f(x + h·e_k) − f(x − h·e_k)) / (2h).
// This is the independent reference every analytic gradient in the repo is
// checked against.  Throws ValidationError naming the component if f returns
// a non-finite value.
std::vector<double> finite_diff_grad(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = 1e-5);

// Relative-error comparison with an absolute floor for near-zero gradients:
// passes iff |a − b| ≤ max(abs_floor, rel_tol · max(|a|, |b|)).
bool grad_close(double analytic, double numeric, double rel_tol, double abs_floor);

}  // namespace anchor
