#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anchor/numerics.hpp"

namespace anchor {

// ── Synthetic signal generators ──────────────────────────────────────────────
// x[t] = Σ_j amp_j·sin(2πt/period_j + phase_j) (+ trend) (+ noise) (+ spikes)
//
// FractionalSine is the quantization-compensation workhorse: a single tone of
// non-integer period T*, whose decomposition p_n = p_0 + T*·n forces the
// theoretical per-tap offset n·(T* − ⌊T*⌋) against the integer anchor ⌊T*⌋.

enum class SignalKind { FractionalSine, MultiTone, TrendPlusSeason, AnomalyInjected };

struct ToneComponent {
    double period = 24.0;  // samples, > 1
    double amplitude = 1.0;
    double phase = 0.0;
};

struct AnomalySpec {
    std::vector<int> positions;
    std::vector<double> magnitudes;  // added to the clean signal, one per position
};

struct SignalSpec {
    SignalKind kind = SignalKind::FractionalSine;
    int length = 512;
    std::vector<ToneComponent> components;
    double trend_slope = 0.0;  // TrendPlusSeason
    double noise_std = 0.0;
    AnomalySpec anomalies;  // AnomalyInjected
    std::uint64_t seed = 0;

    void validate() const;
};

struct SignalMeta {
    std::vector<double> true_periods;
    int integer_period = 0;       // FractionalSine: ⌊T*⌋
    double fractional_part = 0.0; // T* − ⌊T*⌋
    std::vector<std::uint8_t> anomaly_labels;
    bool length_warning = false;  // length < 4·max period

    double theoretical_offset(int tap) const { return tap * fractional_part; }
};

struct GeneratedSignal {
    SeriesBatch batch;  // B=1, C=1
    SignalMeta meta;
};

// Pure function of the spec, seed included.
GeneratedSignal generate(const SignalSpec& spec);

// ── CSV ingestion ────────────────────────────────────────────────────────────
// One column per channel, one row per time step, optional header row.

struct CsvOptions {
    bool header = false;
    bool standardize = false;  // per-channel mean 0, variance 1
};

struct CsvData {
    SeriesBatch batch;  // B=1
    std::vector<std::string> names;
    std::vector<double> means;  // recorded for the inverse transform
    std::vector<double> stds;
    bool standardized = false;

    double unstandardize(int channel, double value) const {
        return standardized ? value * stds[static_cast<std::size_t>(channel)] +
                                  means[static_cast<std::size_t>(channel)]
                            : value;
    }
};

CsvData load_csv(const std::string& path, const CsvOptions& options);

}  // namespace anchor
