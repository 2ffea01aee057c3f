#include "anchor/spectral_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace anchor {

std::vector<double> spectral_energy(const SeriesBatch& batch) {
    const int length = batch.length();
    if (length < 4) throw ValidationError("spectral_energy: window length must be >= 4");
    batch.require_finite("spectral_energy");

    const int bins = length / 2 + 1;
    std::vector<double> energies(bins, 0.0);
    for (int b = 0; b < batch.batch(); ++b) {
        for (int c = 0; c < batch.channels(); ++c) {
            const ComplexSpectrum spec = rfft(batch.series(b, c));
            for (int f = 0; f < bins; ++f) energies[f] += std::abs(spec.bins[f]);
        }
    }
    const double inv = 1.0 / (static_cast<double>(batch.batch()) * batch.channels());
    for (double& e : energies) e *= inv;
    energies[0] = 0.0;
    return energies;
}

SpectralPrior topk_periods(const std::vector<double>& energies, int k, int length) {
    const int max_freq = length / 2;
    if (static_cast<int>(energies.size()) != max_freq + 1)
        throw ConfigError("topk_periods: energies length " + std::to_string(energies.size()) +
                          " does not match window length " + std::to_string(length));
    if (k < 1 || k > max_freq)
        throw ConfigError("topk_periods: K=" + std::to_string(k) + " outside [1, " +
                          std::to_string(max_freq) + "]");
    if (energies[0] != 0.0)
        throw ValidationError("topk_periods: DC bin must be zero (forgot spectral_energy?)");

    bool all_zero = true;
    for (int f = 1; f <= max_freq; ++f)
        if (energies[f] != 0.0) { all_zero = false; break; }
    if (all_zero)
        throw NoPeriodicityError("topk_periods: spectral energy is identically zero; "
                                 "input has no dominant period");

    // Stable sort on descending energy; equal energies keep ascending frequency
    // order, so the tie goes to the coarser (longer) period.
    std::vector<int> freqs(max_freq);
    std::iota(freqs.begin(), freqs.end(), 1);
    std::stable_sort(freqs.begin(), freqs.end(),
                     [&](int a, int b) { return energies[a] > energies[b]; });

    SpectralPrior prior;
    prior.window_length = length;
    prior.energies = energies;
    prior.top_freqs.assign(freqs.begin(), freqs.begin() + k);
    prior.periods.reserve(k);
    for (int f : prior.top_freqs) prior.periods.push_back(length / f);
    return prior;
}

SpectralPrior extract_prior(const SeriesBatch& batch, int k) {
    return topk_periods(spectral_energy(batch), k, batch.length());
}

}  // namespace anchor
