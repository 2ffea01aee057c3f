#pragma once

#include <vector>

#include "anchor/numerics.hpp"

namespace anchor {

// ── SpectralPrior ────────────────────────────────────────────────────────────
// The explicit frequency-domain physical prior of a batch:
//   energies  a(f) = mean over (b,c) of |RFFT(x_{b,c})[f]|, with a(0) = 0
//   top_freqs the K highest-energy bins, descending energy,
//             ties broken toward the lower frequency (coarser period)
//   periods   T_k = ⌊L / f_k⌋ in samples, same ordering
struct SpectralPrior {
    std::vector<double> energies;
    std::vector<int> top_freqs;
    std::vector<int> periods;
    int window_length = 0;
};

// Batch-averaged spectral magnitude with the DC bin forced to zero.
// Requires L ≥ 4 and finite input.
std::vector<double> spectral_energy(const SeriesBatch& batch);

// Select the top-K frequency bins and map them to integer periods.
// K must lie in [1, ⌊L/2⌋].  An all-zero energy vector (constant input)
// raises NoPeriodicityError so callers can choose their own fallback.
SpectralPrior topk_periods(const std::vector<double>& energies, int k, int length);

// Convenience: spectral_energy + topk_periods in one step.
SpectralPrior extract_prior(const SeriesBatch& batch, int k);

}  // namespace anchor
