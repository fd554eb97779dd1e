#pragma once

#include <vector>

#include "shmedge/model_io.hpp"

namespace shmedge {

// Per-domain front-end: passes time windows through, or replaces values with
// magnitude spectra / wavelet approximation coefficients. Timing metadata is
// rescaled so interval bucketing stays correct downstream.
std::vector<Window> transform_windows(SpectralDomain domain, const std::vector<Window>& raw,
                                      int dwt_levels = 2, double fft_cutoff_hz = 25.0);

// Full scoring chain on raw time windows: energy filter (always on raw
// energies), domain front-end on the survivors, then reconstruction MSE.
// Dropped windows come back with kept=false.
std::vector<ScorePoint> score_pipeline(const ModelBundle& bundle, const std::vector<Window>& raw);

}  // namespace shmedge
