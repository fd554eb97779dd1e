#pragma once

#include <cstdint>
#include <vector>

#include "shmedge/types.hpp"

namespace shmedge {

enum class ThresholdStepMode : std::uint8_t {
    absolute,        // th <- th + step (raw energy units)
    multiplicative,  // th <- th * step (step > 1); useful when energies span decades
};

struct EnergyFilterProfile {
    double threshold = 1e-10;  // windows with energy below this are dropped
    double qos_rsnr_db = 16.0;
    double step = 0.00390625;  // 2^-8
    ThresholdStepMode step_mode = ThresholdStepMode::absolute;
    double retained_fraction = 1.0;  // share of validation windows kept at calibration time
};

struct CalibrationOptions {
    double qos_rsnr_db = 16.0;
    double initial_threshold = 1e-10;
    double step = 0.00390625;
    ThresholdStepMode step_mode = ThresholdStepMode::absolute;
    std::size_t max_iterations = 1000000;
};

// Raises the energy threshold until the validation windows that survive it
// are reconstructed (by a rank-k linear model fit on the surviving training
// windows) at a mean RSNR of at least qos_rsnr_db. Both sets are re-filtered
// from the original inputs at every candidate threshold. Throws
// CalibrationError (carrying the mean-RSNR trajectory) when either set is
// emptied or the iteration cap is hit before the bound is met.
EnergyFilterProfile calibrate_energy_threshold(const std::vector<Window>& train,
                                               const std::vector<Window>& val,
                                               double qos_rsnr_db, int pca_components);

EnergyFilterProfile calibrate_energy_threshold(const std::vector<Window>& train,
                                               const std::vector<Window>& val,
                                               int pca_components, const CalibrationOptions& opts);

struct FilterResult {
    std::vector<Window> kept;
    std::size_t dropped_count = 0;
};

// Keeps windows whose energy is >= profile.threshold, preserving order.
FilterResult apply_energy_filter(const std::vector<Window>& windows,
                                 const EnergyFilterProfile& profile);

}  // namespace shmedge
