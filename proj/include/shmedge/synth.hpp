#pragma once

#include <cstdint>
#include <vector>

#include "shmedge/types.hpp"

namespace shmedge {

// Traffic-excited bridge response generator. Vehicle passages arrive as a
// Poisson process; each passage rings the deck at the state's first modal
// frequency with an exponentially decaying envelope, on top of broadband
// sensor noise.
struct BridgeSimConfig {
    double sample_rate_hz = 100.0;
    double natural_freq_hz = 3.0;   // healthy first mode
    double anomaly_freq_hz = 2.5;   // degraded first mode
    double damping_ratio = 0.015;
    double vehicle_rate_per_min = 7.0;
    double excitation_amplitude_g = 0.08;
    double noise_sigma_g = 0.0012;
    bool force_initial_event = false;  // deterministic passage at t=0, for controlled tests
    std::uint64_t seed = 1;

    void validate() const;  // throws ParameterError on out-of-range fields
};

enum class BridgeState : std::uint8_t { normal, anomalous };

// Deterministic for a fixed (cfg.seed, duration_s, state) triple.
AccelTrace generate_trace(const BridgeSimConfig& cfg, double duration_s, BridgeState state);

// Severity of an injected anomaly, expressed as a multiplier on the spectral
// distance between the anomalous and healthy modal peaks. 1.0 keeps the
// anomaly as generated, 0.0 collapses it onto the healthy peak, 2.0 doubles
// the separation.
struct SeverityLevel {
    double fraction = 1.0;  // valid range [0, 2]
};

// Rewrites the anomaly windows so that the spectral separation between their
// modal peak and the normal set's modal peak becomes
// level.fraction * (original separation). Operates on long contiguous
// segments internally (15 min at a time), then re-windows; window metadata is
// preserved. Peak positions are read off segment-averaged spectra, so the
// shift is a single global frequency offset.
std::vector<Window> inject_severity(const std::vector<Window>& normal,
                                    const std::vector<Window>& anomaly, SeverityLevel level);

}  // namespace shmedge
