#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shmedge {

/// Single-axis acceleration series at a fixed sample rate. Values are in g.
struct AccelTrace {
    double sample_rate_hz = 0.0;
    std::vector<double> samples;
    double start_time_s = 0.0;  // epoch seconds of samples[0]
    std::string axis_label = "z";

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

/// Fixed-length sample vector, the unit of compression and reconstruction.
struct Window {
    std::vector<double> values;
    std::size_t origin_index = 0;  // offset of values[0] in the source trace
    double duration_s = 0.0;

    std::size_t size() const { return values.size(); }
    double sample_rate_hz() const {
        return duration_s > 0 ? static_cast<double>(values.size()) / duration_s : 0.0;
    }
    /// Seconds from trace start to the first sample of this window.
    double start_offset_s() const {
        const double fs = sample_rate_hz();
        return fs > 0 ? static_cast<double>(origin_index) / fs : 0.0;
    }
};

enum class SpectralDomain : std::uint8_t { time = 0, fft = 1, dwt = 2 };

/// Output of a spectral front-end; magnitudes for fft, approximation
/// coefficients for dwt.
struct SpectralFrame {
    std::vector<double> bins;
    double bin_resolution_hz = 0.0;
    SpectralDomain domain_tag = SpectralDomain::time;
};

const char* to_string(SpectralDomain d);
SpectralDomain spectral_domain_from_string(const std::string& s);

}  // namespace shmedge
