#include "shmedge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <unsupported/Eigen/FFT>

#include "shmedge/errors.hpp"
#include "shmedge/signal.hpp"

namespace shmedge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSegmentSeconds = 900.0;  // peak surgery operates on 15 min at a time
constexpr double kPeakSearchMaxHz = 25.0;

void add_ring(std::vector<double>& samples, double fs, double t0, double amp, double freq_hz,
              double damping_ratio) {
    const double omega = kTwoPi * freq_hz;
    const double beta = damping_ratio * omega;
    // stop once the envelope is 4 orders of magnitude down
    const double tail_s = std::log(1e4) / beta;
    const auto first = static_cast<std::ptrdiff_t>(std::ceil(t0 * fs));
    const auto last = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(samples.size()),
        static_cast<std::ptrdiff_t>(std::ceil((t0 + tail_s) * fs)));
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(first, 0); i < last; ++i) {
        const double dt = static_cast<double>(i) / fs - t0;
        samples[static_cast<std::size_t>(i)] += amp * std::exp(-beta * dt) * std::sin(omega * dt);
    }
}

}  // namespace

void BridgeSimConfig::validate() const {
    if (sample_rate_hz <= 0) throw ParameterError("sample_rate_hz must be positive");
    // modal peaks must stay inside the analysis band and below Nyquist
    const double limit = std::min(sample_rate_hz / 2, kPeakSearchMaxHz);
    if (natural_freq_hz <= 0 || natural_freq_hz >= limit) {
        throw ParameterError("natural_freq_hz out of (0, " + std::to_string(limit) + ")");
    }
    if (anomaly_freq_hz <= 0 || anomaly_freq_hz >= limit) {
        throw ParameterError("anomaly_freq_hz out of (0, " + std::to_string(limit) + ")");
    }
    if (damping_ratio <= 0 || damping_ratio >= 1) throw ParameterError("damping_ratio out of (0,1)");
    if (vehicle_rate_per_min < 0) throw ParameterError("vehicle_rate_per_min must be >= 0");
    if (excitation_amplitude_g < 0) throw ParameterError("excitation_amplitude_g must be >= 0");
    if (noise_sigma_g < 0) throw ParameterError("noise_sigma_g must be >= 0");
}

AccelTrace generate_trace(const BridgeSimConfig& cfg, double duration_s, BridgeState state) {
    cfg.validate();
    if (duration_s <= 0) throw ParameterError("duration_s must be positive");

    const double fs = cfg.sample_rate_hz;
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
    const double freq =
        state == BridgeState::normal ? cfg.natural_freq_hz : cfg.anomaly_freq_hz;

    // distinct substream per state so normal/anomalous pairs are independent
    std::mt19937_64 rng(cfg.seed ^ (state == BridgeState::anomalous ? 0x9e3779b97f4a7c15ull : 0));

    AccelTrace trace;
    trace.sample_rate_hz = fs;
    trace.samples.assign(n, 0.0);

    if (cfg.force_initial_event) {
        add_ring(trace.samples, fs, 0.0, cfg.excitation_amplitude_g, freq, cfg.damping_ratio);
    }

    if (cfg.vehicle_rate_per_min > 0) {
        std::exponential_distribution<double> gap(cfg.vehicle_rate_per_min / 60.0);
        std::uniform_real_distribution<double> mass(0.6, 1.4);
        double t = gap(rng);
        while (t < duration_s) {
            add_ring(trace.samples, fs, t, cfg.excitation_amplitude_g * mass(rng), freq,
                     cfg.damping_ratio);
            t += gap(rng);
        }
    }

    if (cfg.noise_sigma_g > 0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma_g);
        for (double& s : trace.samples) s += noise(rng);
    }
    return trace;
}

namespace {

// Mean one-sided magnitude spectrum over consecutive segments of seg_len
// samples; falls back to a single shorter segment when the signal is shorter.
// Returns the peak's frequency in Hz, searching (0, kPeakSearchMaxHz].
double dominant_frequency_hz(const std::vector<double>& samples, double fs, std::size_t seg_len) {
    std::size_t use_len = seg_len;
    std::size_t n_segs = samples.size() / seg_len;
    if (n_segs == 0) {
        use_len = samples.size();
        n_segs = 1;
    }
    Eigen::FFT<double> fft;
    std::vector<double> acc(use_len / 2 + 1, 0.0);
    std::vector<std::complex<double>> spec;
    std::vector<double> seg(use_len);
    for (std::size_t s = 0; s < n_segs; ++s) {
        std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(s * use_len), use_len,
                    seg.begin());
        fft.fwd(spec, seg);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(spec[i]);
    }
    const double df = fs / static_cast<double>(use_len);
    const auto hi = std::min<std::size_t>(acc.size() - 1,
                                          static_cast<std::size_t>(kPeakSearchMaxHz / df));
    std::size_t best = 1;
    for (std::size_t i = 2; i <= hi; ++i) {
        if (acc[i] > acc[best]) best = i;
    }
    return static_cast<double>(best) * df;
}

std::vector<double> flatten(const std::vector<Window>& windows) {
    std::vector<double> out;
    std::size_t total = 0;
    for (const auto& w : windows) total += w.size();
    out.reserve(total);
    for (const auto& w : windows) out.insert(out.end(), w.values.begin(), w.values.end());
    return out;
}

// Translates the complex band around the anomaly peak by shift_hz, mirroring
// the conjugate half. Operates in place on one segment.
void shift_band(std::vector<double>& seg, double fs, double peak_hz, double band_halfwidth_hz,
                double shift_hz) {
    const std::size_t n = seg.size();
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, seg);  // full length-n spectrum

    const double df = fs / static_cast<double>(n);
    const auto delta = static_cast<std::ptrdiff_t>(std::llround(shift_hz / df));
    const std::size_t half = n / 2;
    if (delta != 0) {
        auto peak = static_cast<std::ptrdiff_t>(std::llround(peak_hz / df));
        auto lo = std::max<std::ptrdiff_t>(1, peak - static_cast<std::ptrdiff_t>(
                                                       std::llround(band_halfwidth_hz / df)));
        auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(half),
                                           peak + static_cast<std::ptrdiff_t>(
                                                      std::llround(band_halfwidth_hz / df)));
        std::vector<std::complex<double>> band(spec.begin() + lo, spec.begin() + hi + 1);
        for (std::ptrdiff_t b = lo; b <= hi; ++b) spec[static_cast<std::size_t>(b)] = 0.0;
        for (std::ptrdiff_t b = lo; b <= hi; ++b) {
            const std::ptrdiff_t dst = b + delta;
            if (dst < 1 || dst > static_cast<std::ptrdiff_t>(half)) continue;  // fell off the axis
            spec[static_cast<std::size_t>(dst)] += band[static_cast<std::size_t>(b - lo)];
        }
        // restore conjugate symmetry over everything we may have touched
        for (std::size_t b = 1; b < (n + 1) / 2; ++b) spec[n - b] = std::conj(spec[b]);
        if (n % 2 == 0 && half >= 1) spec[half] = std::complex<double>(spec[half].real(), 0.0);
    }

    std::vector<double> rebuilt;
    fft.inv(rebuilt, spec);
    seg = std::move(rebuilt);
}

}  // namespace

std::vector<Window> inject_severity(const std::vector<Window>& normal,
                                    const std::vector<Window>& anomaly, SeverityLevel level) {
    if (normal.empty() || anomaly.empty()) throw ValidationError("empty window set");
    if (level.fraction < 0.0 || level.fraction > 2.0) {
        throw ParameterError("severity fraction outside [0, 2]");
    }
    const std::size_t m = anomaly.front().size();
    const double dur = anomaly.front().duration_s;
    for (const auto& w : anomaly) {
        if (w.size() != m || w.duration_s != dur) throw DimensionError("ragged anomaly windows");
    }
    if (normal.front().size() != m || normal.front().duration_s != dur) {
        throw DimensionError("normal/anomaly window shapes differ");
    }
    const double fs = anomaly.front().sample_rate_hz();

    const auto seg_len = static_cast<std::size_t>(std::llround(kSegmentSeconds * fs));
    std::vector<double> norm_samples = flatten(normal);
    std::vector<double> anom_samples = flatten(anomaly);

    const double f_normal = dominant_frequency_hz(norm_samples, fs, seg_len);
    const double f_anomaly = dominant_frequency_hz(anom_samples, fs, seg_len);
    const double separation = f_normal - f_anomaly;
    const double coarse_df = fs / static_cast<double>(std::min(seg_len, anom_samples.size()));
    if (std::abs(separation) < coarse_df) {
        throw DegenerateInputError("modal peaks closer than one bin; nothing to scale");
    }

    // new peak position: normal + fraction * (anomaly - normal)
    const double shift_hz = (1.0 - level.fraction) * separation;
    const double band_halfwidth_hz = 3.0 * fs / static_cast<double>(m);

    for (std::size_t off = 0; off < anom_samples.size(); off += seg_len) {
        const std::size_t len = std::min(seg_len, anom_samples.size() - off);
        std::vector<double> seg(anom_samples.begin() + static_cast<std::ptrdiff_t>(off),
                                anom_samples.begin() + static_cast<std::ptrdiff_t>(off + len));
        shift_band(seg, fs, f_anomaly, band_halfwidth_hz, shift_hz);
        std::copy(seg.begin(), seg.end(), anom_samples.begin() + static_cast<std::ptrdiff_t>(off));
    }

    std::vector<Window> out = anomaly;  // keep origin/duration metadata
    std::size_t cursor = 0;
    for (auto& w : out) {
        std::copy_n(anom_samples.begin() + static_cast<std::ptrdiff_t>(cursor), m,
                    w.values.begin());
        cursor += m;
    }
    return out;
}

}  // namespace shmedge
