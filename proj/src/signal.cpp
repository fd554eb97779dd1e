#include "shmedge/signal.hpp"

#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "shmedge/errors.hpp"

namespace shmedge {

std::vector<Window> windowize(const AccelTrace& trace, double duration_s) {
    if (duration_s <= 0) throw ParameterError("window duration must be positive");
    if (trace.sample_rate_hz <= 0) throw ValidationError("trace has no sample rate");
    const auto m = static_cast<std::size_t>(std::llround(duration_s * trace.sample_rate_hz));
    if (m == 0) throw ParameterError("window shorter than one sample");
    if (trace.samples.size() < m) {
        throw InsufficientDataError("trace holds " + std::to_string(trace.samples.size()) +
                                    " samples, window needs " + std::to_string(m));
    }
    const std::size_t count = trace.samples.size() / m;
    std::vector<Window> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        Window win;
        win.origin_index = w * m;
        win.duration_s = duration_s;
        win.values.assign(trace.samples.begin() + static_cast<std::ptrdiff_t>(w * m),
                          trace.samples.begin() + static_cast<std::ptrdiff_t>((w + 1) * m));
        out.push_back(std::move(win));
    }
    return out;
}

double window_energy(std::span<const double> values) {
    double acc = 0.0;
    for (double v : values) acc += v * v;
    return acc;
}

double window_energy(const Window& w) { return window_energy(std::span<const double>(w.values)); }

double rsnr_db(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size()) {
        throw DimensionError("reference and estimate lengths differ (" +
                             std::to_string(reference.size()) + " vs " +
                             std::to_string(estimate.size()) + ")");
    }
    if (reference.empty()) throw ValidationError("empty signal");
    double ref2 = 0.0, err2 = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        ref2 += reference[i] * reference[i];
        const double d = reference[i] - estimate[i];
        err2 += d * d;
    }
    if (ref2 == 0.0) throw ValidationError("reference signal has zero norm");
    if (err2 == 0.0) return kRsnrPerfect;
    return 10.0 * std::log10(ref2 / err2);
}

double rsnr_db(const Window& reference, const Window& estimate) {
    return rsnr_db(std::span<const double>(reference.values),
                   std::span<const double>(estimate.values));
}

SpectralFrame fft_frame(const Window& w, double cutoff_hz) {
    if (w.values.empty()) throw ValidationError("empty window");
    if (cutoff_hz <= 0) throw ParameterError("cutoff must be positive");
    const std::size_t m = w.values.size();
    const double fs = w.sample_rate_hz();
    if (cutoff_hz > fs / 2.0) {
        throw ParameterError("cutoff " + std::to_string(cutoff_hz) + " Hz above Nyquist " +
                             std::to_string(fs / 2.0) + " Hz");
    }
    const double resolution = fs / static_cast<double>(m);

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, w.values);

    // one-sided magnitude, scaled so a unit sinusoid lands at amplitude 1
    std::size_t keep = static_cast<std::size_t>(std::floor(cutoff_hz / resolution));
    keep = std::min(keep, m / 2 + 1);
    if (keep == 0) throw ParameterError("cutoff below one bin");

    SpectralFrame frame;
    frame.domain_tag = SpectralDomain::fft;
    frame.bin_resolution_hz = resolution;
    frame.bins.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        frame.bins[i] = std::abs(spectrum[i]) * 2.0 / static_cast<double>(m);
    }
    return frame;
}

HaarDecomposition haar_decompose(std::span<const double> values, int levels) {
    if (values.empty()) throw ValidationError("empty signal");
    if (levels < 1) throw ParameterError("need at least one level");
    HaarDecomposition out;
    out.details.resize(static_cast<std::size_t>(levels));
    std::vector<double> cur(values.begin(), values.end());
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int lvl = 0; lvl < levels; ++lvl) {
        if (cur.size() < 2) {
            throw InsufficientDataError("signal too short for " + std::to_string(levels) +
                                        " decomposition levels");
        }
        const std::size_t pairs = cur.size() / 2;
        std::vector<double> approx(pairs), detail(pairs);
        for (std::size_t i = 0; i < pairs; ++i) {
            approx[i] = (cur[2 * i] + cur[2 * i + 1]) * inv_sqrt2;
            detail[i] = (cur[2 * i] - cur[2 * i + 1]) * inv_sqrt2;
        }
        // odd tail carries through unchanged so energy is conserved
        if (cur.size() % 2 == 1) approx.push_back(cur.back());
        out.details[static_cast<std::size_t>(lvl)] = std::move(detail);
        cur = std::move(approx);
    }
    out.approx = std::move(cur);
    return out;
}

SpectralFrame dwt_frame(const Window& w, int levels) {
    if (levels < 1) throw ParameterError("need at least one level");
    if (levels >= 63 || w.values.size() % (1ull << levels) != 0) {
        throw ParameterError("window length " + std::to_string(w.values.size()) +
                             " not divisible by 2^" + std::to_string(levels));
    }
    auto dec = haar_decompose(std::span<const double>(w.values), levels);
    SpectralFrame frame;
    frame.domain_tag = SpectralDomain::dwt;
    frame.bin_resolution_hz = 0.0;  // not a uniform-frequency axis
    frame.bins = std::move(dec.approx);
    return frame;
}

}  // namespace shmedge
