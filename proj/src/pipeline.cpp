#include "shmedge/pipeline.hpp"

#include <cmath>
#include <limits>

#include "shmedge/errors.hpp"
#include "shmedge/signal.hpp"

namespace shmedge {

std::vector<Window> transform_windows(SpectralDomain domain, const std::vector<Window>& raw,
                                      int dwt_levels, double fft_cutoff_hz) {
    if (domain == SpectralDomain::time) return raw;
    std::vector<Window> out;
    out.reserve(raw.size());
    for (const auto& w : raw) {
        SpectralFrame frame = domain == SpectralDomain::fft ? fft_frame(w, fft_cutoff_hz)
                                                            : dwt_frame(w, dwt_levels);
        Window t;
        t.duration_s = w.duration_s;
        // keep the origin on the same time axis: windows are contiguous, so
        // scale the raw sample offset to transformed-sample units
        t.origin_index = w.size() > 0 ? (w.origin_index / w.size()) * frame.bins.size() : 0;
        t.values = std::move(frame.bins);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<ScorePoint> score_pipeline(const ModelBundle& bundle,
                                       const std::vector<Window>& raw) {
    const ReconModel recon = bundle.reconstructor();
    const int m = model_input_dim(recon);

    std::vector<ScorePoint> scores;
    scores.reserve(raw.size());
    for (const auto& w : raw) {
        ScorePoint p;
        p.origin_time_s = static_cast<double>(w.origin_index) / w.sample_rate_hz();
        if (window_energy(w) < bundle.filter.threshold) {
            p.kept = false;
            p.mse = std::numeric_limits<double>::quiet_NaN();
            scores.push_back(p);
            continue;
        }
        Window feed = w;
        if (bundle.domain != SpectralDomain::time) {
            SpectralFrame frame = bundle.domain == SpectralDomain::fft ? fft_frame(w)
                                                                       : dwt_frame(w);
            feed.values = std::move(frame.bins);
        }
        if (static_cast<int>(feed.size()) != m) {
            throw DimensionError("front-end produced dimension " + std::to_string(feed.size()) +
                                 ", model expects " + std::to_string(m));
        }
        const Window rebuilt = reconstruct(recon, feed);
        double acc = 0.0;
        for (std::size_t i = 0; i < feed.size(); ++i) {
            const double d = feed.values[i] - rebuilt.values[i];
            acc += d * d;
        }
        p.mse = acc / static_cast<double>(feed.size());
        scores.push_back(p);
    }
    return scores;
}

}  // namespace shmedge
