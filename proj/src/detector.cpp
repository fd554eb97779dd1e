#include "shmedge/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <zlib.h>

#include "shmedge/errors.hpp"
#include "shmedge/signal.hpp"

namespace shmedge {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::normal: return "normal";
        case Verdict::anomaly: return "anomaly";
        case Verdict::no_verdict: return "NV";
    }
    return "NV";
}

std::vector<ScorePoint> score_windows(const ReconModel& model, const std::vector<Window>& windows,
                                      const EnergyFilterProfile* filter) {
    const int m = model_input_dim(model);
    std::vector<ScorePoint> scores;
    scores.reserve(windows.size());
    for (const auto& w : windows) {
        ScorePoint p;
        p.origin_time_s = static_cast<double>(w.origin_index) / w.sample_rate_hz();
        if (filter != nullptr && window_energy(w) < filter->threshold) {
            p.kept = false;
            p.mse = std::numeric_limits<double>::quiet_NaN();
            scores.push_back(p);
            continue;
        }
        if (static_cast<int>(w.size()) != m) {
            throw DimensionError("window length " + std::to_string(w.size()) +
                                 " does not match model dimension " + std::to_string(m));
        }
        const Window rebuilt = reconstruct(model, w);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w.values[i] - rebuilt.values[i];
            acc += d * d;
        }
        p.mse = acc / static_cast<double>(w.size());
        p.kept = true;
        scores.push_back(p);
    }
    return scores;
}

DetectorProfile calibrate_threshold(std::span<const ScorePoint> scores, double input_dim_s,
                                    int output_dim_minutes) {
    std::vector<double> kept;
    kept.reserve(scores.size());
    for (const auto& p : scores) {
        if (p.kept) kept.push_back(p.mse);
    }
    if (kept.size() < 30) {
        throw InsufficientDataError("threshold calibration needs at least 30 scored windows, got " +
                                    std::to_string(kept.size()));
    }

    double mu = 0.0;
    for (double v : kept) mu += v;
    mu /= static_cast<double>(kept.size());
    // identical scores must produce an exactly degenerate profile (th == mu),
    // which the two-pass formula misses by an ulp
    const auto [min_it, max_it] = std::minmax_element(kept.begin(), kept.end());
    double sigma = 0.0;
    if (*min_it != *max_it) {
        double ss = 0.0;
        for (double v : kept) ss += (v - mu) * (v - mu);
        sigma = std::sqrt(ss / static_cast<double>(kept.size() - 1));
    } else {
        mu = *min_it;
    }

    DetectorProfile profile;
    profile.mu = mu;
    profile.sigma = sigma;
    profile.mse_threshold = mu + 3.0 * sigma;
    profile.input_dim_s = input_dim_s;
    profile.output_dim_minutes = output_dim_minutes;
    profile.calibration_hash = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(kept.data()),
              static_cast<uInt>(kept.size() * sizeof(double))));
    return profile;
}

std::vector<IntervalScore> average_scores(std::span<const ScorePoint> scores,
                                          int horizon_minutes) {
    if (horizon_minutes < 1) throw ParameterError("horizon must be at least one minute");
    std::vector<IntervalScore> out;
    if (scores.empty()) return out;

    const double horizon_s = 60.0 * horizon_minutes;
    auto bucket_of = [&](double t) {
        return static_cast<long long>(std::floor(t / horizon_s));
    };
    long long lo = bucket_of(scores.front().origin_time_s);
    long long hi = lo;
    for (const auto& p : scores) {
        lo = std::min(lo, bucket_of(p.origin_time_s));
        hi = std::max(hi, bucket_of(p.origin_time_s));
    }

    out.resize(static_cast<std::size_t>(hi - lo + 1));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].start_s = static_cast<double>(lo + static_cast<long long>(i)) * horizon_s;
    }
    std::vector<double> sums(out.size(), 0.0);
    for (const auto& p : scores) {
        if (!p.kept) continue;
        const auto idx = static_cast<std::size_t>(bucket_of(p.origin_time_s) - lo);
        sums[idx] += p.mse;
        out[idx].window_count += 1;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].mean_mse = out[i].window_count > 0
                              ? sums[i] / static_cast<double>(out[i].window_count)
                              : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::vector<Verdict> classify(std::span<const IntervalScore> averaged,
                              const DetectorProfile& profile) {
    std::vector<Verdict> verdicts;
    verdicts.reserve(averaged.size());
    for (const auto& iv : averaged) {
        if (iv.window_count == 0) {
            verdicts.push_back(Verdict::no_verdict);
        } else if (iv.mean_mse > profile.mse_threshold) {  // tie reads as normal
            verdicts.push_back(Verdict::anomaly);
        } else {
            verdicts.push_back(Verdict::normal);
        }
    }
    return verdicts;
}

ClassificationReport evaluate(std::span<const IntervalScore> intervals,
                              std::span<const Verdict> verdicts,
                              const std::vector<bool>& labels) {
    if (intervals.size() != verdicts.size() || verdicts.size() != labels.size()) {
        throw DimensionError("intervals, verdicts, and labels must align");
    }

    ClassificationReport report;
    struct Scored {
        double score;
        bool positive;
    };
    std::vector<Scored> decided;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i] == Verdict::no_verdict) {
            ++report.no_verdict_count;
            continue;
        }
        const bool predicted_anomaly = verdicts[i] == Verdict::anomaly;
        if (labels[i]) {
            predicted_anomaly ? ++report.tp : ++report.fn;
        } else {
            predicted_anomaly ? ++report.fp : ++report.tn;
        }
        decided.push_back({intervals[i].mean_mse, labels[i]});
    }

    const std::uint64_t total = report.tp + report.tn + report.fp + report.fn;
    if (total > 0) report.accuracy = static_cast<double>(report.tp + report.tn) / total;
    if (report.tp + report.fn > 0) {
        report.sensitivity = static_cast<double>(report.tp) / (report.tp + report.fn);
    }
    if (report.tn + report.fp > 0) {
        report.specificity = static_cast<double>(report.tn) / (report.tn + report.fp);
    }

    std::uint64_t pos = 0, neg = 0;
    for (const auto& d : decided) d.positive ? ++pos : ++neg;
    if (pos == 0 || neg == 0) return report;  // ROC undefined with one class

    std::sort(decided.begin(), decided.end(), [](const Scored& a, const Scored& b) {
        return a.score > b.score;
    });

    // tie-grouped sweep: equal scores enter in one step, so the curve moves
    // diagonally through ties and the trapezoid area equals the Mann-Whitney
    // statistic with half credit for ties
    report.roc_points.push_back({0.0, 0.0});
    double auc = 0.0;
    std::uint64_t tp_cum = 0, fp_cum = 0;
    std::size_t i = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    while (i < decided.size()) {
        std::size_t j = i;
        while (j < decided.size() && decided[j].score == decided[i].score) ++j;
        for (std::size_t t = i; t < j; ++t) decided[t].positive ? ++tp_cum : ++fp_cum;
        const double fpr = static_cast<double>(fp_cum) / neg;
        const double tpr = static_cast<double>(tp_cum) / pos;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        report.roc_points.push_back({fpr, tpr});
        prev_fpr = fpr;
        prev_tpr = tpr;
        i = j;
    }
    report.auc = auc;
    return report;
}

std::string format_report(const ClassificationReport& r) {
    std::ostringstream os;
    auto opt = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("undefined");
    };
    os << "intervals: tp=" << r.tp << " tn=" << r.tn << " fp=" << r.fp << " fn=" << r.fn
       << " no_verdict=" << r.no_verdict_count << "\n";
    os << "accuracy=" << opt(r.accuracy) << " sensitivity=" << opt(r.sensitivity)
       << " specificity=" << opt(r.specificity) << " auc=" << opt(r.auc) << "\n";
    return os.str();
}

}  // namespace shmedge
