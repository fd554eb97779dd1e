#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shmedge/energy_filter.hpp"
#include "shmedge/recon_model.hpp"
#include "shmedge/types.hpp"

namespace shmedge {

struct ScorePoint {
    double origin_time_s = 0.0;  // window start relative to trace start
    double mse = 0.0;            // meaningful only when kept
    bool kept = true;            // false when the energy filter dropped the window
};

struct DetectorProfile {
    double mse_threshold = 0.0;  // mu + 3*sigma, maintained exactly
    double mu = 0.0;
    double sigma = 0.0;
    int output_dim_minutes = 60;  // averaging horizon
    double input_dim_s = 5.0;
    std::uint32_t calibration_hash = 0;  // CRC of the score set the threshold came from
};

enum class Verdict : std::uint8_t { normal, anomaly, no_verdict };

const char* to_string(Verdict v);

// Per-window reconstruction MSE, (1/M) * sum((x - x_hat)^2). When a filter
// profile is given, windows below its threshold are emitted with kept=false
// and are not scored.
std::vector<ScorePoint> score_windows(const ReconModel& model, const std::vector<Window>& windows,
                                      const EnergyFilterProfile* filter = nullptr);

// Unsupervised threshold from normal-only scores: mu + 3 sigma over kept
// entries, sample standard deviation (N-1). Requires at least 30 kept scores.
DetectorProfile calibrate_threshold(std::span<const ScorePoint> scores, double input_dim_s = 5.0,
                                    int output_dim_minutes = 60);

struct IntervalScore {
    double start_s = 0.0;
    double mean_mse = 0.0;  // meaningful only when window_count > 0
    std::size_t window_count = 0;  // kept windows contributing to the mean
};

// Tumbling intervals of the horizon, anchored at t=0. Every interval between
// the first and last score is emitted; intervals whose kept count is zero
// carry no mean and later classify as no_verdict.
std::vector<IntervalScore> average_scores(std::span<const ScorePoint> scores, int horizon_minutes);

// anomaly iff mean_mse strictly exceeds the threshold; ties read as normal.
std::vector<Verdict> classify(std::span<const IntervalScore> averaged,
                              const DetectorProfile& profile);

struct ClassificationReport {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::uint64_t no_verdict_count = 0;
    std::optional<double> accuracy;     // empty when no decided interval exists
    std::optional<double> sensitivity;  // empty when no positive labels among decided
    std::optional<double> specificity;  // empty when no negative labels among decided
    std::optional<double> auc;          // empty unless both classes present
    std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr), threshold high -> low
};

// Confusion counts come from the verdicts; the ROC sweeps a threshold over
// the interval means directly, so it is post-processing-aware but
// calibration-independent. labels[i] is true for an anomalous interval.
// No-verdict intervals are excluded from both counts and ROC.
ClassificationReport evaluate(std::span<const IntervalScore> intervals,
                              std::span<const Verdict> verdicts,
                              const std::vector<bool>& labels);

std::string format_report(const ClassificationReport& report);

}  // namespace shmedge
