#include "shmedge/energy_filter.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shmedge/errors.hpp"
#include "shmedge/pca.hpp"
#include "shmedge/signal.hpp"

namespace shmedge {

FilterResult apply_energy_filter(const std::vector<Window>& windows,
                                 const EnergyFilterProfile& profile) {
    FilterResult result;
    result.kept.reserve(windows.size());
    for (const auto& w : windows) {
        if (window_energy(w) >= profile.threshold) {
            result.kept.push_back(w);
        } else {
            ++result.dropped_count;
        }
    }
    return result;
}

namespace {

std::vector<Window> filter_by_energy(const std::vector<Window>& windows,
                                     const std::vector<double>& energies, double threshold) {
    std::vector<Window> kept;
    kept.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (energies[i] >= threshold) kept.push_back(windows[i]);
    }
    return kept;
}

std::vector<double> energies_of(const std::vector<Window>& windows) {
    std::vector<double> e;
    e.reserve(windows.size());
    for (const auto& w : windows) e.push_back(window_energy(w));
    return e;
}

}  // namespace

EnergyFilterProfile calibrate_energy_threshold(const std::vector<Window>& train,
                                               const std::vector<Window>& val,
                                               int pca_components,
                                               const CalibrationOptions& opts) {
    if (train.empty() || val.empty()) throw InsufficientDataError("empty train or val set");
    const int m = static_cast<int>(train.front().size());
    if (pca_components < 1 || pca_components >= m) {
        throw ParameterError("component count must be in [1, window length)");
    }
    if (opts.step <= 0) throw ParameterError("step must be positive");
    if (opts.step_mode == ThresholdStepMode::multiplicative && opts.step <= 1.0) {
        throw ParameterError("multiplicative step must exceed 1");
    }

    const std::vector<double> train_energy = energies_of(train);
    const std::vector<double> val_energy = energies_of(val);

    std::vector<double> trajectory;
    double th = opts.initial_threshold;
    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        // always re-filter from the original sets; pure threshold filters make
        // this equivalent to cumulative filtering, and it keeps each iteration
        // a function of th alone
        std::vector<Window> ftrain = filter_by_energy(train, train_energy, th);
        std::vector<Window> fval = filter_by_energy(val, val_energy, th);
        if (ftrain.size() < 2 || fval.empty()) {
            throw CalibrationError("threshold " + std::to_string(th) +
                                       " emptied the calibration sets before reaching " +
                                       std::to_string(opts.qos_rsnr_db) + " dB",
                                   trajectory);
        }

        const PcaModel model = fit_pca_batch(ftrain, pca_components);
        double sum = 0.0;
        for (const auto& w : fval) sum += rsnr_db(w, pca_reconstruct(model, w));
        const double mean_rsnr = sum / static_cast<double>(fval.size());
        trajectory.push_back(mean_rsnr);

        if (mean_rsnr >= opts.qos_rsnr_db) {
            EnergyFilterProfile profile;
            profile.threshold = th;
            profile.qos_rsnr_db = opts.qos_rsnr_db;
            profile.step = opts.step;
            profile.step_mode = opts.step_mode;
            profile.retained_fraction =
                static_cast<double>(fval.size()) / static_cast<double>(val.size());
            return profile;
        }

        th = opts.step_mode == ThresholdStepMode::absolute ? th + opts.step : th * opts.step;
    }
    throw CalibrationError("RSNR bound not met within " + std::to_string(opts.max_iterations) +
                               " iterations",
                           trajectory);
}

EnergyFilterProfile calibrate_energy_threshold(const std::vector<Window>& train,
                                               const std::vector<Window>& val,
                                               double qos_rsnr_db, int pca_components) {
    CalibrationOptions opts;
    opts.qos_rsnr_db = qos_rsnr_db;
    return calibrate_energy_threshold(train, val, pca_components, opts);
}

}  // namespace shmedge
