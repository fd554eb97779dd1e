#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shmedge/detector.hpp"
#include "shmedge/energy_filter.hpp"
#include "shmedge/errors.hpp"
#include "shmedge/pca.hpp"
#include "shmedge/signal.hpp"
#include "shmedge/synth.hpp"

using namespace shmedge;

namespace {

Window noise_window(std::size_t m, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, sigma);
    Window w;
    w.duration_s = static_cast<double>(m) / 100.0;
    w.values.resize(m);
    for (auto& v : w.values) v = g(rng);
    return w;
}

Window tone_window(std::size_t m, double amplitude, double freq_hz = 3.0) {
    Window w;
    w.duration_s = static_cast<double>(m) / 100.0;
    w.values.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        w.values[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz *
                                           static_cast<double>(i) / 100.0);
    }
    return w;
}

}  // namespace

TEST_CASE("identical high-energy tones calibrate at the initial threshold") {
    std::vector<Window> tones(40, tone_window(100, 1.0));
    auto profile = calibrate_energy_threshold(tones, tones, 16.0, 99);
    CHECK(profile.threshold == 1e-10);
    CHECK(profile.retained_fraction == 1.0);
    CHECK(profile.qos_rsnr_db == 16.0);
}

TEST_CASE("pure noise fails calibration with a recorded trajectory") {
    std::mt19937_64 rng(13);
    std::vector<Window> noise;
    for (int i = 0; i < 60; ++i) noise.push_back(noise_window(100, 1e-3, rng));
    try {
        calibrate_energy_threshold(noise, noise, 16.0, 8);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        CHECK(!e.trajectory.empty());
        for (double r : e.trajectory) CHECK(r < 16.0);
    }
}

TEST_CASE("one threshold step separates noise from tone windows") {
    // tones outnumbered 5:1 and perturbed so their RSNR is high but finite;
    // at the initial threshold the noise windows (RSNR near 0 dB) drag the
    // mean under the bound, and the first 2^-8 step clears them
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> amp(0.8, 1.2);
    std::normal_distribution<double> jitter(0.0, 0.005);
    auto build = [&](std::vector<Window>& dst) {
        for (int i = 0; i < 12; ++i) {
            Window t = tone_window(100, amp(rng));
            for (auto& v : t.values) v += jitter(rng);
            dst.push_back(std::move(t));
            for (int j = 0; j < 5; ++j) dst.push_back(noise_window(100, 0.005, rng));
        }
    };
    std::vector<Window> train, val;
    build(train);
    build(val);
    auto profile = calibrate_energy_threshold(train, val, 16.0, 1);
    // noise energies (~2.5e-3) sit below the first 2^-8 step, tones far above
    CHECK(profile.threshold == doctest::Approx(1e-10 + 0.00390625).epsilon(1e-12));
    CHECK(profile.retained_fraction == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("calibration validates parameters") {
    std::vector<Window> tones(10, tone_window(50, 1.0));
    CHECK_THROWS_AS(calibrate_energy_threshold({}, tones, 16.0, 4), InsufficientDataError);
    CHECK_THROWS_AS(calibrate_energy_threshold(tones, {}, 16.0, 4), InsufficientDataError);
    CHECK_THROWS_AS(calibrate_energy_threshold(tones, tones, 16.0, 50), ParameterError);
    CHECK_THROWS_AS(calibrate_energy_threshold(tones, tones, 16.0, 0), ParameterError);

    CalibrationOptions opts;
    opts.step = -1.0;
    CHECK_THROWS_AS(calibrate_energy_threshold(tones, tones, 4, opts), ParameterError);
    opts.step = 0.5;
    opts.step_mode = ThresholdStepMode::multiplicative;
    CHECK_THROWS_AS(calibrate_energy_threshold(tones, tones, 4, opts), ParameterError);
}

TEST_CASE("multiplicative stepping climbs decades quickly") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> amp(1.6, 2.4);
    std::normal_distribution<double> jitter(0.0, 0.05);
    auto build = [&](std::vector<Window>& dst) {
        for (int i = 0; i < 10; ++i) {
            Window t = tone_window(100, amp(rng));
            for (auto& v : t.values) v += jitter(rng);
            dst.push_back(std::move(t));
            for (int j = 0; j < 5; ++j) dst.push_back(noise_window(100, 0.05, rng));
        }
    };
    std::vector<Window> train, val;
    build(train);
    build(val);
    CalibrationOptions opts;
    opts.step = 2.0;
    opts.step_mode = ThresholdStepMode::multiplicative;
    auto profile = calibrate_energy_threshold(train, val, 1, opts);
    CHECK(profile.retained_fraction == doctest::Approx(1.0 / 6.0));
    // threshold is 1e-10 * 2^n, landed above noise energy yet below tone energy
    double max_noise = 0.0, min_tone = 1e300;
    for (const auto& w : val) {
        const double e = window_energy(w);
        if (e < 10.0) {
            max_noise = std::max(max_noise, e);
        } else {
            min_tone = std::min(min_tone, e);
        }
    }
    CHECK(profile.threshold > max_noise);
    CHECK(profile.threshold <= min_tone);
}

TEST_CASE("rsnr trajectory is non-decreasing as energy tiers drop out") {
    // three energy tiers; each threshold step removes the weakest remaining
    // tier, so the validation mean RSNR ratchets upward until the sets empty
    std::mt19937_64 rng(47);
    std::vector<Window> train, val;
    auto add_tier = [&](double amp, double freq) {
        for (int i = 0; i < 20; ++i) {
            Window w = tone_window(200, amp, freq);
            std::normal_distribution<double> g(0.0, 1e-3);
            for (auto& v : w.values) v += g(rng);
            train.push_back(w);
            val.push_back(w);
        }
    };
    add_tier(3.0, 3.0);
    add_tier(0.05, 7.0);
    for (int i = 0; i < 20; ++i) {
        train.push_back(noise_window(200, 1e-3, rng));
        val.push_back(noise_window(200, 1e-3, rng));
    }

    CalibrationOptions opts;
    opts.step = 4.0;
    opts.step_mode = ThresholdStepMode::multiplicative;
    opts.qos_rsnr_db = 1e9;  // unreachable, walk the whole trajectory
    opts.max_iterations = 200;
    try {
        calibrate_energy_threshold(train, val, 2, opts);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        REQUIRE(e.trajectory.size() >= 3);
        for (std::size_t i = 1; i < e.trajectory.size(); ++i) {
            CHECK(e.trajectory[i] >= e.trajectory[i - 1] - 1e-9);
        }
    }
}

TEST_CASE("filter application matches a brute-force pass") {
    std::mt19937_64 rng(53);
    std::vector<Window> mixed;
    for (int i = 0; i < 50; ++i) {
        mixed.push_back(i % 2 == 0 ? tone_window(80, 0.5 + 0.1 * i) : noise_window(80, 0.02, rng));
    }
    EnergyFilterProfile profile;
    profile.threshold = 1.0;
    auto result = apply_energy_filter(mixed, profile);

    std::vector<const Window*> expect;
    for (const auto& w : mixed) {
        if (window_energy(w) >= 1.0) expect.push_back(&w);
    }
    REQUIRE(result.kept.size() == expect.size());
    CHECK(result.dropped_count == mixed.size() - expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CHECK(result.kept[i].values == expect[i]->values);  // order preserved
    }

    SUBCASE("threshold 0 keeps everything") {
        profile.threshold = 0.0;
        auto all = apply_energy_filter(mixed, profile);
        CHECK(all.kept.size() == mixed.size());
        CHECK(all.dropped_count == 0);
    }
    SUBCASE("threshold above the maximum drops everything") {
        profile.threshold = 1e12;
        auto none = apply_energy_filter(mixed, profile);
        CHECK(none.kept.empty());
        CHECK(none.dropped_count == mixed.size());
    }
    SUBCASE("filtering is idempotent and monotone in the threshold") {
        profile.threshold = 1.0;
        auto once = apply_energy_filter(mixed, profile);
        auto twice = apply_energy_filter(once.kept, profile);
        CHECK(twice.kept.size() == once.kept.size());
        CHECK(twice.dropped_count == 0);

        EnergyFilterProfile higher;
        higher.threshold = 2.0;
        auto strict = apply_energy_filter(mixed, higher);
        // kept set at the higher threshold is a subset of the lower one
        std::size_t j = 0;
        for (const auto& w : once.kept) {
            if (j < strict.kept.size() && strict.kept[j].values == w.values) ++j;
        }
        CHECK(j == strict.kept.size());
    }
}

TEST_CASE("filtering improves reconstruction quality of the processed stream") {
    // noise-heavy regime, as in a damped concrete deck: sensor noise rivals
    // the ring energy, so noise-only windows are incompressible and drag the
    // reconstruction quality of an unfiltered pipeline down. The direction is
    // asserted on per-window RSNR; absolute MSE would conflate it with the
    // energy composition of the scored set.
    BridgeSimConfig cfg;
    cfg.excitation_amplitude_g = 0.05;
    cfg.noise_sigma_g = 0.01;
    cfg.damping_ratio = 0.05;
    cfg.vehicle_rate_per_min = 6.0;
    cfg.seed = 99;
    auto train_trace = generate_trace(cfg, 2400.0, BridgeState::normal);
    cfg.seed = 100;
    auto val_trace = generate_trace(cfg, 1200.0, BridgeState::normal);
    auto train = windowize(train_trace, 5.0);
    auto val = windowize(val_trace, 5.0);

    EnergyFilterProfile profile;  // noise windows carry ~0.05, ring onsets more
    profile.threshold = 0.08;
    auto filtered_train = apply_energy_filter(train, profile).kept;
    REQUIRE(filtered_train.size() >= 32);
    REQUIRE(filtered_train.size() < train.size());

    auto with_filter = fit_pca_batch(filtered_train, 31);
    auto without_filter = fit_pca_batch(train, 31);

    auto mean_rsnr = [](const PcaModel& model, const std::vector<Window>& windows) {
        double acc = 0.0;
        for (const auto& w : windows) acc += rsnr_db(w, pca_reconstruct(model, w));
        return acc / static_cast<double>(windows.size());
    };
    const auto kept_val = apply_energy_filter(val, profile).kept;
    REQUIRE(!kept_val.empty());
    const double filtered_quality = mean_rsnr(with_filter, kept_val);
    const double unfiltered_quality = mean_rsnr(without_filter, val);
    CHECK(filtered_quality > unfiltered_quality);
}
