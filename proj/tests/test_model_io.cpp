#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "shmedge/errors.hpp"
#include "shmedge/model_io.hpp"
#include "shmedge/pipeline.hpp"

using namespace shmedge;

namespace {

std::vector<Window> gaussian_windows(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Window> out;
    for (std::size_t i = 0; i < n; ++i) {
        Window w;
        w.duration_s = static_cast<double>(m) / 100.0;
        w.origin_index = i * m;
        w.values.resize(m);
        for (auto& x : w.values) x = g(rng);
        out.push_back(std::move(w));
    }
    return out;
}

ModelBundle pca_bundle() {
    auto data = gaussian_windows(60, 16, 42);
    ModelBundle bundle;
    bundle.model = fit_pca_batch(data, 5);
    bundle.filter.threshold = 0.125;
    bundle.filter.qos_rsnr_db = 16.0;
    bundle.filter.retained_fraction = 0.83;
    bundle.detector.mu = 0.2;
    bundle.detector.sigma = 0.05;
    bundle.detector.mse_threshold = 0.35;
    bundle.detector.output_dim_minutes = 120;
    bundle.detector.input_dim_s = 5.0;
    bundle.detector.calibration_hash = 0xdeadbeef;
    bundle.domain = SpectralDomain::fft;
    return bundle;
}

std::string serialized(const ModelBundle& bundle,
                       NumericPrecision precision = NumericPrecision::f64) {
    std::ostringstream out;
    save_model(out, bundle, precision);
    return out.str();
}

ModelBundle parsed(const std::string& bytes) {
    std::istringstream in(bytes);
    return load_model(in);
}

}  // namespace

TEST_CASE("pca bundle round-trips bit-exactly") {
    auto bundle = pca_bundle();
    auto loaded = parsed(serialized(bundle));

    const auto& a = std::get<PcaModel>(bundle.model);
    const auto& b = std::get<PcaModel>(loaded.model);
    CHECK(a.mean == b.mean);
    CHECK(a.components == b.components);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(a.k == b.k);
    CHECK(a.input_dim == b.input_dim);
    CHECK(loaded.filter.threshold == bundle.filter.threshold);
    CHECK(loaded.filter.qos_rsnr_db == bundle.filter.qos_rsnr_db);
    CHECK(loaded.filter.step == bundle.filter.step);
    CHECK(loaded.filter.retained_fraction == bundle.filter.retained_fraction);
    CHECK(loaded.detector.mse_threshold == bundle.detector.mse_threshold);
    CHECK(loaded.detector.mu == bundle.detector.mu);
    CHECK(loaded.detector.sigma == bundle.detector.sigma);
    CHECK(loaded.detector.output_dim_minutes == bundle.detector.output_dim_minutes);
    CHECK(loaded.detector.input_dim_s == bundle.detector.input_dim_s);
    CHECK(loaded.detector.calibration_hash == bundle.detector.calibration_hash);
    CHECK(loaded.domain == SpectralDomain::fft);

    // serialization is deterministic
    CHECK(serialized(bundle) == serialized(loaded));
}

TEST_CASE("autoencoder bundle round-trips with training metadata") {
    auto data = gaussian_windows(50, 12, 7);
    AeTrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 3;
    ModelBundle bundle;
    bundle.model = fit_autoencoder(data, 4, cfg);
    auto loaded = parsed(serialized(bundle));

    const auto& a = std::get<AeModel>(bundle.model);
    const auto& b = std::get<AeModel>(loaded.model);
    CHECK(a.enc_weights == b.enc_weights);
    CHECK(a.enc_bias == b.enc_bias);
    CHECK(a.dec_weights == b.dec_weights);
    CHECK(a.dec_bias == b.dec_bias);
    CHECK(a.hidden_activation == b.hidden_activation);
    CHECK(a.output_activation == b.output_activation);
    CHECK(a.train_meta.epochs == b.train_meta.epochs);
    CHECK(a.train_meta.learning_rate == b.train_meta.learning_rate);
    CHECK(a.train_meta.final_loss == b.train_meta.final_loss);
    CHECK(a.train_meta.loss_trajectory == b.train_meta.loss_trajectory);
}

TEST_CASE("streaming state round-trips and freezes identically") {
    auto data = gaussian_windows(300, 20, 9);
    ModelBundle bundle;
    bundle.model = fit_pca_streaming(data, 6, 50, 2, 17);
    auto loaded = parsed(serialized(bundle));

    const auto& a = std::get<HpcaState>(bundle.model);
    const auto& b = std::get<HpcaState>(loaded.model);
    CHECK(a.components_estimate == b.components_estimate);
    CHECK(a.scale == b.scale);
    CHECK(a.running_mean == b.running_mean);
    CHECK(a.samples_seen == b.samples_seen);
    CHECK(a.blocks_seen == b.blocks_seen);
    CHECK(a.history_weight == b.history_weight);
    CHECK(a.rng_seed == b.rng_seed);
    CHECK(a.zero_variance == b.zero_variance);

    auto frozen_a = std::get<PcaModel>(bundle.reconstructor());
    auto frozen_b = std::get<PcaModel>(loaded.reconstructor());
    CHECK(frozen_a.components == frozen_b.components);
    CHECK(frozen_a.mean == frozen_b.mean);
}

TEST_CASE("f32 persistence quantizes weights once and is then stable") {
    auto bundle = pca_bundle();
    auto bytes32 = serialized(bundle, NumericPrecision::f32);
    CHECK(bytes32.size() < serialized(bundle).size());

    auto loaded = parsed(bytes32);
    const auto& a = std::get<PcaModel>(bundle.model);
    const auto& b = std::get<PcaModel>(loaded.model);
    for (int i = 0; i < a.mean.size(); ++i) {
        CHECK(b.mean(i) == static_cast<double>(static_cast<float>(a.mean(i))));
    }
    for (int i = 0; i < a.components.size(); ++i) {
        CHECK(*(b.components.data() + i) ==
              static_cast<double>(static_cast<float>(*(a.components.data() + i))));
    }
    // profile scalars stay at full precision regardless of the weight flag
    CHECK(loaded.filter.threshold == bundle.filter.threshold);
    CHECK(loaded.detector.mse_threshold == bundle.detector.mse_threshold);

    // a quantized model re-saves byte-identically
    CHECK(serialized(loaded, NumericPrecision::f32) == bytes32);
}

TEST_CASE("corruption and truncation are rejected") {
    auto bytes = serialized(pca_bundle());

    SUBCASE("truncated stream") {
        for (std::size_t cut : {bytes.size() - 1, bytes.size() - 7, bytes.size() / 2,
                                std::size_t{6}}) {
            CHECK_THROWS_AS(parsed(bytes.substr(0, cut)), FormatError);
        }
    }
    SUBCASE("flipped payload byte breaks the checksum") {
        auto bad = bytes;
        bad[bytes.size() / 2] = static_cast<char>(bad[bytes.size() / 2] ^ 0x40);
        CHECK_THROWS_AS(parsed(bad), FormatError);
    }
    SUBCASE("wrong magic") {
        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_AS(parsed(bad), FormatError);
    }
    SUBCASE("unsupported version") {
        auto bad = bytes;
        bad[4] = '\x7f';  // version lives right after the magic
        CHECK_THROWS_AS(parsed(bad), FormatError);
    }
    SUBCASE("trailing garbage") {
        CHECK_THROWS_AS(parsed(bytes + "extra"), FormatError);
    }
}

TEST_CASE("saved and reloaded models score identically") {
    auto data = gaussian_windows(120, 24, 77);
    std::vector<Window> train(data.begin(), data.begin() + 100);
    std::vector<Window> probe(data.begin() + 20, data.begin() + 120);

    ModelBundle bundle;
    bundle.model = fit_pca_batch(train, 6);
    auto loaded = parsed(serialized(bundle));

    auto before = score_pipeline(bundle, probe);
    auto after = score_pipeline(loaded, probe);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].mse == after[i].mse);  // bit-identical at f64
        CHECK(before[i].kept == after[i].kept);
    }
}

TEST_CASE("file round trip") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "shmedge_model_io_test.shmm").string();
    auto bundle = pca_bundle();
    save_model_file(path, bundle);
    auto loaded = load_model_file(path);
    CHECK(std::get<PcaModel>(loaded.model).components ==
          std::get<PcaModel>(bundle.model).components);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_model_file(path), ParseError);
}
