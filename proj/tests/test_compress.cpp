#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "shmedge/autoencoder.hpp"
#include "shmedge/errors.hpp"
#include "shmedge/pca.hpp"
#include "shmedge/recon_model.hpp"
#include "shmedge/synth.hpp"

using namespace shmedge;

namespace {

Window make_window(std::vector<double> v, double fs = 100.0) {
    Window w;
    w.duration_s = static_cast<double>(v.size()) / fs;
    w.values = std::move(v);
    return w;
}

std::vector<Window> gaussian_windows(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Window> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(m);
        for (auto& x : v) x = g(rng);
        Window w = make_window(std::move(v));
        w.origin_index = i * m;
        out.push_back(std::move(w));
    }
    return out;
}

// Zero-mean data confined to a rank-r subspace with decaying per-direction
// scales, plus optional isotropic noise.
std::vector<Window> subspace_windows(std::size_t n, std::size_t m, std::size_t r,
                                     std::uint64_t seed, double noise_sigma = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd raw(m, r);
    for (std::size_t i = 0; i < m * r; ++i) raw(static_cast<Eigen::Index>(i % m),
                                               static_cast<Eigen::Index>(i / m)) = g(rng);
    Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                      static_cast<Eigen::Index>(r));
    std::vector<Window> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd coef(static_cast<Eigen::Index>(r));
        for (std::size_t j = 0; j < r; ++j) {
            const double scale = 1.0 - 0.7 * static_cast<double>(j) / static_cast<double>(r);
            coef(static_cast<Eigen::Index>(j)) = scale * g(rng);
        }
        Eigen::VectorXd x = basis * coef;
        std::vector<double> v(m);
        for (std::size_t j = 0; j < m; ++j) {
            v[j] = x(static_cast<Eigen::Index>(j)) + (noise_sigma > 0 ? noise_sigma * g(rng) : 0.0);
        }
        Window w = make_window(std::move(v));
        w.origin_index = i * m;
        out.push_back(std::move(w));
    }
    return out;
}

double mean_reconstruction_mse(const PcaModel& model, const std::vector<Window>& windows) {
    double acc = 0.0;
    for (const auto& w : windows) {
        Window r = pca_reconstruct(model, w);
        double e = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w.values[i] - r.values[i];
            e += d * d;
        }
        acc += e / static_cast<double>(w.size());
    }
    return acc / static_cast<double>(windows.size());
}

}  // namespace

TEST_CASE("rank-1 data yields a component along the line") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> dir{0.6, -0.8, 0.0, 0.0};
    std::vector<Window> data;
    for (int i = 0; i < 50; ++i) {
        const double t = g(rng);
        data.push_back(make_window({t * dir[0], t * dir[1], t * dir[2], t * dir[3]}));
    }
    auto model = fit_pca_batch(data, 1);
    CHECK(std::abs(std::abs(model.components(0, 0) * dir[0] + model.components(1, 0) * dir[1]) -
                   1.0) < 1e-10);
    CHECK(mean_reconstruction_mse(model, data) < 1e-12);
}

TEST_CASE("full basis reconstructs exactly") {
    auto data = gaussian_windows(40, 12, 88);
    auto model = fit_pca_batch(data, 12);
    CHECK(mean_reconstruction_mse(model, data) < 1e-10);
}

TEST_CASE("eigenvalues match an independent Jacobi eigensolver") {
    auto data = gaussian_windows(200, 64, 2024);
    auto model = fit_pca_batch(data, 16);

    std::vector<std::vector<double>> rows;
    rows.reserve(data.size());
    for (const auto& w : data) rows.push_back(w.values);
    auto ref = oracle::jacobi_eigen(oracle::sample_covariance(rows));

    REQUIRE(model.eigenvalues.size() == 64);
    for (int i = 0; i < 64; ++i) {
        CHECK(model.eigenvalues(i) ==
              doctest::Approx(ref.values[static_cast<std::size_t>(i)]).epsilon(1e-8));
    }
    // top components span the same directions (up to sign)
    for (int j = 0; j < 16; ++j) {
        double dot = 0.0;
        for (int i = 0; i < 64; ++i) {
            dot += model.components(i, j) * ref.vectors[static_cast<std::size_t>(j)]
                                                       [static_cast<std::size_t>(i)];
        }
        CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("components are orthonormal and sign-fixed") {
    auto data = gaussian_windows(100, 20, 3);
    auto model = fit_pca_batch(data, 8);
    Eigen::MatrixXd gram = model.components.transpose() * model.components;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
    for (int j = 0; j < 8; ++j) {
        Eigen::Index argmax;
        model.components.col(j).cwiseAbs().maxCoeff(&argmax);
        CHECK(model.components(argmax, j) > 0.0);
    }
    CHECK(model.compression_factor() == doctest::Approx(2.5));
}

TEST_CASE("batch fit validates inputs") {
    auto one = gaussian_windows(1, 8, 1);
    CHECK_THROWS_AS(fit_pca_batch(one, 2), InsufficientDataError);
    auto data = gaussian_windows(10, 8, 1);
    CHECK_THROWS_AS(fit_pca_batch(data, 9), ParameterError);
    CHECK_THROWS_AS(fit_pca_batch(data, 0), ParameterError);
    auto ragged = data;
    ragged.back().values.pop_back();
    CHECK_THROWS_AS(fit_pca_batch(ragged, 2), DimensionError);
}

TEST_CASE("rank-deficient covariance pads with zero eigenvalues") {
    auto data = subspace_windows(60, 16, 3, 9);
    auto model = fit_pca_batch(data, 8);
    for (int i = 3; i < 16; ++i) CHECK(std::abs(model.eigenvalues(i)) < 1e-10);
    for (int i = 0; i < 16; ++i) CHECK(model.eigenvalues(i) >= 0.0);
    CHECK(mean_reconstruction_mse(model, data) < 1e-12);  // k=8 covers rank 3
}

TEST_CASE("reconstruction fixed points and orthogonal complement") {
    auto data = gaussian_windows(80, 10, 17);
    auto model = fit_pca_batch(data, 4);

    Window mean_w = make_window(std::vector<double>(model.mean.data(), model.mean.data() + 10));
    auto rec = pca_reconstruct(model, mean_w);
    for (int i = 0; i < 10; ++i) CHECK(rec.values[static_cast<std::size_t>(i)] ==
                                       doctest::Approx(model.mean(i)).epsilon(1e-12));

    // mean + span vector is a fixed point
    Eigen::VectorXd in_span = model.mean + model.components * Eigen::Vector4d{1.0, -2.0, 0.5, 3.0};
    Window span_w = make_window(std::vector<double>(in_span.data(), in_span.data() + 10));
    rec = pca_reconstruct(model, span_w);
    for (int i = 0; i < 10; ++i) {
        CHECK(rec.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(in_span(i)).epsilon(1e-10));
    }

    // orthogonal residual collapses to the mean with MSE = ||w - mean||^2 / M
    Eigen::VectorXd q = Eigen::VectorXd::Random(10);
    q -= model.components * (model.components.transpose() * q);
    q.normalize();
    Eigen::VectorXd off = model.mean + 2.0 * q;
    Window off_w = make_window(std::vector<double>(off.data(), off.data() + 10));
    rec = pca_reconstruct(model, off_w);
    double mse = 0.0;
    for (int i = 0; i < 10; ++i) {
        CHECK(rec.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(model.mean(i)).epsilon(1e-10));
        const double d = off_w.values[static_cast<std::size_t>(i)] -
                         rec.values[static_cast<std::size_t>(i)];
        mse += d * d;
    }
    CHECK(mse / 10.0 == doctest::Approx(4.0 / 10.0).epsilon(1e-10));

    // projector idempotence
    auto twice = pca_reconstruct(model, pca_reconstruct(model, off_w));
    for (int i = 0; i < 10; ++i) {
        CHECK(twice.values[static_cast<std::size_t>(i)] ==
              doctest::Approx(rec.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }

    Window wrong = make_window(std::vector<double>(9, 0.0));
    CHECK_THROWS_AS(pca_reconstruct(model, wrong), DimensionError);
}

TEST_CASE("reconstruction error is monotone in k and matches the eigenvalue tail") {
    auto data = gaussian_windows(150, 24, 55);
    const double n = static_cast<double>(data.size());
    double prev = 1e300;
    for (int k : {2, 4, 8, 16, 24}) {
        auto model = fit_pca_batch(data, k);
        const double mse = mean_reconstruction_mse(model, data);
        CHECK(mse <= prev + 1e-12);
        prev = mse;

        // Eckart-Young: residual energy equals the eigenvalue tail. The
        // covariance carries 1/(N-1), the empirical mean MSE carries 1/N.
        double tail = 0.0;
        for (int i = k; i < 24; ++i) tail += model.eigenvalues(i);
        const double want = tail * (n - 1.0) / n / 24.0;
        if (want > 0) CHECK(mse == doctest::Approx(want).epsilon(1e-6));
    }
}

TEST_CASE("streaming tracker converges to the batch subspace") {
    auto data = subspace_windows(4000, 64, 8, 71, 1e-3);
    auto batch = fit_pca_batch(data, 8);
    auto state = fit_pca_streaming(data, 8, 200, 10, 123);
    CHECK(principal_angle_rad(batch.components, state.components_estimate) <= 1e-3);

    // orthonormal after updates
    Eigen::MatrixXd gram = state.components_estimate.transpose() * state.components_estimate;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(state.blocks_seen == 200);  // 20 blocks x 10 passes
    CHECK(state.samples_seen == 40000);
}

TEST_CASE("repeated single window leaves the zero-variance flag set") {
    std::vector<Window> rep(8, make_window({1.0, 2.0, 3.0, 4.0}));
    auto state = fit_pca_streaming(rep, 1, 4, 2, 5);
    CHECK(state.zero_variance);
    CHECK(state.components_estimate.col(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) {
        CHECK(state.running_mean(i) == doctest::Approx(static_cast<double>(i + 1)).epsilon(1e-12));
    }
    // freezing still yields a usable reconstructor: x_hat = mean for any input
    auto frozen = hpca_to_pca(state);
    auto rec = pca_reconstruct(frozen, rep.front());
    (void)rec;
}

TEST_CASE("streaming fit is deterministic and validates block size") {
    auto data = subspace_windows(600, 32, 4, 81, 1e-3);
    auto s1 = fit_pca_streaming(data, 4, 100, 3, 99);
    auto s2 = fit_pca_streaming(data, 4, 100, 3, 99);
    CHECK(s1.components_estimate == s2.components_estimate);
    CHECK(s1.scale == s2.scale);

    auto s3 = fit_pca_streaming(data, 4, 100, 3, 100);
    CHECK(s1.components_estimate != s3.components_estimate);  // init differs

    auto state = hpca_init(32, 4, 1);
    std::vector<Window> tiny(data.begin(), data.begin() + 3);
    CHECK_THROWS_AS(hpca_update(state, tiny), InsufficientDataError);
}

TEST_CASE("analytic autoencoder gradients match central finite differences") {
    auto data = gaussian_windows(6, 8, 314);
    AeTrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    auto model = fit_autoencoder(data, 2, cfg);
    auto grads = ae_loss_gradients(model, data);

    const double h = 1e-6;
    auto check_entry = [&](double* param, double analytic) {
        const double keep = *param;
        *param = keep + h;
        const double up = ae_batch_loss(model, data);
        *param = keep - h;
        const double down = ae_batch_loss(model, data);
        *param = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        CHECK(std::abs(numeric - analytic) / denom < 1e-4);
    };

    for (int r = 0; r < model.enc_weights.rows(); ++r) {
        for (int c = 0; c < model.enc_weights.cols(); ++c) {
            check_entry(&model.enc_weights(r, c), grads.d_enc_weights(r, c));
        }
    }
    for (int r = 0; r < model.dec_weights.rows(); ++r) {
        for (int c = 0; c < model.dec_weights.cols(); ++c) {
            check_entry(&model.dec_weights(r, c), grads.d_dec_weights(r, c));
        }
    }
    for (int i = 0; i < model.enc_bias.size(); ++i) {
        check_entry(&model.enc_bias(i), grads.d_enc_bias(i));
    }
    for (int i = 0; i < model.dec_bias.size(); ++i) {
        check_entry(&model.dec_bias(i), grads.d_dec_bias(i));
    }
}

TEST_CASE("linear autoencoder recovers a linear subspace") {
    auto data = subspace_windows(500, 32, 4, 202);
    double var = 0.0;
    for (const auto& w : data) {
        for (double v : w.values) var += v * v;  // data is zero-mean by construction
    }
    var /= static_cast<double>(500 * 32);

    AeTrainConfig cfg;
    cfg.hidden_activation = Activation::identity;
    cfg.output_activation = Activation::identity;
    cfg.epochs = 200;
    cfg.seed = 4;
    auto model = fit_autoencoder(data, 4, cfg);
    CHECK(model.train_meta.final_loss <= 0.05 * var);
}

TEST_CASE("zero-epoch training returns the untouched initialization") {
    auto data = gaussian_windows(10, 6, 12);
    AeTrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 77;
    auto a = fit_autoencoder(data, 2, cfg);
    auto b = fit_autoencoder(data, 2, cfg);
    CHECK(a.enc_weights == b.enc_weights);
    CHECK(a.dec_weights == b.dec_weights);
    CHECK(std::isnan(a.train_meta.final_loss));
    CHECK(a.train_meta.loss_trajectory.empty());
}

TEST_CASE("training is seed-deterministic with a monotone smoothed loss") {
    BridgeSimConfig synth_cfg;
    synth_cfg.seed = 3;
    auto trace = generate_trace(synth_cfg, 600.0, BridgeState::normal);
    AccelTrace t = trace;
    std::vector<Window> data;
    for (std::size_t off = 0; off + 50 <= t.samples.size(); off += 50) {
        Window w;
        w.duration_s = 0.5;
        w.origin_index = off;
        w.values.assign(t.samples.begin() + static_cast<std::ptrdiff_t>(off),
                        t.samples.begin() + static_cast<std::ptrdiff_t>(off + 50));
        data.push_back(std::move(w));
    }

    AeTrainConfig cfg;
    cfg.seed = 21;
    auto a = fit_autoencoder(data, 8, cfg);
    auto b = fit_autoencoder(data, 8, cfg);
    CHECK(a.enc_weights == b.enc_weights);
    CHECK(a.dec_bias == b.dec_bias);
    CHECK(a.train_meta.loss_trajectory.size() == 80);
    CHECK(a.train_meta.final_loss == a.train_meta.loss_trajectory.back());

    // window-10 moving average never increases
    const auto& traj = a.train_meta.loss_trajectory;
    auto smoothed = [&](std::size_t end) {
        const std::size_t start = end >= 10 ? end - 10 : 0;
        double acc = 0.0;
        for (std::size_t i = start; i < end; ++i) acc += traj[i];
        return acc / static_cast<double>(end - start);
    };
    for (std::size_t e = 11; e <= traj.size(); ++e) {
        CHECK(smoothed(e) <= smoothed(e - 1) * (1.0 + 1e-9));
    }
}

TEST_CASE("diverging training reports the trajectory") {
    auto data = gaussian_windows(40, 8, 31);
    // Adam steps are bounded by lr, so the weights land near lr after one
    // update; lr^2-scale activations then overflow the squared residual
    AeTrainConfig cfg;
    cfg.learning_rate = 1e160;
    cfg.epochs = 50;
    cfg.seed = 1;
    try {
        fit_autoencoder(data, 2, cfg);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(!e.trajectory.empty());
    }
}

TEST_CASE("decoder-only arithmetic and activation range") {
    auto data = gaussian_windows(5, 6, 44);
    AeTrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 2;
    auto model = fit_autoencoder(data, 3, cfg);

    model.enc_weights.setZero();
    model.enc_bias.setZero();
    model.dec_weights.setZero();
    model.dec_bias.setZero();
    model.hidden_activation = Activation::identity;
    auto rec = ae_reconstruct(model, data.front());
    for (double v : rec.values) CHECK(v == 0.0);

    // transposed orthonormal pair with identity activations acts as a PCA
    // projector with zero mean
    auto sub = subspace_windows(50, 6, 2, 45);
    auto pca = fit_pca_batch(sub, 2);
    model.enc_weights = pca.components.transpose();
    model.dec_weights = pca.components;
    model.output_activation = Activation::identity;
    PcaModel zero_mean = pca;
    zero_mean.mean.setZero();
    for (const auto& w : sub) {
        auto ae = ae_reconstruct(model, w);
        auto pr = pca_reconstruct(zero_mean, w);
        for (std::size_t i = 0; i < ae.values.size(); ++i) {
            CHECK(ae.values[i] == doctest::Approx(pr.values[i]).epsilon(1e-10));
        }
    }

    model.output_activation = Activation::relu;
    for (const auto& w : sub) {
        auto ae = ae_reconstruct(model, w);
        for (double v : ae.values) CHECK(v >= 0.0);
    }

    Window wrong = make_window(std::vector<double>(5, 1.0));
    CHECK_THROWS_AS(ae_reconstruct(model, wrong), DimensionError);
}

TEST_CASE("variant reconstructor dispatches to the underlying engine") {
    auto data = gaussian_windows(30, 8, 61);
    auto pca = fit_pca_batch(data, 3);
    ReconModel as_variant = pca;
    auto direct = pca_reconstruct(pca, data.front());
    auto via = reconstruct(as_variant, data.front());
    CHECK(direct.values == via.values);
    CHECK(model_input_dim(as_variant) == 8);
    CHECK(model_latent_dim(as_variant) == 3);
}
