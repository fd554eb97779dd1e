#include "shmedge/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "shmedge/errors.hpp"

namespace shmedge {

namespace {

Eigen::MatrixXd stack_cols(const std::vector<Window>& windows, int expected_dim) {
    const auto n = static_cast<Eigen::Index>(windows.size());
    Eigen::MatrixXd x(expected_dim, n);  // samples as columns
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& w = windows[static_cast<std::size_t>(i)];
        if (static_cast<int>(w.size()) != expected_dim) {
            throw DimensionError("window " + std::to_string(i) + " has length " +
                                 std::to_string(w.size()) + ", expected " +
                                 std::to_string(expected_dim));
        }
        x.col(i) = Eigen::Map<const Eigen::VectorXd>(w.values.data(), expected_dim);
    }
    return x;
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation act) {
    if (act == Activation::identity) return pre;
    return pre.cwiseMax(0.0);
}

// elementwise derivative evaluated at the pre-activation
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& pre, Activation act) {
    if (act == Activation::identity) return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    return (pre.array() > 0.0).cast<double>().matrix();
}

struct BatchGrads {
    Eigen::MatrixXd d_enc_w, d_dec_w;
    Eigen::VectorXd d_enc_b, d_dec_b;
    double loss = 0.0;
};

// Forward + backward over a column batch. Loss is the batch mean of the
// per-window MSE (1/M sum of squared residuals).
BatchGrads backprop(const AeModel& m, const Eigen::MatrixXd& x) {
    const auto batch = static_cast<double>(x.cols());
    const auto dim = static_cast<double>(x.rows());

    const Eigen::MatrixXd h_pre = (m.enc_weights * x).colwise() + m.enc_bias;
    const Eigen::MatrixXd h = activate(h_pre, m.hidden_activation);
    const Eigen::MatrixXd y_pre = (m.dec_weights * h).colwise() + m.dec_bias;
    const Eigen::MatrixXd y = activate(y_pre, m.output_activation);

    const Eigen::MatrixXd resid = y - x;

    BatchGrads g;
    g.loss = resid.squaredNorm() / (dim * batch);

    const Eigen::MatrixXd d_y = resid * (2.0 / (dim * batch));
    const Eigen::MatrixXd d_y_pre = d_y.cwiseProduct(activation_grad(y_pre, m.output_activation));
    g.d_dec_w = d_y_pre * h.transpose();
    g.d_dec_b = d_y_pre.rowwise().sum();

    const Eigen::MatrixXd d_h = m.dec_weights.transpose() * d_y_pre;
    const Eigen::MatrixXd d_h_pre = d_h.cwiseProduct(activation_grad(h_pre, m.hidden_activation));
    g.d_enc_w = d_h_pre * x.transpose();
    g.d_enc_b = d_h_pre.rowwise().sum();
    return g;
}

struct AdamSlot {
    Eigen::ArrayXXd m, v;
    AdamSlot(Eigen::Index rows, Eigen::Index cols)
        : m(Eigen::ArrayXXd::Zero(rows, cols)), v(Eigen::ArrayXXd::Zero(rows, cols)) {}

    template <typename Param, typename Grad>
    void step(Param& param, const Grad& grad, const AeTrainConfig& cfg, long t) {
        const Eigen::ArrayXXd g = grad.array();
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
        const Eigen::ArrayXXd update =
            cfg.learning_rate * (m / bc1) / ((v / bc2).sqrt() + cfg.adam_epsilon);
        param.array() -= update;
    }
};

}  // namespace

AeModel fit_autoencoder(const std::vector<Window>& windows, int k, const AeTrainConfig& cfg) {
    if (windows.empty()) throw InsufficientDataError("no training windows");
    const int m = static_cast<int>(windows.front().size());
    if (k < 1 || k > m) throw ParameterError("k must be in [1, window length]");
    if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.learning_rate <= 0) {
        throw ParameterError("bad training configuration");
    }

    std::mt19937_64 rng(cfg.seed);

    AeModel model;
    model.k = k;
    model.input_dim = m;
    model.hidden_activation = cfg.hidden_activation;
    model.output_activation = cfg.output_activation;
    model.train_meta.epochs = cfg.epochs;
    model.train_meta.learning_rate = cfg.learning_rate;
    model.train_meta.final_loss = std::numeric_limits<double>::quiet_NaN();

    // Glorot uniform
    auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        std::uniform_real_distribution<double> u(-limit, limit);
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = u(rng);
        }
        return w;
    };
    model.enc_weights = glorot(k, m);
    model.enc_bias = Eigen::VectorXd::Zero(k);
    model.dec_weights = glorot(m, k);
    model.dec_bias = Eigen::VectorXd::Zero(m);

    if (cfg.epochs == 0) return model;

    const Eigen::MatrixXd data = stack_cols(windows, m);
    const auto n = data.cols();

    AdamSlot slot_ew(k, m), slot_eb(k, 1), slot_dw(m, k), slot_db(m, 1);
    long t = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Eigen::MatrixXd batch(m, len);
            for (Eigen::Index i = 0; i < len; ++i) {
                batch.col(i) = data.col(order[static_cast<std::size_t>(start + i)]);
            }
            BatchGrads g = backprop(model, batch);
            ++t;
            slot_ew.step(model.enc_weights, g.d_enc_w, cfg, t);
            slot_eb.step(model.enc_bias, g.d_enc_b, cfg, t);
            slot_dw.step(model.dec_weights, g.d_dec_w, cfg, t);
            slot_db.step(model.dec_bias, g.d_dec_b, cfg, t);
        }
        const double epoch_loss = backprop(model, data).loss;
        model.train_meta.loss_trajectory.push_back(epoch_loss);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("loss went non-finite at epoch " + std::to_string(epoch),
                                model.train_meta.loss_trajectory);
        }
    }
    model.train_meta.final_loss = model.train_meta.loss_trajectory.back();
    return model;
}

AeModel fit_autoencoder(const std::vector<Window>& windows, int k, int epochs, double lr,
                        std::uint64_t seed) {
    AeTrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.seed = seed;
    return fit_autoencoder(windows, k, cfg);
}

Window ae_reconstruct(const AeModel& model, const Window& w) {
    if (static_cast<int>(w.size()) != model.input_dim) {
        throw DimensionError("window length " + std::to_string(w.size()) +
                             " does not match model dimension " +
                             std::to_string(model.input_dim));
    }
    const Eigen::Map<const Eigen::VectorXd> x(w.values.data(), model.input_dim);
    Eigen::VectorXd h_pre = model.enc_weights * x + model.enc_bias;
    if (model.hidden_activation == Activation::relu) h_pre = h_pre.cwiseMax(0.0);
    Eigen::VectorXd y = model.dec_weights * h_pre + model.dec_bias;
    if (model.output_activation == Activation::relu) y = y.cwiseMax(0.0);

    Window out = w;
    Eigen::Map<Eigen::VectorXd>(out.values.data(), model.input_dim) = y;
    return out;
}

AeGradients ae_loss_gradients(const AeModel& model, const std::vector<Window>& batch) {
    if (batch.empty()) throw InsufficientDataError("empty batch");
    const Eigen::MatrixXd x = stack_cols(batch, model.input_dim);
    BatchGrads g = backprop(model, x);
    return AeGradients{std::move(g.d_enc_w), std::move(g.d_enc_b), std::move(g.d_dec_w),
                       std::move(g.d_dec_b), g.loss};
}

double ae_batch_loss(const AeModel& model, const std::vector<Window>& batch) {
    if (batch.empty()) throw InsufficientDataError("empty batch");
    const Eigen::MatrixXd x = stack_cols(batch, model.input_dim);
    const Eigen::MatrixXd h = activate((model.enc_weights * x).colwise() + model.enc_bias,
                                       model.hidden_activation);
    const Eigen::MatrixXd y = activate((model.dec_weights * h).colwise() + model.dec_bias,
                                       model.output_activation);
    return (y - x).squaredNorm() / static_cast<double>(x.rows() * x.cols());
}

}  // namespace shmedge
