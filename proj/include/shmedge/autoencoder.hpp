#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shmedge/types.hpp"

namespace shmedge {

enum class Activation : std::uint8_t { relu, identity };

// Single-hidden-layer autoencoder, M -> k -> M.
struct AeModel {
    Eigen::MatrixXd enc_weights;  // k x M
    Eigen::VectorXd enc_bias;     // k
    Eigen::MatrixXd dec_weights;  // M x k
    Eigen::VectorXd dec_bias;     // M
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::identity;
    int k = 0;
    int input_dim = 0;

    struct TrainMeta {
        int epochs = 0;
        double learning_rate = 0.0;
        double final_loss = 0.0;
        std::vector<double> loss_trajectory;  // mean MSE per epoch
    } train_meta;
};

struct AeTrainConfig {
    int epochs = 80;
    double learning_rate = 1e-3;
    int batch_size = 32;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::identity;
    std::uint64_t seed = 0;
};

// Minimizes mean squared reconstruction error with Adam over shuffled
// mini-batches. Deterministic for a fixed seed. epochs == 0 returns the
// untouched random initialization (final_loss is NaN, trajectory empty).
// Throws TrainingError (carrying the loss trajectory) if the loss goes
// non-finite.
AeModel fit_autoencoder(const std::vector<Window>& windows, int k, const AeTrainConfig& cfg);

AeModel fit_autoencoder(const std::vector<Window>& windows, int k, int epochs, double lr,
                        std::uint64_t seed);

Window ae_reconstruct(const AeModel& model, const Window& w);

// Analytic loss gradients over a batch, for optimizer verification.
struct AeGradients {
    Eigen::MatrixXd d_enc_weights;
    Eigen::VectorXd d_enc_bias;
    Eigen::MatrixXd d_dec_weights;
    Eigen::VectorXd d_dec_bias;
    double loss = 0.0;
};

AeGradients ae_loss_gradients(const AeModel& model, const std::vector<Window>& batch);

double ae_batch_loss(const AeModel& model, const std::vector<Window>& batch);

}  // namespace shmedge
