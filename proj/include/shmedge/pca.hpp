#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "shmedge/types.hpp"

namespace shmedge {

// Rank-k linear reconstructor: x_hat = mean + V V^T (x - mean), V orthonormal.
struct PcaModel {
    Eigen::VectorXd mean;        // length M, training mean
    Eigen::MatrixXd components;  // M x k, columns orthonormal, descending variance
    Eigen::VectorXd eigenvalues; // full spectrum (length M), descending; kept for diagnostics
    int k = 0;
    int input_dim = 0;  // M

    double compression_factor() const { return k > 0 ? static_cast<double>(input_dim) / k : 0.0; }
};

// Fits mean + top-k eigenvectors of the sample covariance (1/(N-1) scaling).
// Column signs are fixed so the largest-magnitude entry of each component is
// positive. Rank-deficient inputs yield zero eigenvalues and null-space
// directions for the trailing components.
PcaModel fit_pca_batch(const std::vector<Window>& windows, int k);

Window pca_reconstruct(const PcaModel& model, const Window& w);

// Streaming subspace tracker. Keeps an M x k orthonormal estimate plus a
// scale vector, blended with each incoming block's covariance action and
// re-orthonormalized; history weight grows as blocks_seen/(blocks_seen+1) so
// the update sequence approximates the covariance of everything seen. Never
// forms an M x M matrix.
struct HpcaState {
    Eigen::MatrixXd components_estimate;  // M x k, orthonormal
    Eigen::VectorXd scale;                // k, current per-direction variance estimate
    Eigen::VectorXd running_mean;         // M
    std::uint64_t samples_seen = 0;
    std::uint64_t blocks_seen = 0;
    double history_weight = 0.0;  // weight applied to the carried subspace at the last update
    std::uint64_t rng_seed = 0;
    bool zero_variance = false;  // set when every seen sample was identical
    int k = 0;
    int input_dim = 0;

    bool initialized() const { return input_dim > 0; }
};

HpcaState hpca_init(int input_dim, int k, std::uint64_t seed);

// One block update. Block must hold at least k windows.
void hpca_update(HpcaState& state, const std::vector<Window>& block);

// Convenience driver: partitions `windows` into consecutive blocks of
// block_size (final short block folded into its predecessor) and applies
// hpca_update over `passes` sweeps.
HpcaState fit_pca_streaming(const std::vector<Window>& windows, int k, std::size_t block_size,
                            int passes, std::uint64_t seed);

// Freezes the tracked subspace into the batch model shape for scoring and
// persistence. Eigenvalue diagnostics carry the tracker's scale estimates.
PcaModel hpca_to_pca(const HpcaState& state);

// Largest canonical angle (radians) between the column spaces of two
// orthonormal matrices of equal shape.
double principal_angle_rad(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2);

}  // namespace shmedge
