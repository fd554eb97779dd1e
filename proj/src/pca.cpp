#include "shmedge/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "shmedge/errors.hpp"

namespace shmedge {

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Window>& windows, int expected_dim) {
    const auto n = static_cast<Eigen::Index>(windows.size());
    Eigen::MatrixXd x(n, expected_dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& w = windows[static_cast<std::size_t>(i)];
        if (static_cast<int>(w.size()) != expected_dim) {
            throw DimensionError("window " + std::to_string(i) + " has length " +
                                 std::to_string(w.size()) + ", expected " +
                                 std::to_string(expected_dim));
        }
        x.row(i) = Eigen::Map<const Eigen::VectorXd>(w.values.data(), expected_dim);
    }
    return x;
}

// Largest-magnitude entry of each column made positive, for reproducible
// persistence and comparison.
void fix_column_signs(Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::Index imax = 0;
        m.col(c).cwiseAbs().maxCoeff(&imax);
        if (m(imax, c) < 0) m.col(c) = -m.col(c);
    }
}

}  // namespace

PcaModel fit_pca_batch(const std::vector<Window>& windows, int k) {
    if (windows.size() < 2) {
        throw InsufficientDataError("need at least 2 windows, got " +
                                    std::to_string(windows.size()));
    }
    const int m = static_cast<int>(windows.front().size());
    if (k < 1 || k > m) throw ParameterError("k must be in [1, window length]");

    Eigen::MatrixXd x = stack_rows(windows, m);
    const Eigen::VectorXd mean = x.colwise().mean();
    x.rowwise() -= mean.transpose();
    const Eigen::MatrixXd cov =
        (x.transpose() * x) / static_cast<double>(windows.size() - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed to converge");

    // ascending from the solver; flip to descending and clamp tiny negatives
    Eigen::VectorXd evals = eig.eigenvalues().reverse();
    evals = evals.cwiseMax(0.0);
    Eigen::MatrixXd evecs = eig.eigenvectors().rowwise().reverse();

    PcaModel model;
    model.mean = mean;
    model.components = evecs.leftCols(k);
    fix_column_signs(model.components);
    model.eigenvalues = evals;
    model.k = k;
    model.input_dim = m;
    return model;
}

Window pca_reconstruct(const PcaModel& model, const Window& w) {
    if (static_cast<int>(w.size()) != model.input_dim) {
        throw DimensionError("window length " + std::to_string(w.size()) +
                             " does not match model dimension " +
                             std::to_string(model.input_dim));
    }
    const Eigen::Map<const Eigen::VectorXd> x(w.values.data(), model.input_dim);
    const Eigen::VectorXd centered = x - model.mean;
    const Eigen::VectorXd rebuilt =
        model.mean + model.components * (model.components.transpose() * centered);

    Window out = w;
    Eigen::Map<Eigen::VectorXd>(out.values.data(), model.input_dim) = rebuilt;
    return out;
}

HpcaState hpca_init(int input_dim, int k, std::uint64_t seed) {
    if (input_dim < 1 || k < 1 || k > input_dim) throw ParameterError("need 1 <= k <= input_dim");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(input_dim, k);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    HpcaState state;
    state.components_estimate =
        qr.householderQ() * Eigen::MatrixXd::Identity(input_dim, k);
    state.scale = Eigen::VectorXd::Ones(k);
    state.running_mean = Eigen::VectorXd::Zero(input_dim);
    state.rng_seed = seed;
    state.zero_variance = true;  // no spread observed yet
    state.k = k;
    state.input_dim = input_dim;
    return state;
}

void hpca_update(HpcaState& state, const std::vector<Window>& block) {
    if (!state.initialized()) throw ValidationError("state not initialized");
    const auto b = block.size();
    if (b < static_cast<std::size_t>(state.k)) {
        throw InsufficientDataError("block of " + std::to_string(b) +
                                    " windows is smaller than k=" + std::to_string(state.k));
    }
    Eigen::MatrixXd x = stack_rows(block, state.input_dim);

    const std::uint64_t total = state.samples_seen + b;
    const Eigen::VectorXd block_mean = x.colwise().mean();
    state.running_mean +=
        (block_mean - state.running_mean) * (static_cast<double>(b) / static_cast<double>(total));
    state.samples_seen = total;
    x.rowwise() -= state.running_mean.transpose();
    if (state.zero_variance && x.squaredNorm() > 0.0) state.zero_variance = false;

    const double alpha =
        static_cast<double>(state.blocks_seen) / static_cast<double>(state.blocks_seen + 1);
    state.history_weight = alpha;

    // covariance action without forming the M x M matrix
    const Eigen::MatrixXd cov_q =
        x.transpose() * (x * state.components_estimate) / static_cast<double>(std::max<std::size_t>(b - 1, 1));
    const Eigen::MatrixXd y =
        alpha * (state.components_estimate * state.scale.asDiagonal()).eval() +
        (1.0 - alpha) * cov_q;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    state.components_estimate =
        qr.householderQ() * Eigen::MatrixXd::Identity(state.input_dim, state.k);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(state.k).triangularView<Eigen::Upper>();
    state.scale = r.diagonal().cwiseAbs();
    state.blocks_seen += 1;
}

HpcaState fit_pca_streaming(const std::vector<Window>& windows, int k, std::size_t block_size,
                            int passes, std::uint64_t seed) {
    if (windows.empty()) throw InsufficientDataError("empty stream");
    if (passes < 1) throw ParameterError("need at least one pass");
    if (block_size < static_cast<std::size_t>(k)) {
        throw InsufficientDataError("block_size smaller than k");
    }
    const int m = static_cast<int>(windows.front().size());
    HpcaState state = hpca_init(m, k, seed);

    const std::size_t n = windows.size();
    std::size_t full_blocks = n / block_size;
    if (full_blocks == 0) full_blocks = 1;  // single short block; update validates size
    for (int pass = 0; pass < passes; ++pass) {
        for (std::size_t blk = 0; blk < full_blocks; ++blk) {
            const std::size_t lo = blk * block_size;
            // fold the trailing fragment into the final block
            const std::size_t hi = (blk + 1 == full_blocks) ? n : lo + block_size;
            std::vector<Window> block(windows.begin() + static_cast<std::ptrdiff_t>(lo),
                                      windows.begin() + static_cast<std::ptrdiff_t>(hi));
            hpca_update(state, block);
        }
    }
    return state;
}

PcaModel hpca_to_pca(const HpcaState& state) {
    if (!state.initialized()) throw ValidationError("state not initialized");

    // order directions by their tracked scale, largest first
    std::vector<int> order(static_cast<std::size_t>(state.k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return state.scale(a) > state.scale(b); });

    PcaModel model;
    model.mean = state.running_mean;
    model.components.resize(state.input_dim, state.k);
    model.eigenvalues.resize(state.k);
    for (int c = 0; c < state.k; ++c) {
        model.components.col(c) = state.components_estimate.col(order[static_cast<std::size_t>(c)]);
        model.eigenvalues(c) = state.scale(order[static_cast<std::size_t>(c)]);
    }
    fix_column_signs(model.components);
    model.k = state.k;
    model.input_dim = state.input_dim;
    return model;
}

double principal_angle_rad(const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2) {
    if (q1.rows() != q2.rows() || q1.cols() != q2.cols()) {
        throw DimensionError("subspace bases have different shapes");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q1.transpose() * q2);
    const double smin = std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0);
    return std::acos(smin);
}

}  // namespace shmedge
