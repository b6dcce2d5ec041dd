#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/stats.hpp"

namespace covidx {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_shape(const CleanPanel& panel, const char* what) {
    if (panel.rows() < 2 || panel.cols() < 2) {
        throw DegenerateInputError(std::string(what) + " needs at least 2 rows and 2 columns");
    }
}

/// Leading eigenvector of the window covariance, canonical sign.
VectorXd leading_direction(const MatrixXd& rows) {
    const auto pairs = sorted_eigenpairs(sample_covariance(rows));
    if (!(pairs.front().value > 1e-12) || !std::isfinite(pairs.front().value)) {
        throw DegenerateInputError("PCA input has no variance");
    }
    return pairs.front().vector;
}

LatentSeries make_latent(const CleanPanel& panel) {
    LatentSeries out;
    out.dates = panel.dates;
    out.values.assign(panel.dates.size(), kMissing);
    out.coverage.assign(panel.dates.size(), false);
    return out;
}

} // namespace

PrincipalComponents principal_components(const MatrixXd& z) {
    const auto pairs = sorted_eigenpairs(sample_covariance(z));
    PrincipalComponents pc;
    const Index p = z.cols();
    pc.eigenvalues.resize(p);
    pc.eigenvectors.resize(p, p);
    for (Index k = 0; k < p; ++k) {
        pc.eigenvalues(k) = pairs[std::size_t(k)].value;
        pc.eigenvectors.col(k) = pairs[std::size_t(k)].vector;
    }
    pc.scores = z * pc.eigenvectors;
    return pc;
}

LatentSeries fit_pca_full(const CleanPanel& panel) {
    require_shape(panel, "pca_full");
    const VectorXd v = leading_direction(panel.values);
    const VectorXd scores = panel.values * v;
    LatentSeries out = make_latent(panel);
    for (Index t = 0; t < panel.rows(); ++t) {
        out.values[std::size_t(t)] = scores(t);
        out.coverage[std::size_t(t)] = true;
    }
    return out;
}

LatentSeries fit_pca_rolling(const CleanPanel& panel, int window, Execution exec) {
    require_shape(panel, "pca_rolling");
    const Index n = panel.rows();
    const Index p = panel.cols();
    if (window < 3) throw ConfigError("pca_rolling window must be >= 3, got " + std::to_string(window));
    if (window > n) {
        throw DegenerateInputError("pca_rolling window " + std::to_string(window) +
                                   " exceeds the panel length " + std::to_string(n));
    }
    const Index w = window;
    const Index n_windows = n - w + 1;

    // Window fits are independent; sign chaining below is sequential.
    MatrixXd directions(p, n_windows);
    bool degenerate = false;
    auto fit_window = [&](Index k) {
        try {
            directions.col(k) = leading_direction(panel.values.middleRows(k, w));
        } catch (const DegenerateInputError&) {
            directions.col(k).setConstant(std::nan(""));
            return false;
        }
        return true;
    };
    if (exec == Execution::parallel) {
        int failures = 0;
#pragma omp parallel for schedule(static) reduction(+ : failures)
        for (Index k = 0; k < n_windows; ++k) failures += fit_window(k) ? 0 : 1;
        degenerate = failures > 0;
    } else {
        for (Index k = 0; k < n_windows; ++k) degenerate |= !fit_window(k);
    }
    if (degenerate) throw DegenerateInputError("pca_rolling: a window has no variance");

    for (Index k = 1; k < n_windows; ++k) {
        if (directions.col(k).dot(directions.col(k - 1)) < 0.0) directions.col(k) *= -1.0;
    }

    LatentSeries out = make_latent(panel);
    for (Index k = 0; k < n_windows; ++k) {
        const Index t = k + w - 1;
        out.values[std::size_t(t)] = panel.values.row(t).dot(directions.col(k));
        out.coverage[std::size_t(t)] = true;
    }
    return out;
}

} // namespace covidx
