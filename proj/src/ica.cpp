#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/rng.hpp"
#include "covidx/stats.hpp"

namespace covidx {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Whitening whiten(const MatrixXd& x, int n_components) {
    const Index p = x.cols();
    if (n_components < 1 || n_components > p) {
        throw ConfigError("ICA n_components must lie in [1, " + std::to_string(p) + "], got " +
                          std::to_string(n_components));
    }
    Whitening w;
    w.mean = x.colwise().mean().transpose();
    const auto pairs = sorted_eigenpairs(sample_covariance(x));
    w.matrix.resize(n_components, p);
    for (int k = 0; k < n_components; ++k) {
        const double lambda = pairs[std::size_t(k)].value;
        if (!(lambda > 1e-12)) {
            throw DegenerateInputError("whitening: component " + std::to_string(k + 1) +
                                       " has no variance");
        }
        w.matrix.row(k) = pairs[std::size_t(k)].vector.transpose() / std::sqrt(lambda);
    }
    w.data = (x.rowwise() - w.mean.transpose()) * w.matrix.transpose();
    return w;
}

MatrixXd fast_ica(const MatrixXd& xw, const IcaParams& params) {
    const Index n = xw.rows();
    const Index m = xw.cols();
    Rng rng(params.seed);
    MatrixXd unmixing(m, m);  // rows are the extracted directions

    auto decorrelate = [&](VectorXd& w, Index k) {
        for (Index j = 0; j < k; ++j) w -= w.dot(unmixing.row(j).transpose()) * unmixing.row(j).transpose();
    };

    for (Index k = 0; k < m; ++k) {
        VectorXd w(m);
        for (Index i = 0; i < m; ++i) w(i) = rng.normal();
        decorrelate(w, k);
        w.normalize();

        bool converged = false;
        for (int iter = 1; iter <= params.max_iter; ++iter) {
            const VectorXd u = xw * w;
            const VectorXd g = u.array().tanh();
            const double mean_dg = (1.0 - g.array().square()).mean();
            VectorXd next = xw.transpose() * g / double(n) - mean_dg * w;
            decorrelate(next, k);
            const double norm = next.norm();
            if (!(norm > 0.0) || !std::isfinite(norm)) {
                throw DegenerateInputError("FastICA update vanished");
            }
            next /= norm;
            const double change = std::fabs(std::fabs(next.dot(w)) - 1.0);
            w = next;
            if (change < params.tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw ConvergenceError("FastICA component " + std::to_string(k + 1), params.max_iter);
        }
        unmixing.row(k) = w.transpose();
    }
    return xw * unmixing.transpose();
}

LatentSeries fit_ica(const CleanPanel& panel, const IcaParams& params, std::span<const double> reference) {
    const Index n = panel.rows();
    const Index p = panel.cols();
    if (n <= p) throw DegenerateInputError("ICA needs more rows than columns");
    if (params.n_components > p) {
        throw ConfigError("ICA n_components exceeds the number of variables");
    }
    const Whitening w = whiten(panel.values, params.n_components);
    const MatrixXd sources = fast_ica(w.data, params);

    LatentSeries out;
    const Index pick = select_by_reference(sources, reference, out.warnings);
    out.dates = panel.dates;
    out.values.assign(sources.col(pick).data(), sources.col(pick).data() + n);
    out.coverage.assign(std::size_t(n), true);
    return out;
}

} // namespace covidx
