#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/rng.hpp"
#include "lbfgs.hpp"

namespace covidx {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sparse_filtering_rows(const MatrixXd& w, const MatrixXd& z) {
    const MatrixXd fs = ((w * z.transpose()).array().square() + kSoftAbsEpsilon).sqrt();
    return fs.rowwise().norm().cwiseInverse().asDiagonal() * fs;
}

// Forward: F = W Z', soft |F|, unit-norm rows (features), unit-norm columns
// (examples), cost = sum of entries. Backward walks the same chain.
double sparse_filtering_cost(const MatrixXd& w, const MatrixXd& z, MatrixXd* gradient) {
    const MatrixXd f = w * z.transpose();
    const MatrixXd fs = (f.array().square() + kSoftAbsEpsilon).sqrt();

    const VectorXd row_norm = fs.rowwise().norm();
    const MatrixXd y = row_norm.cwiseInverse().asDiagonal() * fs;
    const Eigen::RowVectorXd col_norm = y.colwise().norm();
    const MatrixXd fhat = y * col_norm.cwiseInverse().asDiagonal();
    const double cost = fhat.sum();

    if (gradient) {
        // d cost / d fhat = 1
        const Eigen::RowVectorXd col_dot = fhat.colwise().sum();
        MatrixXd dy = (MatrixXd::Ones(fhat.rows(), fhat.cols()) - fhat * col_dot.asDiagonal()) *
                      col_norm.cwiseInverse().asDiagonal();
        const VectorXd row_dot = (y.array() * dy.array()).rowwise().sum();
        MatrixXd dfs = row_norm.cwiseInverse().asDiagonal() * (dy - row_dot.asDiagonal() * y);
        const MatrixXd df = dfs.array() * f.array() / fs.array();
        *gradient = df * z;
    }
    return cost;
}

SparseFilteringFit train_sparse_filtering(const MatrixXd& z, const SparseFilteringParams& params) {
    const Index k = params.n_features;
    const Index p = z.cols();
    if (k < 2) throw ConfigError("sparse filtering needs n_features >= 2");
    if (z.rows() <= k) throw DegenerateInputError("sparse filtering needs more rows than features");

    Rng rng(params.seed);
    VectorXd w0(k * p);
    for (Index i = 0; i < w0.size(); ++i) w0(i) = rng.normal();

    auto objective = [&](const VectorXd& flat, VectorXd& grad) {
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
            flat.data(), k, p);
        MatrixXd g;
        const double cost = sparse_filtering_cost(w, z, &g);
        grad.resize(flat.size());
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(grad.data(), k, p) = g;
        return cost;
    };

    detail::LbfgsSettings settings;
    settings.max_iter = params.max_iter;
    settings.tol = params.tol;
    const auto res = detail::minimize_lbfgs(objective, w0, settings);
    if (!res.converged) throw ConvergenceError("sparse filtering", res.iterations);

    SparseFilteringFit fit;
    fit.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        res.x.data(), k, p);
    fit.features = fit.weights * z.transpose();
    fit.cost = res.value;
    fit.iterations = res.iterations;
    return fit;
}

LatentSeries fit_sparse_filtering(const CleanPanel& panel, const SparseFilteringParams& params,
                                  std::span<const double> reference) {
    const SparseFilteringFit fit = train_sparse_filtering(panel.values, params);
    const MatrixXd candidates = fit.features.transpose();

    LatentSeries out;
    const Index pick = select_by_reference(candidates, reference, out.warnings);
    out.dates = panel.dates;
    out.values.assign(candidates.col(pick).data(), candidates.col(pick).data() + panel.rows());
    out.coverage.assign(std::size_t(panel.rows()), true);
    return out;
}

} // namespace covidx
