#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/stats.hpp"

namespace covidx {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Moments {
    double a;          // loadings' inv(Psi) loadings
    VectorXd psi_inv_l;
};

Moments moments(const VectorXd& l, const VectorXd& psi) {
    Moments m;
    m.psi_inv_l = l.array() / psi.array();
    m.a = l.dot(m.psi_inv_l);
    return m;
}

/// Gaussian log-likelihood of the one-factor model given the sample covariance.
double loglik(const MatrixXd& s, int n_obs, const VectorXd& l, const VectorXd& psi) {
    const Moments m = moments(l, psi);
    const double logdet = psi.array().log().sum() + std::log1p(m.a);
    // tr(inv(Sigma) S) with inv(Sigma) = inv(Psi) - u u' / (1 + a), u = inv(Psi) l
    const double tr = (s.diagonal().array() / psi.array()).sum() -
                      m.psi_inv_l.dot(s * m.psi_inv_l) / (1.0 + m.a);
    const double p = double(s.rows());
    return -0.5 * double(n_obs) * (p * kLog2Pi + logdet + tr);
}

} // namespace

MatrixXd OneFactorModel::implied_covariance() const {
    MatrixXd sigma = loadings * loadings.transpose();
    sigma.diagonal() += uniquenesses;
    return sigma;
}

RowVectorXd OneFactorModel::score_weights() const {
    const Moments m = moments(loadings, uniquenesses);
    return m.psi_inv_l.transpose() / (1.0 + m.a);
}

OneFactorModel fit_one_factor(const MatrixXd& s, int n_obs, const FactorAnalysisParams& params) {
    const Index p = s.rows();
    if (p < 2) throw DegenerateInputError("factor analysis needs at least 2 variables");
    if (params.em_max_iter < 1) throw ConfigError("factor analysis em_max_iter must be positive");

    const auto pairs = sorted_eigenpairs(s);
    if (!(pairs.front().value > 1e-12)) throw DegenerateInputError("factor analysis input has no variance");

    OneFactorModel model;
    model.loadings = pairs.front().vector * std::sqrt(pairs.front().value);
    model.uniquenesses.resize(p);
    for (Index i = 0; i < p; ++i) {
        model.uniquenesses(i) = std::max({s(i, i) - model.loadings(i) * model.loadings(i),
                                          0.1 * s(i, i), kUniquenessFloor});
    }

    bool heywood = false;
    double ll = loglik(s, n_obs, model.loadings, model.uniquenesses);
    model.log_likelihood.push_back(ll);
    for (int iter = 1; iter <= params.em_max_iter; ++iter) {
        const RowVectorXd beta = model.score_weights();
        const RowVectorXd beta_s = beta * s;
        const double eff = 1.0 - beta.dot(model.loadings.transpose()) + beta_s.dot(beta);
        model.loadings = beta_s.transpose() / eff;
        for (Index i = 0; i < p; ++i) {
            double psi = s(i, i) - model.loadings(i) * beta_s(i);
            if (psi < kUniquenessFloor) {
                psi = kUniquenessFloor;
                heywood = true;
            }
            model.uniquenesses(i) = psi;
        }
        const double next = loglik(s, n_obs, model.loadings, model.uniquenesses);
        model.log_likelihood.push_back(next);
        model.iterations = iter;
        const double gain = (next - ll) / double(n_obs);
        ll = next;
        if (gain < params.em_tol) {
            if (heywood) {
                model.warnings.push_back("factor analysis: Heywood case, a uniqueness was clamped to " +
                                         std::to_string(kUniquenessFloor));
            }
            return model;
        }
    }
    throw ConvergenceError("factor analysis EM", params.em_max_iter);
}

LatentSeries fit_factor_analysis(const CleanPanel& panel, const FactorAnalysisParams& params,
                                 OneFactorModel* model_out) {
    const Index n = panel.rows();
    const Index p = panel.cols();
    if (p < 2 || n <= p) throw DegenerateInputError("factor analysis needs n > p >= 2");

    OneFactorModel model = fit_one_factor(sample_covariance(panel.values), int(n), params);
    const VectorXd scores = panel.values * model.score_weights().transpose();

    LatentSeries out;
    out.dates = panel.dates;
    out.values.assign(scores.data(), scores.data() + n);
    out.coverage.assign(std::size_t(n), true);
    out.warnings = model.warnings;
    if (model_out) *model_out = std::move(model);
    return out;
}

} // namespace covidx
