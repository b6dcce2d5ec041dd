#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/stats.hpp"

namespace covidx {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
} // namespace

KalmanOutput kalman_smooth(const MatrixXd& y, const LocalLevelParams& params) {
    const Index n = y.rows();
    const Index p = y.cols();
    if (params.c.size() != p || params.r.size() != p) {
        throw ConfigError("local-level parameters do not match the panel width");
    }
    if ((params.r.array() <= 0.0).any()) throw ConfigError("measurement variances must be positive");

    KalmanOutput out;
    out.filtered.resize(n);
    out.filtered_var.resize(n);
    out.smoothed.resize(n);
    out.smoothed_var.resize(n);
    VectorXd pred_var(n);

    const VectorXd c_over_r = params.c.array() / params.r.array();
    const double info = params.c.dot(c_over_r);  // c' inv(R) c
    const double logdet_r = params.r.array().log().sum();

    double x = 0.0;
    double var = kDiffusePriorVariance;
    double ll = 0.0;
    for (Index t = 0; t < n; ++t) {
        const double a = x;
        const double pv = var + 1.0;
        pred_var(t) = pv;
        const VectorXd v = y.row(t).transpose() - params.c * a;
        const double h = c_over_r.dot(v);
        const double denom = 1.0 + pv * info;
        const double quad = (v.array().square() / params.r.array()).sum() - pv * h * h / denom;
        ll += -0.5 * (double(p) * kLog2Pi + logdet_r + std::log(denom) + quad);
        var = pv / denom;
        x = a + var * h;
        out.filtered(t) = x;
        out.filtered_var(t) = var;
    }
    out.log_likelihood = ll;

    out.smoothed(n - 1) = out.filtered(n - 1);
    out.smoothed_var(n - 1) = out.filtered_var(n - 1);
    for (Index t = n - 2; t >= 0; --t) {
        const double j = out.filtered_var(t) / pred_var(t + 1);
        out.smoothed(t) = out.filtered(t) + j * (out.smoothed(t + 1) - out.filtered(t));
        out.smoothed_var(t) = out.filtered_var(t) + j * j * (out.smoothed_var(t + 1) - pred_var(t + 1));
    }
    return out;
}

StateSpaceFit estimate_local_level(const MatrixXd& y, const StateSpaceParams& params) {
    const Index n = y.rows();
    const Index p = y.cols();
    if (n < 4 || p < 1) throw DegenerateInputError("state space model needs n >= 4 and p >= 1");
    if (params.em_max_iter < 1) throw ConfigError("state space em_max_iter must be positive");

    const MatrixXd s = sample_covariance(y);
    StateSpaceFit fit;
    fit.params.c.resize(p);
    fit.params.r.resize(p);
    if (p >= 2) {
        const auto pairs = sorted_eigenpairs(s);
        if (!(pairs.front().value > 1e-12)) throw DegenerateInputError("state space input has no variance");
        fit.params.c = 0.1 * pairs.front().vector * std::sqrt(pairs.front().value);
    } else {
        if (!(s(0, 0) > 1e-12)) throw DegenerateInputError("state space input has no variance");
        fit.params.c(0) = 0.1 * std::sqrt(s(0, 0));
    }
    for (Index i = 0; i < p; ++i) fit.params.r(i) = std::max(0.5 * s(i, i), kNoiseFloor);

    const VectorXd syy = y.colwise().squaredNorm().transpose();
    bool clamped = false;
    fit.states = kalman_smooth(y, fit.params);
    fit.log_likelihood.push_back(fit.states.log_likelihood);
    for (int iter = 1; iter <= params.em_max_iter; ++iter) {
        const auto& st = fit.states;
        const double sxx = st.smoothed.squaredNorm() + st.smoothed_var.sum();
        const VectorXd syx = y.transpose() * st.smoothed;
        fit.params.c = syx / sxx;
        for (Index i = 0; i < p; ++i) {
            double r = (syy(i) - fit.params.c(i) * syx(i)) / double(n);
            if (r < kNoiseFloor) {
                r = kNoiseFloor;
                clamped = true;
            }
            fit.params.r(i) = r;
        }
        const double prev = st.log_likelihood;
        fit.states = kalman_smooth(y, fit.params);
        fit.log_likelihood.push_back(fit.states.log_likelihood);
        fit.iterations = iter;
        if ((fit.states.log_likelihood - prev) / double(n) < params.em_tol) {
            if (clamped) {
                fit.warnings.push_back("state space: a measurement variance was clamped to " +
                                       std::to_string(kNoiseFloor));
            }
            return fit;
        }
    }
    throw ConvergenceError("state space EM", params.em_max_iter);
}

LatentSeries fit_state_space(const CleanPanel& panel, const StateSpaceParams& params, StateSpaceFit* fit_out) {
    StateSpaceFit fit = estimate_local_level(panel.values, params);
    LatentSeries out;
    out.dates = panel.dates;
    out.values.assign(fit.states.smoothed.data(), fit.states.smoothed.data() + panel.rows());
    out.coverage.assign(std::size_t(panel.rows()), true);
    out.warnings = fit.warnings;
    if (fit_out) *fit_out = std::move(fit);
    return out;
}

} // namespace covidx
