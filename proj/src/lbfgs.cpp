#include "lbfgs.hpp"

#include <cmath>
#include <deque>

namespace covidx::detail {

LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x, const LbfgsSettings& settings) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    double fx = f(x, g);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    LbfgsResult result;
    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        result.iterations = iter;
        if (g.lpNorm<Eigen::Infinity>() <= settings.tol * std::max(1.0, std::fabs(fx))) {
            result.converged = true;
            break;
        }

        // Two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        } else {
            q /= std::max(1.0, g.norm());
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd dir = -q;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            // Lost descent; restart from steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g / std::max(1.0, g.norm());
            slope = g.dot(dir);
        }

        double step = 1.0;
        Eigen::VectorXd x_new(n), g_new(n);
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * dir;
            f_new = f(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No decrease representable in floating point: at a minimum to machine precision.
            result.converged = true;
            break;
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (int(s_hist.size()) > settings.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }

        const double decrease = fx - f_new;
        x = x_new;
        g = g_new;
        fx = f_new;
        if (decrease <= settings.tol * std::max(1.0, std::fabs(fx))) {
            result.converged = true;
            break;
        }
    }
    result.x = std::move(x);
    result.value = fx;
    return result;
}

} // namespace covidx::detail
