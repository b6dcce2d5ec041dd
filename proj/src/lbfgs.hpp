#pragma once

#include <functional>

#include <Eigen/Dense>

namespace covidx::detail {

struct LbfgsSettings {
    int max_iter = 1000;
    int history = 10;
    double tol = 1e-9;  // relative objective decrease and scaled gradient norm
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Objective writes its gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Limited-memory BFGS with a backtracking Armijo line search.
LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsSettings& settings);

} // namespace covidx::detail
