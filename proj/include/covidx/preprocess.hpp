#pragma once

#include <span>
#include <string>
#include <vector>

#include "covidx/panel.hpp"

namespace covidx {

struct EmSettings {
    int max_iter = 200;
    double tol = 1e-6;    // stop when the log-likelihood gains less than this
    double ridge = 1e-6;  // added to the covariance diagonal in every M-step
};

struct EmTrace {
    int iterations = 0;
    bool converged = true;
    /// Ridge-penalized observed-data log-likelihood; entry 0 is the starting point.
    std::vector<double> log_likelihood;
};

/// Fills missing cells with their conditional mean under a multivariate
/// Gaussian fitted by EM. Observed cells are copied untouched.
///
/// The ridge enters as the penalty -(n/2) * ridge * tr(inv(Sigma)), whose
/// M-step is exactly S + ridge * I, so the traced objective is monotone.
Panel impute_em(const Panel& panel, const EmSettings& settings = {}, EmTrace* trace = nullptr);

/// Wraps a fully observed Panel; throws DataError if any cell is missing.
CleanPanel to_clean(const Panel& panel);
Panel to_panel(const CleanPanel& panel);

/// Column z-scores with the n-1 divisor. Constant columns become 0 and are
/// listed in provenance.constant_columns.
CleanPanel standardize(const CleanPanel& panel);
CleanPanel standardize(const Panel& panel);

struct Smoothing {
    enum class Kind { none, ema, moving_average };
    Kind kind = Kind::none;
    double alpha = 1.0;
    int window = 1;

    static Smoothing none() { return {}; }
    static Smoothing ema(double alpha) { return {Kind::ema, alpha, 1}; }
    static Smoothing moving_average(int window) { return {Kind::moving_average, 1.0, window}; }

    std::string describe() const;
};

/// Low-pass filter applied per column.
/// ema: s_1 = x_1, s_t = alpha x_t + (1 - alpha) s_{t-1}.
/// moving_average: trailing mean over min(t, window) points.
std::vector<double> smooth(std::span<const double> series, const Smoothing& method);
Eigen::MatrixXd smooth(const Eigen::MatrixXd& values, const Smoothing& method);
CleanPanel smooth(const CleanPanel& panel, const Smoothing& method);
/// Requires a fully observed panel.
Panel smooth(const Panel& panel, const Smoothing& method);

enum class TransformKind { levels, first_difference, log_first_difference, percent_change, positivity_ratio };

struct Transform {
    TransformKind kind = TransformKind::levels;
    // positivity_ratio only
    std::string numerator = "totale_positivi";
    std::string denominator = "tamponi";

    std::string name() const;
    static Transform parse(const std::string& name);  // throws ConfigError
};

/// Differencing transforms drop the first date. positivity_ratio keeps every
/// column in levels and appends numerator / denominator as a new column.
CleanPanel apply_transform(const CleanPanel& panel, const Transform& transform);

/// True when apply_transform would not raise a DomainError on this panel.
bool transform_defined(const CleanPanel& panel, const Transform& transform);

} // namespace covidx
