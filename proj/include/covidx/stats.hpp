#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace covidx {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 divisor); 0 for fewer than 2 points.
double sample_sd(std::span<const double> x);
/// Pearson correlation; nullopt when either series is constant or shorter than 2.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

/// Column covariance with the n - 1 divisor.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x);

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;
};

/// Eigenpairs of a symmetric matrix, largest eigenvalue first. Each vector is
/// given a canonical sign (component sum >= 0, ties broken by the first
/// non-zero component) so results are reproducible.
std::vector<EigenPair> sorted_eigenpairs(const Eigen::MatrixXd& symmetric);

void canonicalize_sign(Eigen::VectorXd& v);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

} // namespace covidx
