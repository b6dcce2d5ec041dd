#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "covidx/execution.hpp"
#include "covidx/panel.hpp"
#include "covidx/preprocess.hpp"

namespace covidx {

enum class Family { pca_full, pca_rolling, ica, factor_analysis, state_space, sparse_filtering };

std::string family_name(Family f);
Family parse_family(const std::string& name);  // throws ConfigError

struct PcaFullParams {};

struct PcaRollingParams {
    int window = 60;
};

/// FastICA with the logcosh contrast, deflation scheme.
struct IcaParams {
    int n_components = 2;
    int max_iter = 1000;
    double tol = 1e-7;
    std::uint64_t seed = 1;
};

struct FactorAnalysisParams {
    int em_max_iter = 20000;
    double em_tol = 1e-10;  // per-observation log-likelihood gain
};

struct StateSpaceParams {
    int em_max_iter = 50000;
    double em_tol = 1e-9;  // per-observation log-likelihood gain
};

struct SparseFilteringParams {
    int n_features = 2;
    int max_iter = 2000;
    double tol = 1e-9;
    std::uint64_t seed = 1;
};

using ModelParams = std::variant<PcaFullParams, PcaRollingParams, IcaParams, FactorAnalysisParams,
                                 StateSpaceParams, SparseFilteringParams>;

/// One micro-model: a family with its hyperparameters and input transform.
struct ModelSpec {
    std::string id;
    Transform transform;
    ModelParams params;

    Family family() const { return static_cast<Family>(params.index()); }
};

/// One model's estimate of the latent factor. Sign is arbitrary until aligned.
struct LatentSeries {
    std::string model_id;
    std::vector<Date> dates;
    std::vector<double> values;  // NaN where coverage is false
    std::vector<bool> coverage;
    std::vector<std::string> warnings;

    std::size_t covered() const;
};

// ---------------------------------------------------------------- PCA

struct PrincipalComponents {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXd eigenvectors;  // columns, canonical sign
    Eigen::MatrixXd scores;        // n x p, scores = z * eigenvectors
};

/// PCA of the sample covariance (the correlation matrix for z-scored input).
PrincipalComponents principal_components(const Eigen::MatrixXd& z);

/// First principal component scores over the whole sample.
LatentSeries fit_pca_full(const CleanPanel& panel);

/// For t >= w, first-PC score of row t under the PCA of rows t-w+1..t.
/// Consecutive window eigenvectors are sign-chained (dot product >= 0).
LatentSeries fit_pca_rolling(const CleanPanel& panel, int window,
                             Execution exec = Execution::parallel);

// ---------------------------------------------------------------- ICA

struct Whitening {
    Eigen::VectorXd mean;    // p
    Eigen::MatrixXd matrix;  // m x p
    Eigen::MatrixXd data;    // n x m, sample covariance = identity
};

/// PCA whitening onto the leading `n_components` directions.
Whitening whiten(const Eigen::MatrixXd& x, int n_components);

/// Deflationary FastICA on whitened data; returns the n x m source matrix.
Eigen::MatrixXd fast_ica(const Eigen::MatrixXd& whitened, const IcaParams& params);

/// Keeps the source most correlated (in absolute value) with `reference`.
LatentSeries fit_ica(const CleanPanel& panel, const IcaParams& params,
                     std::span<const double> reference);

// ---------------------------------------------------------------- factor analysis

struct OneFactorModel {
    Eigen::VectorXd loadings;
    Eigen::VectorXd uniquenesses;
    std::vector<double> log_likelihood;  // per EM iteration, entry 0 = start
    int iterations = 0;
    std::vector<std::string> warnings;

    Eigen::MatrixXd implied_covariance() const;
    /// Regression (Thomson) score weights: loadings' * inv(implied covariance).
    Eigen::RowVectorXd score_weights() const;
};

inline constexpr double kUniquenessFloor = 1e-4;

/// One-factor EM on a sample covariance computed from `n_obs` observations.
OneFactorModel fit_one_factor(const Eigen::MatrixXd& covariance, int n_obs,
                              const FactorAnalysisParams& params);

LatentSeries fit_factor_analysis(const CleanPanel& panel, const FactorAnalysisParams& params,
                                 OneFactorModel* model = nullptr);

// ---------------------------------------------------------------- state space

/// Local-level model x_t = x_{t-1} + xi_t, y_t = c x_t + eps_t,
/// Var(xi) = 1, Var(eps) = diag(r), x_0 ~ N(0, 1e6).
struct LocalLevelParams {
    Eigen::VectorXd c;
    Eigen::VectorXd r;
};

inline constexpr double kDiffusePriorVariance = 1e6;
inline constexpr double kNoiseFloor = 1e-8;

struct KalmanOutput {
    Eigen::VectorXd filtered;
    Eigen::VectorXd filtered_var;
    Eigen::VectorXd smoothed;
    Eigen::VectorXd smoothed_var;
    double log_likelihood = 0.0;
};

/// Kalman filter forward pass and Rauch-Tung-Striebel smoother. y is T x p.
KalmanOutput kalman_smooth(const Eigen::MatrixXd& y, const LocalLevelParams& params);

struct StateSpaceFit {
    LocalLevelParams params;
    KalmanOutput states;
    std::vector<double> log_likelihood;
    int iterations = 0;
    std::vector<std::string> warnings;
};

/// EM estimate of c and r with the closed-form M-step.
StateSpaceFit estimate_local_level(const Eigen::MatrixXd& y, const StateSpaceParams& params);

/// Returns the smoothed state; `fit` receives the filtered series and parameters.
LatentSeries fit_state_space(const CleanPanel& panel, const StateSpaceParams& params,
                             StateSpaceFit* fit = nullptr);

// ---------------------------------------------------------------- sparse filtering

inline constexpr double kSoftAbsEpsilon = 1e-8;

/// Soft absolute value of w * z' with each feature row scaled to unit L2 norm.
Eigen::MatrixXd sparse_filtering_rows(const Eigen::MatrixXd& w, const Eigen::MatrixXd& z);

/// Sparse filtering cost for weights w (n_features x p) on data z (n x p).
/// Writes d cost / d w into `gradient` when non-null.
double sparse_filtering_cost(const Eigen::MatrixXd& w, const Eigen::MatrixXd& z,
                             Eigen::MatrixXd* gradient = nullptr);

struct SparseFilteringFit {
    Eigen::MatrixXd weights;
    Eigen::MatrixXd features;  // n_features x n, linear responses w * z'
    double cost = 0.0;
    int iterations = 0;
};

SparseFilteringFit train_sparse_filtering(const Eigen::MatrixXd& z, const SparseFilteringParams& params);

/// Keeps the feature series most correlated (in absolute value) with `reference`.
LatentSeries fit_sparse_filtering(const CleanPanel& panel, const SparseFilteringParams& params,
                                  std::span<const double> reference);

// ---------------------------------------------------------------- dispatch

/// Fits `spec` on an already transformed and standardized panel.
LatentSeries fit_model(const CleanPanel& panel, const ModelSpec& spec,
                       std::span<const double> reference);

/// Picks the column of `candidates` (n x k) with the largest |corr| against reference.
/// Returns 0 and appends a warning when every correlation is undefined.
Eigen::Index select_by_reference(const Eigen::MatrixXd& candidates, std::span<const double> reference,
                                 std::vector<std::string>& warnings);

} // namespace covidx
