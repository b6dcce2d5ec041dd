#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covidx/date.hpp"

namespace covidx {

/// Missing cells are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Dated multivariate series with possible missing values.
///
/// Rows are observations ordered by strictly increasing date, columns are
/// named variables. `validate()` checks the shape and ordering invariants.
struct Panel {
    std::vector<Date> dates;
    std::vector<std::string> variables;
    Eigen::MatrixXd values;  // n_observations x n_variables, NaN = missing

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    Eigen::Index column_index(const std::string& name) const;  // -1 if absent
    std::size_t missing_count() const;

    /// Throws DataError on any broken invariant.
    void validate() const;
};

/// Record of the preprocessing steps that produced a CleanPanel.
struct Provenance {
    int em_iterations = 0;
    std::string smoothing = "none";
    std::string transform = "levels";
    bool standardized = false;
    std::vector<std::string> constant_columns;
};

/// Fully observed panel; the input to every latent-factor model.
struct CleanPanel {
    std::vector<Date> dates;
    std::vector<std::string> variables;
    Eigen::MatrixXd values;  // n x p, no NaN
    Provenance provenance;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Eigen::Index column_index(const std::string& name) const;
};

/// New positive cases per region and date.
struct RegionalCases {
    std::vector<Date> dates;
    std::vector<std::string> regions;
    Eigen::MatrixXd new_cases;  // n_dates x n_regions
};

} // namespace covidx
