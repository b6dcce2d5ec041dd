#pragma once

#include <span>
#include <string>
#include <vector>

#include "covidx/execution.hpp"
#include "covidx/models.hpp"
#include "covidx/preprocess.hpp"

namespace covidx {

/// Rebased ensemble index: I_t = 100 + kappa (x_t - anchor), kappa = 100 / sd(x).
struct IndexSeries {
    std::vector<Date> dates;
    std::vector<double> values;
    Date base;            // first emitted date, value exactly 100
    double kappa = 0.0;
    double anchor = 0.0;  // x at the base date
};

struct MemberFailure {
    std::string model_id;
    std::string reason;
};

/// Sign anchor for one transformed panel.
struct ReferenceSeries {
    std::string transform;
    std::vector<Date> dates;
    std::vector<double> values;
};

struct EnsembleResult {
    IndexSeries index;
    /// Sign-aligned, re-standardized members sorted by id.
    std::vector<LatentSeries> members;
    std::vector<ReferenceSeries> references;
    std::vector<int> per_date_count;  // aligned with index.dates
    std::vector<double> mean;         // equal-weight average before rebasing
    std::vector<MemberFailure> failures;
    std::vector<std::string> warnings;
};

struct PreprocessSettings {
    EmSettings em;
    Smoothing smoothing = Smoothing::none();
    /// Columns left out of the sign reference (capacity metrics such as test counts).
    std::vector<std::string> reference_exclude = {"tamponi"};
};

/// Cross-sectional mean of the standardized columns, skipping `exclude`.
/// Falls back to every column if the exclusion would leave none.
std::vector<double> reference_series(const CleanPanel& panel,
                                     const std::vector<std::string>& exclude = {"tamponi"});

/// Negates `latent` when its correlation with `reference` over covered dates is
/// negative. A zero or undefined correlation keeps the sign and adds a warning.
/// `reference` is indexed like latent.dates. Throws DataError below 3 covered dates.
LatentSeries align_sign(LatentSeries latent, std::span<const double> reference);

/// Rescales a member to zero mean and unit sample variance over its covered dates.
/// Throws DegenerateInputError for a constant member.
LatentSeries standardize_member(LatentSeries latent);

struct Average {
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<int> counts;
};

/// Mean over the members covering each date; uncovered dates are dropped.
/// `standardize_members = false` averages the raw values.
Average average_equal_weight(std::span<const LatentSeries> members, bool standardize_members = true);

IndexSeries rebase(std::span<const double> series, std::span<const Date> dates);

/// A fitted member waiting for alignment, with the reference of its input panel.
struct MemberInput {
    LatentSeries latent;
    std::vector<double> reference;
};

/// Sorts by id, aligns signs, re-standardizes, averages and rebases.
/// Applies the majority rule: more than floor(space_size / 2) failures is an EnsembleError.
EnsembleResult combine_members(std::vector<MemberInput> inputs, std::vector<MemberFailure> failures,
                               std::size_t space_size);

/// Full pipeline: impute, smooth, transform and standardize per spec, fit,
/// then combine_members. Member estimation runs concurrently under
/// Execution::parallel; the reduction is serial and ordered by id.
EnsembleResult run_ensemble(const Panel& panel, const std::vector<ModelSpec>& model_space,
                            const PreprocessSettings& settings = {},
                            Execution exec = Execution::parallel);

/// pca_full; pca_rolling w in {60, 90}; ica (2 components); factor_analysis;
/// state_space; sparse_filtering (2 features). Each in levels, plus
/// log_first_difference copies when `include_log_variants`.
std::vector<ModelSpec> default_model_space(bool include_log_variants);

/// Throws ConfigError for an empty space, duplicate ids or out-of-range hyperparameters.
void validate_model_space(const std::vector<ModelSpec>& model_space);

} // namespace covidx
