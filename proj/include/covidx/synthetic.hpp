#pragma once

#include <cstdint>
#include <vector>

#include "covidx/ensemble.hpp"
#include "covidx/panel.hpp"

namespace covidx {

/// Planted one-factor panel: y_{t,i} = loading_i x_t + noise_sd_i e_{t,i}.
///
/// Draw order from one Rng(seed): n_obs factor innovations, then the noise
/// row by row, then one uniform per cell (row-major) for the missing mask.
struct SyntheticSpec {
    enum class Process { random_walk, ar1 };

    std::uint64_t seed = 20200224;
    int n_obs = 300;
    int n_vars = 6;
    Process process = Process::random_walk;
    double phi = 0.9;  // ar1 only
    std::vector<double> loadings;  // empty = evenly spaced over [0.5, 1.5]
    std::vector<double> noise_sd;  // empty = 0.5 for every variable
    double missing_rate = 0.05;
    Date start = Date(2020, 2, 24);

    /// Throws ConfigError on a broken invariant.
    void validate() const;
    std::vector<double> resolved_loadings() const;
    std::vector<double> resolved_noise_sd() const;
};

struct SyntheticData {
    Panel panel;
    std::vector<double> factor;
};

SyntheticData generate(const SyntheticSpec& spec);

/// |Pearson correlation| over the dates present in both series.
/// Throws DegenerateInputError when either side is constant on the intersection.
double recovery_score(const IndexSeries& index, std::span<const Date> truth_dates,
                      std::span<const double> truth);
double recovery_score(const LatentSeries& latent, std::span<const Date> truth_dates,
                      std::span<const double> truth);
double recovery_score(std::span<const double> estimate, std::span<const double> truth);

} // namespace covidx
