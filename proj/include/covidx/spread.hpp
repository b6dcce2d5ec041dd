#pragma once

#include <span>
#include <vector>

#include "covidx/execution.hpp"
#include "covidx/panel.hpp"

namespace covidx {

/// Normalized Shannon entropy of the regional distribution of new cases, in [0, 100].
struct SpreadSeries {
    std::vector<Date> dates;
    std::vector<double> values;  // NaN on zero-total dates
    int n_units = 0;
};

/// CSI for one date: 100 * (-sum f log2 f) / log2(n_units), with negative
/// counts clamped to 0 and 0 log 0 = 0. NaN when the clamped total is 0.
double spread_index(std::span<const double> cases);

/// Requires at least 2 regions (ConfigError otherwise). Dates are independent
/// and computed in parallel under Execution::parallel.
SpreadSeries compute_csi(const RegionalCases& cases, Execution exec = Execution::parallel);

} // namespace covidx
