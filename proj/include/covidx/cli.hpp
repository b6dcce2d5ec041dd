#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "covidx/config.hpp"
#include "covidx/ensemble.hpp"
#include "covidx/spread.hpp"
#include "covidx/table.hpp"

namespace covidx {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;  // bad flags or config
inline constexpr int data = 3;   // unreadable or malformed input
inline constexpr int ensemble = 4;
} // namespace exit_code

/// Columns: index, per_date_count, then one column per surviving member
/// (sign-aligned and standardized; empty where the member does not cover a date).
OutputTable index_table(const EnsembleResult& result);

OutputTable spread_table(const SpreadSeries& spread);

/// Recomputes the index column from the member columns with the rebasing
/// formula. Returns the largest absolute discrepancy.
double index_reconstruction_error(const OutputTable& table);

int cmd_compute_index(const RunConfig& config, std::ostream& log);
int cmd_compute_spread(const SpreadConfig& config, OutputFormat format, std::ostream& log);

/// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace covidx
