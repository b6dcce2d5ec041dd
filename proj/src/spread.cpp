#include "covidx/spread.hpp"

#include <cmath>

#include "covidx/error.hpp"

namespace covidx {

double spread_index(std::span<const double> cases) {
    const std::size_t units = cases.size();
    if (units < 2) throw ConfigError("spread index needs at least 2 regions");
    double total = 0.0;
    for (double c : cases) total += c > 0.0 ? c : 0.0;
    if (!(total > 0.0)) return kMissing;

    double entropy = 0.0;
    for (double c : cases) {
        if (!(c > 0.0)) continue;
        const double f = c / total;
        entropy -= f * std::log2(f);
    }
    const double csi = 100.0 * entropy / std::log2(double(units));
    // Rounding can push a uniform distribution a few ulps past the bounds.
    return std::fmin(100.0, std::fmax(0.0, csi));
}

SpreadSeries compute_csi(const RegionalCases& cases, Execution exec) {
    const Eigen::Index n = cases.new_cases.rows();
    const Eigen::Index u = cases.new_cases.cols();
    if (u < 2) throw ConfigError("spread index needs at least 2 regions, got " + std::to_string(u));
    if (static_cast<Eigen::Index>(cases.dates.size()) != n) {
        throw DataError("regional cases: dates and rows differ in length");
    }

    SpreadSeries out;
    out.dates = cases.dates;
    out.n_units = int(u);
    out.values.resize(std::size_t(n));

    // Row-major copy so each date is a contiguous span.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = cases.new_cases;
    auto one = [&](Eigen::Index t) {
        out.values[std::size_t(t)] = spread_index({rows.row(t).data(), std::size_t(u)});
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index t = 0; t < n; ++t) one(t);
    } else {
        for (Eigen::Index t = 0; t < n; ++t) one(t);
    }
    return out;
}

} // namespace covidx
