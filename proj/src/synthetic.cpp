#include "covidx/synthetic.hpp"

#include <cmath>
#include <map>

#include "covidx/error.hpp"
#include "covidx/rng.hpp"
#include "covidx/stats.hpp"

namespace covidx {

void SyntheticSpec::validate() const {
    if (n_obs < 20) throw ConfigError("synthetic n_obs must be >= 20");
    if (n_vars < 2) throw ConfigError("synthetic n_vars must be >= 2");
    if (!loadings.empty() && loadings.size() != std::size_t(n_vars)) {
        throw ConfigError("synthetic loadings must have n_vars entries");
    }
    if (!noise_sd.empty() && noise_sd.size() != std::size_t(n_vars)) {
        throw ConfigError("synthetic noise_sd must have n_vars entries");
    }
    for (double s : noise_sd) {
        if (!(s >= 0.0)) throw ConfigError("synthetic noise_sd entries must be >= 0");
    }
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
        throw ConfigError("synthetic missing_rate must lie in [0, 1)");
    }
    if (process == Process::ar1 && !(std::fabs(phi) < 1.0)) {
        throw ConfigError("synthetic ar1 phi must satisfy |phi| < 1");
    }
}

std::vector<double> SyntheticSpec::resolved_loadings() const {
    if (!loadings.empty()) return loadings;
    std::vector<double> out(static_cast<std::size_t>(n_vars));
    for (int i = 0; i < n_vars; ++i) out[std::size_t(i)] = 0.5 + double(i) / double(n_vars - 1);
    return out;
}

std::vector<double> SyntheticSpec::resolved_noise_sd() const {
    if (!noise_sd.empty()) return noise_sd;
    return std::vector<double>(std::size_t(n_vars), 0.5);
}

SyntheticData generate(const SyntheticSpec& spec) {
    spec.validate();
    const auto loadings = spec.resolved_loadings();
    const auto noise = spec.resolved_noise_sd();
    Rng rng(spec.seed);

    SyntheticData out;
    out.factor.resize(std::size_t(spec.n_obs));
    double x = 0.0;
    for (int t = 0; t < spec.n_obs; ++t) {
        const double e = rng.normal();
        x = (spec.process == SyntheticSpec::Process::random_walk ? x : spec.phi * x) + e;
        out.factor[std::size_t(t)] = x;
    }

    Panel& p = out.panel;
    p.values.resize(spec.n_obs, spec.n_vars);
    for (int t = 0; t < spec.n_obs; ++t) {
        p.dates.push_back(spec.start.plus_days(t));
        for (int i = 0; i < spec.n_vars; ++i) {
            p.values(t, i) = loadings[std::size_t(i)] * out.factor[std::size_t(t)] +
                             noise[std::size_t(i)] * rng.normal();
        }
    }
    for (int i = 0; i < spec.n_vars; ++i) p.variables.push_back("y" + std::to_string(i + 1));
    for (int t = 0; t < spec.n_obs; ++t) {
        for (int i = 0; i < spec.n_vars; ++i) {
            if (rng.uniform() < spec.missing_rate) p.values(t, i) = kMissing;
        }
    }
    return out;
}

double recovery_score(std::span<const double> estimate, std::span<const double> truth) {
    const auto r = pearson(estimate, truth);
    if (!r) throw DegenerateInputError("recovery score: correlation undefined (constant series)");
    return std::fabs(*r);
}

namespace {

double score_on_intersection(std::span<const Date> dates, std::span<const double> values,
                             const std::vector<bool>* coverage, std::span<const Date> truth_dates,
                             std::span<const double> truth) {
    if (truth_dates.size() != truth.size()) throw Error("recovery score: truth dates/values differ in length");
    std::map<Date, double> by_date;
    for (std::size_t i = 0; i < truth.size(); ++i) by_date.emplace(truth_dates[i], truth[i]);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (coverage && !(*coverage)[i]) continue;
        auto it = by_date.find(dates[i]);
        if (it == by_date.end()) continue;
        a.push_back(values[i]);
        b.push_back(it->second);
    }
    return recovery_score(a, b);
}

} // namespace

double recovery_score(const IndexSeries& index, std::span<const Date> truth_dates, std::span<const double> truth) {
    return score_on_intersection(index.dates, index.values, nullptr, truth_dates, truth);
}

double recovery_score(const LatentSeries& latent, std::span<const Date> truth_dates,
                      std::span<const double> truth) {
    return score_on_intersection(latent.dates, latent.values, &latent.coverage, truth_dates, truth);
}

} // namespace covidx
