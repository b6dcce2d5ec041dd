#include "covidx/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <optional>
#include <set>

#include "covidx/error.hpp"
#include "covidx/stats.hpp"

namespace covidx {

using Eigen::Index;

std::vector<double> reference_series(const CleanPanel& panel, const std::vector<std::string>& exclude) {
    std::vector<Index> cols;
    for (Index j = 0; j < panel.cols(); ++j) {
        const auto& name = panel.variables[std::size_t(j)];
        if (std::find(exclude.begin(), exclude.end(), name) == exclude.end()) cols.push_back(j);
    }
    if (cols.empty()) {
        for (Index j = 0; j < panel.cols(); ++j) cols.push_back(j);
    }
    std::vector<double> ref(std::size_t(panel.rows()), 0.0);
    for (Index t = 0; t < panel.rows(); ++t) {
        double sum = 0.0;
        for (Index j : cols) sum += panel.values(t, j);
        ref[std::size_t(t)] = sum / double(cols.size());
    }
    return ref;
}

namespace {

/// Values and reference restricted to covered dates.
std::pair<std::vector<double>, std::vector<double>> covered_pairs(const LatentSeries& latent,
                                                                  std::span<const double> reference) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t t = 0; t < latent.values.size(); ++t) {
        if (latent.coverage[t]) {
            out.first.push_back(latent.values[t]);
            if (!reference.empty()) out.second.push_back(reference[t]);
        }
    }
    return out;
}

} // namespace

LatentSeries align_sign(LatentSeries latent, std::span<const double> reference) {
    if (reference.size() != latent.values.size()) {
        throw Error("align_sign: reference length does not match latent '" + latent.model_id + "'");
    }
    const auto [vals, ref] = covered_pairs(latent, reference);
    if (vals.size() < 3) {
        throw DataError("align_sign: latent '" + latent.model_id + "' overlaps the reference on " +
                        std::to_string(vals.size()) + " dates, need 3");
    }
    const auto r = pearson(vals, ref);
    if (!r || *r == 0.0) {
        latent.warnings.push_back("sign alignment: correlation with the reference is " +
                                  std::string(r ? "zero" : "undefined") + "; sign left unchanged");
        return latent;
    }
    if (*r < 0.0) {
        for (std::size_t t = 0; t < latent.values.size(); ++t) {
            if (latent.coverage[t]) latent.values[t] = -latent.values[t];
        }
    }
    return latent;
}

LatentSeries standardize_member(LatentSeries latent) {
    const auto vals = covered_pairs(latent, {}).first;
    const double m = mean(vals);
    const double sd = sample_sd(vals);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw DegenerateInputError("member '" + latent.model_id + "' is constant over its coverage");
    }
    for (std::size_t t = 0; t < latent.values.size(); ++t) {
        if (latent.coverage[t]) latent.values[t] = (latent.values[t] - m) / sd;
    }
    return latent;
}

Average average_equal_weight(std::span<const LatentSeries> members, bool standardize_members) {
    if (members.empty()) throw EnsembleError("cannot average an empty member list");

    std::vector<LatentSeries> prepared;
    prepared.reserve(members.size());
    for (const auto& m : members) {
        prepared.push_back(standardize_members ? standardize_member(m) : m);
    }

    std::set<Date> all_dates;
    for (const auto& m : prepared) all_dates.insert(m.dates.begin(), m.dates.end());
    const std::vector<Date> axis(all_dates.begin(), all_dates.end());
    std::map<Date, std::size_t> slot;
    for (std::size_t i = 0; i < axis.size(); ++i) slot.emplace(axis[i], i);

    std::vector<double> sum(axis.size(), 0.0);
    std::vector<int> count(axis.size(), 0);
    for (const auto& m : prepared) {
        for (std::size_t t = 0; t < m.dates.size(); ++t) {
            if (!m.coverage[t]) continue;
            const std::size_t s = slot.at(m.dates[t]);
            sum[s] += m.values[t];
            ++count[s];
        }
    }

    Average avg;
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (count[i] == 0) continue;
        avg.dates.push_back(axis[i]);
        avg.values.push_back(sum[i] / double(count[i]));
        avg.counts.push_back(count[i]);
    }
    return avg;
}

IndexSeries rebase(std::span<const double> x, std::span<const Date> dates) {
    if (x.size() < 2) throw DegenerateInputError("rebase needs at least 2 values");
    if (dates.size() != x.size()) throw Error("rebase: dates and values differ in length");
    for (double v : x) {
        if (!std::isfinite(v)) throw DegenerateInputError("rebase: non-finite value");
    }
    const double sd = sample_sd(x);
    if (!(sd > 0.0)) throw DegenerateInputError("rebase: series is constant");

    IndexSeries out;
    out.dates.assign(dates.begin(), dates.end());
    out.base = dates.front();
    out.kappa = 100.0 / sd;
    out.anchor = x.front();
    out.values.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) out.values[t] = 100.0 + out.kappa * (x[t] - out.anchor);
    return out;
}

EnsembleResult combine_members(std::vector<MemberInput> inputs, std::vector<MemberFailure> failures,
                               std::size_t space_size) {
    std::sort(inputs.begin(), inputs.end(),
              [](const MemberInput& a, const MemberInput& b) { return a.latent.model_id < b.latent.model_id; });

    EnsembleResult result;
    for (auto& in : inputs) {
        const std::string id = in.latent.model_id;
        try {
            result.members.push_back(standardize_member(align_sign(std::move(in.latent), in.reference)));
        } catch (const DegenerateInputError& e) {
            failures.push_back({id, e.what()});
        } catch (const DataError& e) {
            failures.push_back({id, e.what()});
        }
    }
    std::sort(failures.begin(), failures.end(),
              [](const MemberFailure& a, const MemberFailure& b) { return a.model_id < b.model_id; });

    if (failures.size() > space_size / 2 || result.members.empty()) {
        std::string msg = std::to_string(failures.size()) + " of " + std::to_string(space_size) +
                          " ensemble members failed";
        for (const auto& f : failures) msg += "\n  " + f.model_id + ": " + f.reason;
        throw EnsembleError(msg);
    }

    for (const auto& f : failures) result.warnings.push_back("member " + f.model_id + " excluded: " + f.reason);
    for (const auto& m : result.members) {
        for (const auto& w : m.warnings) result.warnings.push_back(m.model_id + ": " + w);
    }

    // Members are already standardized.
    const Average avg = average_equal_weight(result.members, false);
    result.index = rebase(avg.values, avg.dates);
    result.per_date_count = avg.counts;
    result.mean = avg.values;
    result.failures = std::move(failures);
    return result;
}

void validate_model_space(const std::vector<ModelSpec>& model_space) {
    if (model_space.empty()) throw ConfigError("model_space must contain at least one model");
    std::set<std::string> ids;
    for (const auto& spec : model_space) {
        if (spec.id.empty()) throw ConfigError("model_space entry has an empty id");
        if (!ids.insert(spec.id).second) throw ConfigError("duplicate model id '" + spec.id + "'");
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, PcaRollingParams>) {
                    if (p.window < 3) throw ConfigError(spec.id + ": pca_rolling window must be >= 3");
                } else if constexpr (std::is_same_v<P, IcaParams>) {
                    if (p.n_components < 1) throw ConfigError(spec.id + ": ica n_components must be >= 1");
                    if (p.max_iter < 1 || !(p.tol > 0)) throw ConfigError(spec.id + ": bad ica max_iter/tol");
                } else if constexpr (std::is_same_v<P, SparseFilteringParams>) {
                    if (p.n_features < 2) throw ConfigError(spec.id + ": sparse_filtering n_features must be >= 2");
                    if (p.max_iter < 1 || !(p.tol > 0)) throw ConfigError(spec.id + ": bad sparse_filtering max_iter/tol");
                } else if constexpr (std::is_same_v<P, FactorAnalysisParams> || std::is_same_v<P, StateSpaceParams>) {
                    if (p.em_max_iter < 1 || !(p.em_tol > 0)) throw ConfigError(spec.id + ": bad em_max_iter/em_tol");
                }
            },
            spec.params);
    }
}

namespace {

struct PreparedPanel {
    std::optional<CleanPanel> panel;
    std::vector<double> reference;
    std::string error;
};

bool is_member_failure(const std::exception_ptr& e, std::string& reason) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError&) {
        return false;
    } catch (const Error& err) {
        reason = err.what();
        return true;
    } catch (...) {
        return false;
    }
}

} // namespace

EnsembleResult run_ensemble(const Panel& panel, const std::vector<ModelSpec>& model_space,
                            const PreprocessSettings& settings, Execution exec) {
    validate_model_space(model_space);

    EmTrace em_trace;
    const Panel imputed = impute_em(panel, settings.em, &em_trace);
    CleanPanel base = smooth(to_clean(imputed), settings.smoothing);
    base.provenance.em_iterations = em_trace.iterations;

    std::map<std::string, PreparedPanel> prepared;
    for (const auto& spec : model_space) {
        const std::string key = spec.transform.name() + "|" + spec.transform.numerator + "|" +
                                spec.transform.denominator;
        if (prepared.count(key)) continue;
        PreparedPanel pp;
        try {
            pp.panel = standardize(apply_transform(base, spec.transform));
            pp.reference = reference_series(*pp.panel, settings.reference_exclude);
        } catch (const DataError& e) {
            pp.error = e.what();
        }
        prepared.emplace(key, std::move(pp));
    }
    auto prepared_for = [&](const ModelSpec& spec) -> const PreparedPanel& {
        return prepared.at(spec.transform.name() + "|" + spec.transform.numerator + "|" +
                           spec.transform.denominator);
    };

    const std::size_t s = model_space.size();
    std::vector<std::optional<LatentSeries>> fitted(s);
    std::vector<std::exception_ptr> errors(s);
    auto fit_one = [&](std::size_t i) {
        const auto& pp = prepared_for(model_space[i]);
        if (!pp.panel) return;
        try {
            fitted[i] = fit_model(*pp.panel, model_space[i], pp.reference);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::size_t i = 0; i < s; ++i) fit_one(i);
    } else {
        for (std::size_t i = 0; i < s; ++i) fit_one(i);
    }

    std::vector<MemberInput> inputs;
    std::vector<MemberFailure> failures;
    for (std::size_t i = 0; i < s; ++i) {
        const auto& pp = prepared_for(model_space[i]);
        if (!pp.panel) {
            failures.push_back({model_space[i].id, pp.error});
        } else if (errors[i]) {
            std::string reason;
            if (!is_member_failure(errors[i], reason)) std::rethrow_exception(errors[i]);
            failures.push_back({model_space[i].id, reason});
        } else {
            inputs.push_back({std::move(*fitted[i]), pp.reference});
        }
    }

    EnsembleResult result = combine_members(std::move(inputs), std::move(failures), s);
    for (const auto& [key, pp] : prepared) {
        if (!pp.panel) continue;
        result.references.push_back({pp.panel->provenance.transform, pp.panel->dates, pp.reference});
        for (const auto& c : pp.panel->provenance.constant_columns) {
            result.warnings.push_back("constant column '" + c + "' under " + pp.panel->provenance.transform);
        }
    }
    if (!em_trace.converged) {
        result.warnings.push_back("EM imputation stopped at max_iter=" + std::to_string(settings.em.max_iter));
    }
    return result;
}

std::vector<ModelSpec> default_model_space(bool include_log_variants) {
    std::vector<Transform> transforms = {Transform{}};
    if (include_log_variants) transforms.push_back(Transform::parse("log_first_difference"));

    std::vector<ModelSpec> space;
    for (const auto& tr : transforms) {
        const std::string suffix = "." + tr.name();
        space.push_back({"pca_full" + suffix, tr, PcaFullParams{}});
        space.push_back({"pca_rolling_w60" + suffix, tr, PcaRollingParams{60}});
        space.push_back({"pca_rolling_w90" + suffix, tr, PcaRollingParams{90}});
        space.push_back({"ica_c2" + suffix, tr, IcaParams{}});
        space.push_back({"factor_analysis" + suffix, tr, FactorAnalysisParams{}});
        space.push_back({"state_space" + suffix, tr, StateSpaceParams{}});
        space.push_back({"sparse_filtering_f2" + suffix, tr, SparseFilteringParams{}});
    }
    return space;
}

} // namespace covidx
