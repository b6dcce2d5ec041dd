#include <algorithm>
#include <cmath>

#include "covidx/error.hpp"
#include "covidx/models.hpp"
#include "covidx/stats.hpp"

namespace covidx {

std::string family_name(Family f) {
    switch (f) {
    case Family::pca_full: return "pca_full";
    case Family::pca_rolling: return "pca_rolling";
    case Family::ica: return "ica";
    case Family::factor_analysis: return "factor_analysis";
    case Family::state_space: return "state_space";
    case Family::sparse_filtering: return "sparse_filtering";
    }
    return "unknown";
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::pca_full, Family::pca_rolling, Family::ica, Family::factor_analysis,
                     Family::state_space, Family::sparse_filtering}) {
        if (family_name(f) == name) return f;
    }
    throw ConfigError("unknown model family '" + name + "'");
}

std::size_t LatentSeries::covered() const {
    return std::size_t(std::count(coverage.begin(), coverage.end(), true));
}

Eigen::Index select_by_reference(const Eigen::MatrixXd& candidates, std::span<const double> reference,
                                 std::vector<std::string>& warnings) {
    if (std::size_t(candidates.rows()) != reference.size()) {
        throw Error("reference series length does not match the panel");
    }
    Eigen::Index best = -1;
    double best_abs = -1.0;
    for (Eigen::Index k = 0; k < candidates.cols(); ++k) {
        const auto col = candidates.col(k);
        const auto r = pearson({col.data(), std::size_t(col.size())}, reference);
        if (r && std::fabs(*r) > best_abs) {
            best_abs = std::fabs(*r);
            best = k;
        }
    }
    if (best < 0) {
        warnings.push_back("component selection: correlation with the reference is undefined; "
                           "kept the first component");
        return 0;
    }
    return best;
}

LatentSeries fit_model(const CleanPanel& panel, const ModelSpec& spec, std::span<const double> reference) {
    LatentSeries out = std::visit(
        [&](const auto& params) -> LatentSeries {
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, PcaFullParams>) {
                return fit_pca_full(panel);
            } else if constexpr (std::is_same_v<P, PcaRollingParams>) {
                return fit_pca_rolling(panel, params.window, Execution::serial);
            } else if constexpr (std::is_same_v<P, IcaParams>) {
                return fit_ica(panel, params, reference);
            } else if constexpr (std::is_same_v<P, FactorAnalysisParams>) {
                return fit_factor_analysis(panel, params);
            } else if constexpr (std::is_same_v<P, StateSpaceParams>) {
                return fit_state_space(panel, params);
            } else {
                return fit_sparse_filtering(panel, params, reference);
            }
        },
        spec.params);
    out.model_id = spec.id;
    return out;
}

} // namespace covidx
