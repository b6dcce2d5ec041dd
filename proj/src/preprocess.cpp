#include "covidx/preprocess.hpp"

#include <cmath>
#include <limits>

#include "covidx/error.hpp"

namespace covidx {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Pattern {
    std::vector<Index> observed;
    std::vector<Index> missing;
};

Pattern row_pattern(const MatrixXd& x, Index row) {
    Pattern p;
    for (Index j = 0; j < x.cols(); ++j) {
        (is_missing(x(row, j)) ? p.missing : p.observed).push_back(j);
    }
    return p;
}

MatrixXd submatrix(const MatrixXd& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
    MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(Index(i), Index(j)) = m(rows[i], cols[j]);
    return out;
}

VectorXd subvector(const VectorXd& v, const std::vector<Index>& idx) {
    VectorXd out(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(Index(i)) = v(idx[i]);
    return out;
}

constexpr double kLog2Pi = 1.8378770664093454836;

/// Ridge-penalized observed-data log-likelihood.
double penalized_loglik(const MatrixXd& x, const std::vector<Pattern>& patterns, const VectorXd& mu,
                        const MatrixXd& sigma, double ridge) {
    double ll = 0.0;
    for (Index t = 0; t < x.rows(); ++t) {
        const auto& obs = patterns[std::size_t(t)].observed;
        if (obs.empty()) continue;
        const MatrixXd s_oo = submatrix(sigma, obs, obs);
        Eigen::LLT<MatrixXd> llt(s_oo);
        if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
        VectorXd d(static_cast<Index>(obs.size()));
        for (std::size_t k = 0; k < obs.size(); ++k) d(Index(k)) = x(t, obs[k]) - mu(obs[k]);
        const VectorXd sol = llt.matrixL().solve(d);
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        ll += -0.5 * (double(obs.size()) * kLog2Pi + logdet + sol.squaredNorm());
    }
    if (ridge > 0.0) {
        const MatrixXd inv = sigma.llt().solve(MatrixXd::Identity(sigma.rows(), sigma.cols()));
        ll -= 0.5 * double(x.rows()) * ridge * inv.trace();
    }
    return ll;
}

/// Conditional mean fill plus the summed conditional covariance of the missing block.
MatrixXd e_step(const MatrixXd& x, const std::vector<Pattern>& patterns, const VectorXd& mu,
                const MatrixXd& sigma, MatrixXd* cond_cov_sum) {
    MatrixXd filled = x;
    if (cond_cov_sum) cond_cov_sum->setZero(x.cols(), x.cols());
    for (Index t = 0; t < x.rows(); ++t) {
        const auto& pat = patterns[std::size_t(t)];
        if (pat.missing.empty()) continue;
        const auto& obs = pat.observed;
        const auto& mis = pat.missing;
        const MatrixXd s_mm = submatrix(sigma, mis, mis);
        if (obs.empty()) {
            for (Index j : mis) filled(t, j) = mu(j);
            if (cond_cov_sum) {
                for (std::size_t a = 0; a < mis.size(); ++a)
                    for (std::size_t b = 0; b < mis.size(); ++b)
                        (*cond_cov_sum)(mis[a], mis[b]) += s_mm(Index(a), Index(b));
            }
            continue;
        }
        const MatrixXd s_oo = submatrix(sigma, obs, obs);
        const MatrixXd s_mo = submatrix(sigma, mis, obs);
        Eigen::LDLT<MatrixXd> ldlt(s_oo);
        VectorXd d(static_cast<Index>(obs.size()));
        for (std::size_t k = 0; k < obs.size(); ++k) d(Index(k)) = x(t, obs[k]) - mu(obs[k]);
        const VectorXd cond_mean = subvector(mu, mis) + s_mo * ldlt.solve(d);
        for (std::size_t k = 0; k < mis.size(); ++k) filled(t, mis[k]) = cond_mean(Index(k));
        if (cond_cov_sum) {
            const MatrixXd cond = s_mm - s_mo * ldlt.solve(s_mo.transpose());
            for (std::size_t a = 0; a < mis.size(); ++a)
                for (std::size_t b = 0; b < mis.size(); ++b)
                    (*cond_cov_sum)(mis[a], mis[b]) += cond(Index(a), Index(b));
        }
    }
    return filled;
}

void require_complete(const Panel& panel, const char* op) {
    if (panel.missing_count() != 0) {
        throw DataError(std::string(op) + " requires a fully observed panel");
    }
}

} // namespace

Panel impute_em(const Panel& panel, const EmSettings& settings, EmTrace* trace) {
    panel.validate();
    if (settings.max_iter < 1) throw ConfigError("EM max_iter must be positive");
    if (!(settings.tol > 0.0)) throw ConfigError("EM tol must be positive");
    if (!(settings.ridge >= 0.0)) throw ConfigError("EM ridge must be non-negative");

    const MatrixXd& x = panel.values;
    const Index n = x.rows();
    const Index p = x.cols();

    VectorXd mu(p);
    MatrixXd sigma = MatrixXd::Zero(p, p);
    for (Index j = 0; j < p; ++j) {
        double sum = 0.0, sq = 0.0;
        int count = 0;
        for (Index t = 0; t < n; ++t) {
            if (!is_missing(x(t, j))) {
                sum += x(t, j);
                ++count;
            }
        }
        if (count < 2) throw UnimputableColumnError(panel.variables[std::size_t(j)]);
        mu(j) = sum / count;
        for (Index t = 0; t < n; ++t) {
            if (!is_missing(x(t, j))) sq += (x(t, j) - mu(j)) * (x(t, j) - mu(j));
        }
        sigma(j, j) = sq / count + settings.ridge;
    }

    EmTrace local;
    EmTrace& tr = trace ? *trace : local;
    tr = EmTrace{};

    if (panel.missing_count() == 0) return panel;

    std::vector<Pattern> patterns;
    patterns.reserve(std::size_t(n));
    for (Index t = 0; t < n; ++t) patterns.push_back(row_pattern(x, t));

    // A zero-variance column would make the starting covariance singular.
    for (Index j = 0; j < p; ++j) {
        if (sigma(j, j) <= 0.0) sigma(j, j) = 1e-12;
    }

    double ll = penalized_loglik(x, patterns, mu, sigma, settings.ridge);
    tr.log_likelihood.push_back(ll);
    tr.converged = false;

    MatrixXd cond_sum(p, p);
    for (int iter = 1; iter <= settings.max_iter; ++iter) {
        const MatrixXd filled = e_step(x, patterns, mu, sigma, &cond_sum);
        mu = filled.colwise().mean().transpose();
        const MatrixXd centered = filled.rowwise() - mu.transpose();
        sigma = (centered.transpose() * centered + cond_sum) / double(n);
        sigma = 0.5 * (sigma + sigma.transpose());
        sigma.diagonal().array() += settings.ridge;

        const double next = penalized_loglik(x, patterns, mu, sigma, settings.ridge);
        tr.log_likelihood.push_back(next);
        tr.iterations = iter;
        const double gain = next - ll;
        ll = next;
        if (gain < settings.tol) {
            tr.converged = true;
            break;
        }
    }

    Panel out = panel;
    out.values = e_step(x, patterns, mu, sigma, nullptr);
    return out;
}

CleanPanel to_clean(const Panel& panel) {
    panel.validate();
    require_complete(panel, "to_clean");
    CleanPanel out;
    out.dates = panel.dates;
    out.variables = panel.variables;
    out.values = panel.values;
    return out;
}

Panel to_panel(const CleanPanel& panel) {
    Panel out;
    out.dates = panel.dates;
    out.variables = panel.variables;
    out.values = panel.values;
    return out;
}

CleanPanel standardize(const CleanPanel& panel) {
    CleanPanel out = panel;
    out.provenance.constant_columns.clear();
    const Index n = panel.rows();
    for (Index j = 0; j < panel.cols(); ++j) {
        auto col = out.values.col(j);
        const double mean = col.mean();
        const double sd = n > 1 ? std::sqrt((col.array() - mean).square().sum() / double(n - 1)) : 0.0;
        if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
            col.setZero();
            out.provenance.constant_columns.push_back(panel.variables[std::size_t(j)]);
        } else {
            col = (col.array() - mean) / sd;
        }
    }
    out.provenance.standardized = true;
    return out;
}

CleanPanel standardize(const Panel& panel) { return standardize(to_clean(panel)); }

std::string Smoothing::describe() const {
    switch (kind) {
    case Kind::none: return "none";
    case Kind::ema: return "ema(alpha=" + std::to_string(alpha) + ")";
    case Kind::moving_average: return "moving_average(window=" + std::to_string(window) + ")";
    }
    return "none";
}

std::vector<double> smooth(std::span<const double> x, const Smoothing& method) {
    std::vector<double> out(x.begin(), x.end());
    if (x.empty()) return out;
    switch (method.kind) {
    case Smoothing::Kind::none: break;
    case Smoothing::Kind::ema: {
        if (!(method.alpha > 0.0 && method.alpha <= 1.0)) {
            throw ConfigError("ema alpha must lie in (0, 1], got " + std::to_string(method.alpha));
        }
        for (std::size_t t = 1; t < x.size(); ++t) {
            out[t] = method.alpha * x[t] + (1.0 - method.alpha) * out[t - 1];
        }
        break;
    }
    case Smoothing::Kind::moving_average: {
        if (method.window < 1 || std::size_t(method.window) > x.size()) {
            throw ConfigError("moving_average window must lie in [1, " + std::to_string(x.size()) +
                              "], got " + std::to_string(method.window));
        }
        const std::size_t w = std::size_t(method.window);
        for (std::size_t t = 0; t < x.size(); ++t) {
            const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
            double sum = 0.0;
            for (std::size_t k = lo; k <= t; ++k) sum += x[k];
            out[t] = sum / double(t + 1 - lo);
        }
        break;
    }
    }
    return out;
}

MatrixXd smooth(const MatrixXd& values, const Smoothing& method) {
    MatrixXd out(values.rows(), values.cols());
    for (Index j = 0; j < values.cols(); ++j) {
        const auto col = values.col(j);
        const auto s = smooth(std::span<const double>(col.data(), std::size_t(col.size())), method);
        out.col(j) = Eigen::Map<const VectorXd>(s.data(), Index(s.size()));
    }
    return out;
}

CleanPanel smooth(const CleanPanel& panel, const Smoothing& method) {
    CleanPanel out = panel;
    out.values = smooth(panel.values, method);
    out.provenance.smoothing = method.describe();
    return out;
}

Panel smooth(const Panel& panel, const Smoothing& method) {
    require_complete(panel, "smooth");
    Panel out = panel;
    out.values = smooth(panel.values, method);
    return out;
}

std::string Transform::name() const {
    switch (kind) {
    case TransformKind::levels: return "levels";
    case TransformKind::first_difference: return "first_difference";
    case TransformKind::log_first_difference: return "log_first_difference";
    case TransformKind::percent_change: return "percent_change";
    case TransformKind::positivity_ratio: return "positivity_ratio";
    }
    return "levels";
}

Transform Transform::parse(const std::string& name) {
    Transform t;
    if (name == "levels") t.kind = TransformKind::levels;
    else if (name == "first_difference") t.kind = TransformKind::first_difference;
    else if (name == "log_first_difference") t.kind = TransformKind::log_first_difference;
    else if (name == "percent_change") t.kind = TransformKind::percent_change;
    else if (name == "positivity_ratio") t.kind = TransformKind::positivity_ratio;
    else throw ConfigError("unknown transform '" + name + "'");
    return t;
}

namespace {

void check_positive(const CleanPanel& panel, Index col, Index from_row, const char* transform) {
    for (Index t = from_row; t < panel.rows(); ++t) {
        if (!(panel.values(t, col) > 0.0)) {
            throw DomainError(std::string(transform) + " needs positive values; column '" +
                              panel.variables[std::size_t(col)] + "' is " +
                              std::to_string(panel.values(t, col)) + " on " +
                              panel.dates[std::size_t(t)].iso());
        }
    }
}

} // namespace

CleanPanel apply_transform(const CleanPanel& panel, const Transform& transform) {
    const Index n = panel.rows();
    const Index p = panel.cols();
    CleanPanel out = panel;
    out.provenance.transform = transform.name();
    out.provenance.standardized = false;

    auto drop_first = [&](auto&& cell) {
        if (n < 2) throw DataError(transform.name() + " needs at least 2 dates");
        out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
        out.values.resize(n - 1, p);
        for (Index t = 1; t < n; ++t)
            for (Index j = 0; j < p; ++j) out.values(t - 1, j) = cell(t, j);
    };

    switch (transform.kind) {
    case TransformKind::levels: break;
    case TransformKind::first_difference:
        drop_first([&](Index t, Index j) { return panel.values(t, j) - panel.values(t - 1, j); });
        break;
    case TransformKind::log_first_difference:
        for (Index j = 0; j < p; ++j) check_positive(panel, j, 0, "log_first_difference");
        drop_first([&](Index t, Index j) {
            return std::log(panel.values(t, j)) - std::log(panel.values(t - 1, j));
        });
        break;
    case TransformKind::percent_change:
        for (Index j = 0; j < p; ++j) check_positive(panel, j, 0, "percent_change");
        drop_first([&](Index t, Index j) {
            return 100.0 * (panel.values(t, j) - panel.values(t - 1, j)) / panel.values(t - 1, j);
        });
        break;
    case TransformKind::positivity_ratio: {
        const Index num = panel.column_index(transform.numerator);
        const Index den = panel.column_index(transform.denominator);
        if (num < 0) throw SchemaError(transform.numerator);
        if (den < 0) throw SchemaError(transform.denominator);
        check_positive(panel, den, 0, "positivity_ratio");
        out.values.conservativeResize(n, p + 1);
        out.values.col(p) = panel.values.col(num).array() / panel.values.col(den).array();
        out.variables.push_back("positivity_ratio");
        break;
    }
    }
    return out;
}

bool transform_defined(const CleanPanel& panel, const Transform& transform) {
    try {
        apply_transform(panel, transform);
        return true;
    } catch (const DataError&) {
        return false;
    }
}

} // namespace covidx
