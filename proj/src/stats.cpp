#include "covidx/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covidx/error.hpp"

namespace covidx {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / double(x.size() - 1));
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) return std::nullopt;
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw DegenerateInputError("covariance needs at least 2 rows");
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / double(x.rows() - 1);
    return 0.5 * (cov + cov.transpose());
}

void canonicalize_sign(Eigen::VectorXd& v) {
    const double s = v.sum();
    constexpr double kTie = 1e-12;
    if (s < -kTie) {
        v = -v;
    } else if (std::fabs(s) <= kTie) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (std::fabs(v(i)) > kTie) {
                if (v(i) < 0.0) v = -v;
                break;
            }
        }
    }
}

std::vector<EigenPair> sorted_eigenpairs(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw DegenerateInputError("eigendecomposition failed");
    }
    const Eigen::Index p = symmetric.rows();
    std::vector<EigenPair> out;
    out.reserve(std::size_t(p));
    // Eigen returns ascending eigenvalues.
    for (Eigen::Index k = p - 1; k >= 0; --k) {
        EigenPair e{solver.eigenvalues()(k), solver.eigenvectors().col(k)};
        canonicalize_sign(e.vector);
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace covidx
