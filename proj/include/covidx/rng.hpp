#pragma once

#include <cstdint>
#include <random>

namespace covidx {

/// Platform-independent random source.
///
/// std::mt19937_64 has a bit-exact definition in the standard; the standard
/// distributions do not, so uniforms and normals are derived here by hand:
/// uniforms take the top 53 bits, normals go through the inverse normal CDF
/// (Wichura AS241, ~1e-16 relative accuracy). One engine draw per variate.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal via inverse CDF of uniform().
    double normal();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

} // namespace covidx
