#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

#include "covidx/ensemble.hpp"
#include "covidx/models.hpp"
#include "covidx/preprocess.hpp"
#include "covidx/rng.hpp"
#include "covidx/spread.hpp"
#include "covidx/synthetic.hpp"

using namespace covidx;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

const char* label(const benchmark::State& state) { return state.range(0) == 0 ? "serial" : "openmp"; }

Panel synthetic_panel(int n_obs, int n_vars) {
    SyntheticSpec spec;
    spec.n_obs = n_obs;
    spec.n_vars = n_vars;
    return generate(spec).panel;
}

void BM_RollingPca(benchmark::State& state) {
    const CleanPanel z = standardize(to_clean(impute_em(synthetic_panel(int(state.range(1)), 12))));
    for (auto _ : state) benchmark::DoNotOptimize(fit_pca_rolling(z, 60, mode(state)));
    state.SetLabel(label(state));
    state.SetItemsProcessed(state.iterations() * (z.rows() - 59));
}
BENCHMARK(BM_RollingPca)->ArgsProduct({{0, 1}, {300, 2000}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_SpreadIndex(benchmark::State& state) {
    RegionalCases cases;
    const int n = int(state.range(1));
    Rng rng(3);
    cases.new_cases.resize(n, 21);
    for (int t = 0; t < n; ++t) {
        cases.dates.push_back(Date(2020, 2, 24).plus_days(t));
        for (int u = 0; u < 21; ++u) cases.new_cases(t, u) = std::floor(rng.uniform(0.0, 4000.0));
    }
    for (int u = 0; u < 21; ++u) cases.regions.push_back("region" + std::to_string(u));
    for (auto _ : state) benchmark::DoNotOptimize(compute_csi(cases, mode(state)));
    state.SetLabel(label(state));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SpreadIndex)->ArgsProduct({{0, 1}, {1000, 100000}})->Unit(benchmark::kMicrosecond)->UseRealTime();

void BM_DefaultEnsemble(benchmark::State& state) {
    const Panel panel = synthetic_panel(int(state.range(1)), 6);
    const auto space = default_model_space(false);
    for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(panel, space, {}, mode(state)));
    state.SetLabel(label(state));
}
BENCHMARK(BM_DefaultEnsemble)->ArgsProduct({{0, 1}, {300}})->Unit(benchmark::kMillisecond)->UseRealTime();

} // namespace

BENCHMARK_MAIN();
