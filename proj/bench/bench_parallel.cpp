// Serial reference loops against their OpenMP counterparts. Outputs are
// bitwise identical (see test_parallel); only the wall time differs.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "fjcal/calibration.hpp"
#include "fjcal/weighting.hpp"
#include "oracles.hpp"

using namespace fjcal;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) ? "openmp x" + std::to_string(omp_get_max_threads()) : "serial");
}

void BM_EstimationError(benchmark::State& state) {
    auto cfg = make_objective_config(Variant::Adaptive, oracle::synthetic_market_returns(1000, 1),
                                     MomentMatrix::Identity(), 8, 1);
    cfg.execution = mode(state);
    const ModelParameters p;
    for (auto _ : state) benchmark::DoNotOptimize(estimation_error(p, cfg));
    label(state);
}

void BM_BootstrapWeights(benchmark::State& state) {
    const auto r = oracle::synthetic_market_returns(2800, 2);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_weight_matrix(r, 100, 40, 3, mode(state)));
    label(state);
}

void BM_GaGeneration(benchmark::State& state) {
    auto cfg = make_objective_config(Variant::Adaptive, oracle::synthetic_market_returns(500, 3),
                                     MomentMatrix::Identity(), 2, 1);
    cfg.execution = mode(state);
    const ParameterSpace space(Variant::Adaptive, default_bounds());
    GaOptions opt;
    opt.population = 16;
    opt.generations = 1;
    for (auto _ : state) benchmark::DoNotOptimize(ga_optimize(make_batch_objective(space, cfg), space.bounds(), opt, 4));
    label(state);
}

}  // namespace

BENCHMARK(BM_EstimationError)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BootstrapWeights)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GaGeneration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
