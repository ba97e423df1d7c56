#include <benchmark/benchmark.h>

#include <random>

#include "vstab/continuation.hpp"

using namespace vstab;

namespace {

ComplexMatrix dense(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) m(r, c) = {u(rng), u(rng)};
    for (std::size_t i = 0; i < n; ++i) m(i, i) += Complex{2.0 * static_cast<double>(n), 0.0};
    return m;
}

}  // namespace

static void BM_LuSolve(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = dense(n, 1);
    const ComplexVector b(n, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(lu_solve(a, b));
}
BENCHMARK(BM_LuSolve)->Arg(4)->Arg(10)->Arg(40);

static void BM_Invert(benchmark::State& state) {
    const auto a = dense(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(invert(a));
}
BENCHMARK(BM_Invert)->Arg(10);

static void BM_MinSingularValue(benchmark::State& state) {
    const auto a = dense(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(min_singular_value(a));
}
BENCHMARK(BM_MinSingularValue)->Arg(4)->Arg(10);

static void BM_TwoBusSolve(benchmark::State& state) {
    const PowerFlowModel model(two_bus_counterexample());
    for (auto _ : state) benchmark::DoNotOptimize(model.solve(1.0));
}
BENCHMARK(BM_TwoBusSolve);

static void BM_TwoBusAssess(benchmark::State& state) {
    const StabilityAnalyzer analyzer(two_bus_counterexample());
    const auto sol = analyzer.model().solve(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(analyzer.assess(sol));
}
BENCHMARK(BM_TwoBusAssess);

static void BM_TwoBusSweep(benchmark::State& state) {
    const Network net = two_bus_counterexample();
    for (auto _ : state) benchmark::DoNotOptimize(sweep(net, 5.0, kDefaultSweepSteps, 2));
}
BENCHMARK(BM_TwoBusSweep)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
