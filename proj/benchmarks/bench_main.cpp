#include <benchmark/benchmark.h>

#include "cpkit/cusum.hpp"
#include "cpkit/datasets.hpp"
#include "cpkit/rng.hpp"
#include "cpkit/search.hpp"

using namespace cpkit;

namespace {

TimeSeries bench_series(std::size_t n, std::uint64_t seed) {
    SimSpec spec;
    spec.n = n;
    spec.segment_means = {0.0, 1.0, 0.0, 1.0};
    spec.changepoints = {n / 4 + 1, n / 2 + 1, 3 * n / 4 + 1};
    spec.seed = seed;
    return simulate(spec).first;
}

void BM_NormalDraws(benchmark::State& state) {
    Rng rng(1);
    double acc = 0.0;
    for (auto _ : state) {
        for (int i = 0; i < 1024; ++i) acc += rng.next_normal();
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_NormalDraws);

void BM_BridgeDrawIntB2(benchmark::State& state) {
    const auto n = std::uint64_t(state.range(0));
    std::uint64_t i = 0;
    for (auto _ : state) {
        auto d = simulate_null(NullKind::IntegratedBridgeSquared, n, 10000, 7 + i++, 1);
        benchmark::DoNotOptimize(d.sample().data());
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_BridgeDrawIntB2)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Cusum(benchmark::State& state) {
    const auto s = bench_series(std::size_t(state.range(0)), 11);
    for (auto _ : state) {
        auto c = cusum(s);
        benchmark::DoNotOptimize(c.data());
    }
}
BENCHMARK(BM_Cusum)->Arg(121)->Arg(500);

void BM_GaussianLoglikAr1(benchmark::State& state) {
    const auto s = bench_series(std::size_t(state.range(0)), 13);
    const ChangepointConfig c{{state.range(0) / 4ul + 1, state.range(0) / 2ul + 1}, s.size()};
    for (auto _ : state) {
        auto fit = gaussian_loglik(s, c, MeanKind::Constant, 1);
        benchmark::DoNotOptimize(fit.minus2loglik);
    }
}
BENCHMARK(BM_GaussianLoglikAr1)->Arg(121)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_GaSearch(benchmark::State& state) {
    const auto s = bench_series(500, 17);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto r = ga_search(s, PenaltyKind::BIC, MeanKind::Constant, 0, GaParams{}, ++seed);
        benchmark::DoNotOptimize(r.fit.objective);
    }
}
BENCHMARK(BM_GaSearch)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
