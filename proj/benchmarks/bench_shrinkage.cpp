#include <benchmark/benchmark.h>

#include "opshrink/opshrink.hpp"

using namespace opshrink;

namespace {

BlockParams sample_block() {
    return BlockParams::from_component(component_from_strength(1.5, AspectRatio(0.25)));
}

SpikedSample sample(Eigen::Index p, Eigen::Index n) {
    SpikedModelConfig cfg;
    cfg.p = p;
    cfg.n = n;
    cfg.strengths = {3.0, 2.0};
    cfg.seed = 1;
    return generate_spiked(cfg);
}

void BM_BlockLoss(benchmark::State& state) {
    const BlockParams b = sample_block();
    double q = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(block_loss(q, b));
        q = q < 2.0 ? q + 1e-3 : 0.5;
    }
}
BENCHMARK(BM_BlockLoss);

void BM_OptimalQFromSigma(benchmark::State& state) {
    const AspectRatio gamma(0.5);
    double sigma = 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimal_q_from_sigma(sigma, gamma));
        sigma = sigma < 10.0 ? sigma + 1e-3 : 2.0;
    }
}
BENCHMARK(BM_OptimalQFromSigma);

void BM_BruteForce(benchmark::State& state) {
    const BlockParams b = sample_block();
    for (auto _ : state) {
        benchmark::DoNotOptimize(brute_force_optimal_q(b, 2.0 * b.t, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_BruteForce)->Arg(1000)->Arg(10000);

void BM_ThinSvd(benchmark::State& state) {
    const SpikedSample s = sample(state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(thin_svd(s.observed));
    }
}
BENCHMARK(BM_ThinSvd)->Args({100, 400})->Args({200, 800})->Unit(benchmark::kMillisecond);

void BM_Denoise(benchmark::State& state) {
    const SpikedSample s = sample(state.range(0), state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(denoise(s.observed, Optimal{}));
    }
}
BENCHMARK(BM_Denoise)->Args({100, 400})->Args({200, 800})->Unit(benchmark::kMillisecond);

void BM_LowRankOperatorNorm(benchmark::State& state) {
    Rng rng(2);
    const LowRankMatrix m{rng.normal_matrix(state.range(0), 4), rng.normal_matrix(4 * state.range(0), 4)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(operator_norm(m));
    }
}
BENCHMARK(BM_LowRankOperatorNorm)->Arg(200)->Arg(800);

} // namespace

BENCHMARK_MAIN();
