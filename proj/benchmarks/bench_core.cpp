#include <benchmark/benchmark.h>

#include "rkhs/kernel.hpp"
#include "rkhs/measure.hpp"
#include "rkhs/mercer.hpp"
#include "rkhs/operator.hpp"

namespace {

using namespace rkhs;

void bm_gram_assembly(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto mu = build_uniform_grid(0.0, 1.0, n);
    const auto k = Kernel<double>::gaussian(1.0);
    for (auto _ : state) {
        auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));
        benchmark::DoNotOptimize(g.entries.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_gram_assembly)->Range(32, 1024)->Complexity(benchmark::oNSquared);

void bm_decompose(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto mu = build_uniform_grid(0.0, 1.0, n);
    const auto k = Kernel<double>::brownian();
    for (auto _ : state) {
        auto dec = decompose(k, mu);
        benchmark::DoNotOptimize(dec.rank());
    }
}
BENCHMARK(bm_decompose)->Range(32, 512);

void bm_operator_apply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto mu = build_uniform_grid(0.0, 1.0, n);
    const auto op = make_operator(Kernel<double>::laplace(0.7), mu);
    const VectorX<double> phi = VectorX<double>::Ones(static_cast<Eigen::Index>(n));
    for (auto _ : state) {
        auto image = apply_integral_operator(op, phi);
        benchmark::DoNotOptimize(image.data());
    }
}
BENCHMARK(bm_operator_apply)->Range(64, 2048);

void bm_spectral_norm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto mu = build_uniform_grid(0.0, 1.0, n);
    const auto k = Kernel<double>::brownian();
    const auto dec = decompose(k, mu);
    const auto g = gram(k, std::span<const DomainPoint>(mu.nodes()));
    const VectorX<double> v = g.entries.col(0);
    for (auto _ : state) {
        auto sn = rkhs_norm_spectral(dec, v);
        benchmark::DoNotOptimize(sn.norm_sq);
    }
}
BENCHMARK(bm_spectral_norm)->Range(32, 512);

}  // namespace

BENCHMARK_MAIN();
