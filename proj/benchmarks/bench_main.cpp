#include <benchmark/benchmark.h>

#include <random>

#include "meanfield/density.hpp"
#include "meanfield/fourier.hpp"
#include "meanfield/hartree.hpp"
#include "meanfield/nbody.hpp"
#include "meanfield/potential.hpp"
#include "meanfield/symmetric.hpp"

namespace {

using namespace mf;

RealField soft_coulomb(const Grid& g) { return coulomb_potential(g, +1, 1.0, g.spacing(), CoreMode::soft); }

WaveFn default_wave(const Grid& g) { return WaveFn::gaussian(g, {0, 0, 0}, 1.0); }

void BM_FftAll(benchmark::State& state) {
  const Grid g = Grid::make(1, 32, 16.0);
  const int particles = static_cast<int>(state.range(0));
  NBodyState psi = product_state(default_wave(g), particles);
  const TensorLayout layout{g, particles};
  for (auto _ : state) {
    fft_all(psi.values, layout, FftDirection::forward);
    fft_all(psi.values, layout, FftDirection::backward);
    benchmark::DoNotOptimize(psi.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(psi.values.size()));
}
BENCHMARK(BM_FftAll)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_HartreeStep(benchmark::State& state) {
  const Grid g = Grid::make(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)), 16.0);
  const WaveFn psi0 = default_wave(g);
  const RealField v = soft_coulomb(g);
  HartreeOptions o;
  o.final_time = 0.01;
  o.dt = 1e-3;
  o.record_every = 10;
  for (auto _ : state) benchmark::DoNotOptimize(evolve_hartree(psi0, v, o));
}
BENCHMARK(BM_HartreeStep)->Args({1, 256})->Args({3, 32})->Unit(benchmark::kMillisecond);

void BM_FullTensorStep(benchmark::State& state) {
  const Grid g = Grid::make(1, 32, 16.0);
  const int particles = static_cast<int>(state.range(0));
  const NBodyHamiltonian ham(g, particles, soft_coulomb(g));
  NBodyState psi = product_state(default_wave(g), particles);
  for (auto _ : state) psi = nbody_step(psi, 1e-3, ham);
}
BENCHMARK(BM_FullTensorStep)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SymmetricStep(benchmark::State& state) {
  const Grid g = Grid::make(1, 32, 16.0);
  const int particles = static_cast<int>(state.range(0));
  const SymmetricPropagator prop(g, particles, soft_coulomb(g));
  const SymmetricState psi0 = symmetric_product_state(default_wave(g), particles);
  NBodyOptions o;
  o.final_time = 1e-3;
  o.dt = 1e-3;
  o.record_every = 1;
  for (auto _ : state) prop.evolve(psi0, o, [](double, const SymmetricState& s) { benchmark::DoNotOptimize(s.values.data()); });
}
BENCHMARK(BM_SymmetricStep)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ReduceSymmetric(benchmark::State& state) {
  const Grid g = Grid::make(1, 32, 16.0);
  const SymmetricState psi = symmetric_product_state(default_wave(g), static_cast<int>(state.range(0)));
  const int k = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(reduce(psi, k));
}
BENCHMARK(BM_ReduceSymmetric)->Args({3, 1})->Args({3, 2})->Args({4, 2})->Unit(benchmark::kMillisecond);

void BM_TraceNorm(benchmark::State& state) {
  const auto dim = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  OpMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = cplx{normal(rng), normal(rng)};
  }
  const OpMatrix herm = 0.5 * (a + a.adjoint());
  for (auto _ : state) benchmark::DoNotOptimize(trace_norm(herm));
}
BENCHMARK(BM_TraceNorm)->Arg(32)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
