// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "osclab/kernels.hpp"

using namespace osclab;

namespace {

std::vector<double> paths(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = 38.4e-6 * static_cast<double>(i) / static_cast<double>(n - 1);
  return p;
}

template <auto Kernel>
void spectrum_curve(benchmark::State& state) {
  const auto quad = SpectralQuadrature::build(LaserSpec::diode(), 61);
  const auto p = paths(static_cast<std::size_t>(state.range(0)));
  std::vector<TransitionResult> out(p.size());
  for (auto _ : state) {
    Kernel(MixingAngle(0.5), p, quad, 0.057, 0.0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void oracle_grid(benchmark::State& state) {
  const kernels::OracleGrid grid{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)),
                                 4.0 * std::numbers::pi};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(grid));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <auto Kernel>
void periodogram(benchmark::State& state) {
  const std::size_t n = 4096;
  std::vector<double> x(n), y(n), f(static_cast<std::size_t>(state.range(0))), power(f.size());
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 38.4 * static_cast<double>(i) / (n - 1);
    y[i] = std::sin(2 * std::numbers::pi * x[i] / 11.1);
  }
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = 0.026 + 0.0026 * static_cast<double>(k);
  for (auto _ : state) {
    Kernel(x, y, f, power);
    benchmark::DoNotOptimize(power.data());
  }
}

}  // namespace

BENCHMARK(spectrum_curve<kernels::spectrum_curve_serial>)->Name("spectrum_curve/serial")->Arg(10001)->Arg(100001);
BENCHMARK(spectrum_curve<kernels::spectrum_curve_parallel>)->Name("spectrum_curve/openmp")->Arg(10001)->Arg(100001);
BENCHMARK(oracle_grid<kernels::oracle_max_deviation_serial>)->Name("oracle_grid/serial")->Arg(100)->Arg(400);
BENCHMARK(oracle_grid<kernels::oracle_max_deviation_parallel>)->Name("oracle_grid/openmp")->Arg(100)->Arg(400);
BENCHMARK(periodogram<kernels::periodogram_serial>)->Name("periodogram/serial")->Arg(2000);
BENCHMARK(periodogram<kernels::periodogram_parallel>)->Name("periodogram/openmp")->Arg(2000);

BENCHMARK_MAIN();
