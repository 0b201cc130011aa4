// Microbenchmarks comparing the OpenMP kernel path against the serial
// reference on the hot loops: deterministic reductions, curvature assembly,
// volume quadrature, and a full flow step. The two paths produce bitwise
// identical results (see test_parallel.cpp); this target measures what the
// parallelism buys at various grid sizes.
//
//   ./mdf_bench                        # everything
//   ./mdf_bench --benchmark_filter=curvature

#include <benchmark/benchmark.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "mdf/flow.hpp"
#include "mdf/geometry.hpp"
#include "mdf/parallel.hpp"

using namespace mdf;

namespace {

WarpedMetric schw(int n) { return make_schwarzschild(n, 1.0).metric; }

// serial reference: threads pinned to 1; omp: library default (all cores)
void use_serial() { par::set_threads(1); }
void use_omp() { par::set_threads(0); }

void bm_sum_serial(benchmark::State& st) {
  const std::size_t n = (std::size_t)st.range(0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(1e-3 * (double)i);
  for (auto _ : st) {
    double s = par::serial_blocked_sum(n, [&](std::size_t i) { return v[i]; });
    benchmark::DoNotOptimize(s);
  }
  st.SetItemsProcessed((int64_t)st.iterations() * (int64_t)n);
}

void bm_sum_omp(benchmark::State& st) {
  use_omp();
  const std::size_t n = (std::size_t)st.range(0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(1e-3 * (double)i);
  for (auto _ : st) {
    double s = par::blocked_sum(n, [&](std::size_t i) { return v[i]; });
    benchmark::DoNotOptimize(s);
  }
  st.SetItemsProcessed((int64_t)st.iterations() * (int64_t)n);
}

void bm_curvature_serial(benchmark::State& st) {
  use_serial();
  const WarpedMetric m = schw((int)st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(curvature(m));
  use_omp();
}

void bm_curvature_omp(benchmark::State& st) {
  use_omp();
  const WarpedMetric m = schw((int)st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(curvature(m));
}

void bm_volume_integral_serial(benchmark::State& st) {
  use_serial();
  const WarpedMetric m = schw((int)st.range(0));
  const std::vector<double> d = curvature(m).ricci_sq;
  for (auto _ : st) benchmark::DoNotOptimize(volume_integral(m, d, false));
  use_omp();
}

void bm_volume_integral_omp(benchmark::State& st) {
  use_omp();
  const WarpedMetric m = schw((int)st.range(0));
  const std::vector<double> d = curvature(m).ricci_sq;
  for (auto _ : st) benchmark::DoNotOptimize(volume_integral(m, d, false));
}

void bm_flow_step_serial(benchmark::State& st) {
  use_serial();
  const WarpedMetric m = schw((int)st.range(0));
  const double dt = cfl_dt(m);
  for (auto _ : st) benchmark::DoNotOptimize(flow_step(m, dt));
  use_omp();
}

void bm_flow_step_omp(benchmark::State& st) {
  use_omp();
  const WarpedMetric m = schw((int)st.range(0));
  const double dt = cfl_dt(m);
  for (auto _ : st) benchmark::DoNotOptimize(flow_step(m, dt));
}

} // namespace

// Grids below 2 * kReduceBlock nodes always take the serial path, so the
// smallest size doubles as a check that the dispatch overhead is negligible.
BENCHMARK(bm_sum_serial)->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_sum_omp)->Arg(4096)->Arg(65536)->Arg(1 << 20);
BENCHMARK(bm_curvature_serial)->Arg(2048)->Arg(16384)->Arg(131072);
BENCHMARK(bm_curvature_omp)->Arg(2048)->Arg(16384)->Arg(131072);
BENCHMARK(bm_volume_integral_serial)->Arg(2048)->Arg(16384)->Arg(131072);
BENCHMARK(bm_volume_integral_omp)->Arg(2048)->Arg(16384)->Arg(131072);
BENCHMARK(bm_flow_step_serial)->Arg(2048)->Arg(16384)->Arg(131072);
BENCHMARK(bm_flow_step_omp)->Arg(2048)->Arg(16384)->Arg(131072);

BENCHMARK_MAIN();
