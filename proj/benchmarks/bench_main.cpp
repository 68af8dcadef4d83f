#include <benchmark/benchmark.h>

#include "qps/duality.hpp"
#include "qps/reducibility.hpp"
#include "qps/spectrum.hpp"

using namespace qps;

namespace {

void bench_eigen_count_tridiagonal(benchmark::State& state) {
  const auto t = truncate(schrodinger_hopping(), amo_potential(1.0), Frequency::golden(),
                          0.5, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigen_count(t, 0.37));
  }
}
BENCHMARK(bench_eigen_count_tridiagonal)->Arg(500)->Arg(2000)->Arg(8000);

void bench_eigen_count_banded(benchmark::State& state) {
  const auto v = cosine_series({{1, 0.1}, {2, 0.04}});
  const auto t = truncate(v, schrodinger_hopping(), Frequency::golden(), 0.5,
                          static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigen_count(t, 0.37));
  }
}
BENCHMARK(bench_eigen_count_banded)->Arg(500)->Arg(2000);

void bench_jacobi(benchmark::State& state) {
  const auto l =
      dual_operator(amo_potential(0.5), Frequency::golden(), 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eigenpairs(l).values.front());
  }
}
BENCHMARK(bench_jacobi)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void bench_lyapunov(benchmark::State& state) {
  const Cocycle c{0.5, amo_potential(1.0), Frequency::golden()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(lyapunov(c, 0.0, state.range(0)));
  }
}
BENCHMARK(bench_lyapunov)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void bench_rotation(benchmark::State& state) {
  const Cocycle c{0.5, amo_potential(1.0), Frequency::golden()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotation_number(c, 0.0, state.range(0)));
  }
}
BENCHMARK(bench_rotation)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void bench_ids(benchmark::State& state) {
  ScanContext ctx;
  ctx.w = schrodinger_hopping();
  ctx.v = amo_potential(1.0);
  ctx.omega = Frequency::golden();
  ctx.n_half = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ids(ctx, 0.37).value);
  }
}
BENCHMARK(bench_ids)->Arg(500)->Arg(2000);

void bench_fourier_eval(benchmark::State& state) {
  FourierSeries f(static_cast<int>(state.range(0)));
  for (int k = -f.degree(); k <= f.degree(); ++k)
    f.at(k) = {std::exp(-0.05 * std::abs(k)), 0.1 / (1 + k * k)};
  double theta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.eval(theta));
    theta += 0.37;
  }
}
BENCHMARK(bench_fourier_eval)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
