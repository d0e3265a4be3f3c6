// Parallel kernels against their serial references.  Thread count comes
// from OMP_NUM_THREADS.

#include "paratorus/demos.hpp"
#include "paratorus/field_ops.hpp"
#include "paratorus/small_divisor.hpp"
#include "paratorus/symbol.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace paratorus;

namespace {

TorusField field(int n, int M) {
  return random_field(GridSpec::make(n, M), Shape::scalar_shape(), Parity::none, 1.0, M, 0.2, 11);
}

std::vector<double> points(int n, std::size_t count) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 2.0 * M_PI);
  std::vector<double> p(count * n);
  for (double& x : p) x = d(rng);
  return p;
}

template <bool Serial>
void evaluate(benchmark::State& st) {
  const TorusField u = field(2, static_cast<int>(st.range(0)));
  const std::vector<double> p = points(2, 4096);
  for (auto _ : st) benchmark::DoNotOptimize(Serial ? evaluate_at_serial(u, p) : evaluate_at(u, p));
}

template <bool Serial>
void paradiff(benchmark::State& st) {
  const int M = static_cast<int>(st.range(0));
  const TorusField u = field(2, M);
  const GridSymbol a = GridSymbol::from_function(GridSpec::make(2, M), 0.0, [](const double* x, const int* xi) {
    return cplx(std::cos(x[0]) / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]), std::sin(x[1]));
  });
  for (auto _ : st) benchmark::DoNotOptimize(Serial ? paradiff_apply_serial(a, u) : paradiff_apply(a, u));
}

template <bool Serial>
void measure(benchmark::State& st) {
  DioParams p;
  p.gamma = 0.05;
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st)
    benchmark::DoNotOptimize(Serial ? dio_measure_mc_serial(p, 2, 2.0, n, 7) : dio_measure_mc(p, 2, 2.0, n, 7));
}

}  // namespace

BENCHMARK(evaluate<true>)->Name("evaluate_at/serial")->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(evaluate<false>)->Name("evaluate_at/openmp")->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(paradiff<true>)->Name("paradiff_apply/serial")->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(paradiff<false>)->Name("paradiff_apply/openmp")->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(measure<true>)->Name("dio_measure_mc/serial")->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(measure<false>)->Name("dio_measure_mc/openmp")->Arg(2000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
