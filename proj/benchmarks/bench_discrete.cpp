#include "commact/discrete.hpp"

#include <benchmark/benchmark.h>

using namespace commact;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

void BM_discrete_map_kicked(benchmark::State& state) {
  const auto system = make_discrete_kicked(1, 1.0, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(discrete_map(system, scalar(0.1), scalar(0.7)));
  }
}
BENCHMARK(BM_discrete_map_kicked);

void BM_map_commutator(benchmark::State& state) {
  const auto quadratic = make_discrete_quadratic(1, 1.0);
  const auto kicked = make_discrete_kicked(1, 1.0, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(map_commutator(quadratic, kicked, scalar(0.0), scalar(1.0)));
  }
}
BENCHMARK(BM_map_commutator);

void BM_symplecticity_check(benchmark::State& state) {
  const auto kicked = make_discrete_kicked(1, 1.0, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(symplecticity_check(kicked, scalar(0.2), scalar(0.9)));
  }
}
BENCHMARK(BM_symplecticity_check);

void BM_corner_solve(benchmark::State& state) {
  const auto quadratic = make_discrete_quadratic(1, 1.0);
  const auto kicked = make_discrete_kicked(1, 1.0, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_corner(quadratic, kicked, scalar(0.0), scalar(1.0)));
  }
}
BENCHMARK(BM_corner_solve);

}  // namespace
