#include "commact/trajectories.hpp"

#include <benchmark/benchmark.h>

using namespace commact;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

void BM_minimize_action_free(benchmark::State& state) {
  const auto system = make_free_particle(1, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        minimize_action(system, scalar(0.0), scalar(1.0), 1.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_minimize_action_free)->Arg(100)->Arg(400)->Arg(1600);

void BM_minimize_action_harmonic(benchmark::State& state) {
  const auto system = make_harmonic(1, 1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        minimize_action(system, scalar(0.0), scalar(1.0), 1.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_minimize_action_harmonic)->Arg(100)->Arg(400)->Arg(1600);

void BM_principal_action_harmonic(benchmark::State& state) {
  const auto system = make_harmonic(1, 1.0, 1.0);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(principal_action(system, scalar(0.0), scalar(1.0), 1.0, tol));
  }
}
BENCHMARK(BM_principal_action_harmonic)->Arg(4)->Arg(6)->Arg(8);

}  // namespace
