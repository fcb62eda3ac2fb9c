#include "commact/composition.hpp"

#include <benchmark/benchmark.h>

using namespace commact;

namespace {

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

void BM_integrate_flow_harmonic(benchmark::State& state) {
  const auto hamiltonian = hamiltonian_of(make_harmonic(1, 1.0, 1.0));
  const PhasePoint x0{scalar(0.0), scalar(1.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        integrate_flow(hamiltonian, x0, 1.0, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_integrate_flow_harmonic)->Arg(100)->Arg(1000);

void BM_flow_commutator(benchmark::State& state) {
  const auto h1 = hamiltonian_of(make_free_particle(1, 1.0));
  const auto h2 = hamiltonian_of(make_harmonic(1, 1.0, 1.0));
  const PhasePoint x0{scalar(0.0), scalar(1.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow_commutator(h1, h2, x0, 0.5, 0.5));
  }
}
BENCHMARK(BM_flow_commutator);

void BM_composed_action(benchmark::State& state) {
  const auto light = make_free_particle(1, 1.0);
  const auto harmonic = make_harmonic(1, 1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(composed_action(light, harmonic, scalar(0.0), scalar(1.0), 1.0, 1.0,
                                             ComposeOrder::one_two));
  }
}
BENCHMARK(BM_composed_action);

}  // namespace
