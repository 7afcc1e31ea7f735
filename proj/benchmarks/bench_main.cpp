#include "ranklab/ineq.hpp"
#include "ranklab/operator.hpp"
#include "ranklab/solver.hpp"

#include <benchmark/benchmark.h>

using namespace ranklab;

static void BM_Eigh(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(1, 0, 0);
  const SymMatrix a = random_symmetric(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eigh(a));
}
BENCHMARK(BM_Eigh)->DenseRange(2, 6);

static void BM_QJet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ScalarField f = builtin_field("convex_poly", {{"seed", {3.0}}, {"degree", {6.0}}}, n);
  const Jet4 j = f.jet4(Vector::Constant(n, 0.1));
  for (auto _ : state) benchmark::DoNotOptimize(q_jet(j, 1));
}
BENCHMARK(BM_QJet)->DenseRange(2, 4);

static void BM_FormSpectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(2, 0, 0);
  const auto op = make_operator("logdet", {});
  const OperatorJet j = operator_jet(*op, {random_spd(n, rng, 0.5, 2.0), Vector::Zero(n), 0.0, Vector::Ones(n)});
  for (auto _ : state) benchmark::DoNotOptimize(form_spectrum(j));
}
BENCHMARK(BM_FormSpectrum)->DenseRange(2, 4);

static void BM_NewtonLogdet(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const auto half = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  DiscreteProblem p{make_operator("logdet", {}), BoxDomain(Vector::Zero(2), 1.0, grid), half,
                    [&](const Vector& x) { return half(x) + 0.05 * (1 - x(0) * x(0)) * (1 - x(1) * x(1)); }};
  for (auto _ : state) benchmark::DoNotOptimize(newton_solve(p));
}
BENCHMARK(BM_NewtonLogdet)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
