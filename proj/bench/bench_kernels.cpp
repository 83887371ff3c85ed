#include <benchmark/benchmark.h>

#include "decaylab/curves.hpp"
#include "decaylab/flows.hpp"
#include "decaylab/objective.hpp"
#include "decaylab/spectral.hpp"
#include "decaylab/sqrtcompare.hpp"

using namespace decaylab;

namespace {

// arg 0 = serial reference, 1 = OpenMP
Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::parallel : Exec::serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) ? "parallel" : "serial"); }

void BM_SqrtDerivIntegral(benchmark::State& st) {
  const auto g = make_named_curve(CurveFamily::power_log, {{"alpha", 1.5}});
  for (auto _ : st) benchmark::DoNotOptimize(sqrt_deriv_integral(g, 1e5, 4'000'000, exec_of(st)).value);
  label(st);
}

void BM_SgdReplicas(benchmark::State& st) {
  const QuadraticObjective obj({1.0, 0.5, 0.1, 0.01});
  SgdOptions so;
  so.replicas = 2000;
  so.seed = 1;
  so.L = 1.0;
  so.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(run_sgd(obj, {1, 1, 1, 1}, 0.5, 1.0, 500, so).size());
  label(st);
}

void BM_HbEnergy(benchmark::State& st) {
  const auto p = build_profile(make_named_curve(CurveFamily::inverse_power, {{"power", 1.5}, {"shift", 0.0}, {"t_min", 1.0}}),
                               1e4, 64);
  for (auto _ : st) benchmark::DoNotOptimize(hb_energy(p, 3.0, {1.0, 10.0, 100.0}, 0.01, exec_of(st)).size());
  label(st);
}

void BM_SqrtCompareFuzz(benchmark::State& st) {
  FuzzOptions fo;
  fo.trials = 2000;
  fo.mode = FuzzMode::max;
  fo.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(fuzz_counterexample_search(fo).violations);
  label(st);
}

}  // namespace

BENCHMARK(BM_SqrtDerivIntegral)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SgdReplicas)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HbEnergy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SqrtCompareFuzz)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
