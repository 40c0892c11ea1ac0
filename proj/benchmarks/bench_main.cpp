#include <benchmark/benchmark.h>

#include <map>

#include "ecobounds/bounds.hpp"
#include "ecobounds/estimator.hpp"
#include "ecobounds/nuisance.hpp"
#include "ecobounds/parallel.hpp"
#include "ecobounds/rng.hpp"
#include "ecobounds/simulation.hpp"

namespace {

using namespace ecobounds;

const std::pair<Dataset, GroundTruth>& simulated(std::size_t n) {
  static std::map<std::size_t, std::pair<Dataset, GroundTruth>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    DgpConfig c;
    c.n = n;
    c.seed = 1;
    it = cache.emplace(n, generate(c)).first;
  }
  return it->second;
}

void BM_ClosedFormBounds(benchmark::State& state) {
  Rng r(3);
  std::vector<std::pair<double, double>> args(4096);
  for (auto& a : args) a = {r.uniform(-2, 2), r.uniform(0.01, 1)};
  const OutcomeBounds b{-1, 2};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [dm, nu] = args[i++ & 4095];
    benchmark::DoNotOptimize(theorem1_bounds(dm, nu, b));
  }
}
BENCHMARK(BM_ClosedFormBounds);

void BM_InfluencePhi(benchmark::State& state) {
  const auto& [d, t] = simulated(2000);
  const Design design(d, ModelSpec{});
  const Vector beta = Vector::Zero(static_cast<Eigen::Index>(design.dim()));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(influence_phi(d.samples[i++ % d.size()], beta, t.oracle, design));
  }
}
BENCHMARK(BM_InfluencePhi);

void BM_SolveBiasCorrected(benchmark::State& state) {
  set_thread_budget(1);
  const auto& [d, t] = simulated(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_bias_corrected(d, t.oracle, ModelSpec{}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveBiasCorrected)->Arg(2500)->Arg(10000)->Arg(40000)->Complexity()->Unit(benchmark::kMillisecond);

void BM_FitWModel(benchmark::State& state) {
  set_thread_budget(1);
  const auto& d = simulated(static_cast<std::size_t>(state.range(0))).first;
  const LearnerSpec spec{LearnerFamily::multinomial_logistic, 1, std::nullopt, std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(fit_w_model(d, spec));
}
BENCHMARK(BM_FitWModel)->Arg(2500)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Crossfit(benchmark::State& state) {
  set_thread_budget(static_cast<int>(state.range(1)));
  const auto& d = simulated(static_cast<std::size_t>(state.range(0))).first;
  for (auto _ : state) benchmark::DoNotOptimize(crossfit(d, ModelSpec{}, NuisanceLearners::parametric(1), 7));
}
BENCHMARK(BM_Crossfit)->Args({10000, 1})->Args({10000, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
