#include <benchmark/benchmark.h>

#include "fairens/bounds.hpp"
#include "fairens/dataset.hpp"
#include "fairens/ensemble.hpp"
#include "fairens/pruning.hpp"

namespace {

using namespace fairens;

struct Fixture {
  Dataset data;
  EnsembleProfile profile;

  explicit Fixture(std::size_t members)
      : data(synth_biased(2000, 0.6, 8, 7)),
        profile(build_profile(train_ensemble(data, EnsembleConfig{"bagging", members, 5, 11}), data,
                              perturb_sensitive(data, 12))) {}
};

const Fixture& fixture(std::size_t members) {
  static const Fixture f64(64), f128(128);
  return members == 64 ? f64 : f128;
}

void BM_TandemMatrix(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tandem_matrix(f.profile));
}
BENCHMARK(BM_TandemMatrix)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EpafC(benchmark::State& state) {
  const auto& f = fixture(128);
  const PruningProblem problem(f.profile, f.data.labels());
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(epaf_c(problem, k, 0.5));
}
BENCHMARK(BM_EpafC)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

// One worker per group; compare against BM_EpafC at the same k for speedup.
void BM_EpafD(benchmark::State& state) {
  const auto& f = fixture(128);
  const PruningProblem problem(f.profile, f.data.labels());
  PruneConfig cfg;
  cfg.k = static_cast<std::size_t>(state.range(0));
  cfg.machines = static_cast<std::size_t>(state.range(1));
  cfg.threads = cfg.machines;
  cfg.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(epaf_d(problem, cfg));
}
BENCHMARK(BM_EpafD)->Args({8, 2})->Args({8, 4})->Args({32, 2})->Args({32, 4})->Unit(benchmark::kMicrosecond);

void BM_Poaf(benchmark::State& state) {
  const auto& f = fixture(64);
  const PruningProblem problem(f.profile, f.data.labels());
  PruneConfig cfg;
  cfg.k = static_cast<std::size_t>(state.range(0));
  cfg.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(poaf(problem, cfg));
}
BENCHMARK(BM_Poaf)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
