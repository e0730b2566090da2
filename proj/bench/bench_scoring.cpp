#include <cmath>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "corona/evolve/gp.hpp"
#include "corona/random.hpp"

using namespace corona;

namespace {

Dataset eq8_grid() {
  std::vector<double> E, n, d, y;
  for (int e = 12; e <= 30; e += 2) {
    for (double nn : {4.0, 6.0, 8.0}) {
      for (double dd : {2.0, 2.4, 3.0}) {
        E.push_back(e);
        n.push_back(nn);
        d.push_back(dd);
        y.push_back(1.022 * nn + 10.4 * dd + 30.839 - 933.633 / e);
      }
    }
  }
  return Dataset({"E", "n", "d"}, {E, n, d}, "L", y);
}

struct Fixture {
  Dataset data = eq8_grid();
  fit::Objective objective{data,
                           {fit::default_monotonicity_spec(data, "E", +1), fit::default_monotonicity_spec(data, "d", +1)},
                           0.01};
  std::vector<evolve::Individual> population;

  explicit Fixture(std::size_t size) {
    evolve::GPConfig config;
    config.population_size = size;
    config.max_terms = 4;
    auto rng = derive_stream(42, 0, 0);
    population = evolve::init_population(config, data.variable_names(), rng);
  }
};

void BM_ScoreSerial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto pop = f.population;
    evolve::score_serial(f.objective, pop);
    benchmark::DoNotOptimize(pop.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreParallel(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto pop = f.population;
    evolve::score_parallel(f.objective, pop, 0);
    benchmark::DoNotOptimize(pop.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
