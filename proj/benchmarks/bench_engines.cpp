#include <benchmark/benchmark.h>

#include <array>

#include "gexp/gheat_pde.hpp"
#include "gexp/girsanov.hpp"
#include "gexp/phi_lang.hpp"
#include "gexp/scenario_tree.hpp"

namespace {

gexp::TreeSpec tree(int steps, int levels) {
  gexp::TreeSpec s;
  s.steps = steps;
  s.band = gexp::VolatilityBand(0.25, 1.0);
  s.sigma_levels = levels;
  return s;
}

void BM_TreeUpper(benchmark::State& state) {
  const gexp::TreeSpec spec = tree(static_cast<int>(state.range(0)), 2);
  const gexp::PathFunctional f = gexp::observe(*gexp::catalog("cos1"), {1.0});
  for (auto _ : state) benchmark::DoNotOptimize(gexp::upper_expectation(spec, f));
  state.counters["leaves"] = spec.leaf_count();
}
BENCHMARK(BM_TreeUpper)->DenseRange(6, 12, 2)->Unit(benchmark::kMillisecond);

void BM_PdeSingle(benchmark::State& state) {
  const gexp::Generator gen(gexp::VolatilityBand(0.25, 1.0));
  const gexp::Functional sq = *gexp::catalog("sq");
  const auto accuracy = static_cast<gexp::Accuracy>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gexp::expect_single(gen, sq, 1.0, accuracy));
  state.SetLabel(std::string(gexp::to_string(accuracy)));
}
BENCHMARK(BM_PdeSingle)
    ->Arg(static_cast<int>(gexp::Accuracy::Coarse))
    ->Arg(static_cast<int>(gexp::Accuracy::Medium))
    ->Arg(static_cast<int>(gexp::Accuracy::Fine))
    ->Unit(benchmark::kMillisecond);

void BM_PdeCylinder(benchmark::State& state) {
  const gexp::Generator gen(gexp::VolatilityBand(0.25, 1.0));
  const gexp::Functional f = gexp::parse("min(x1, x2)", 2, 10.0);
  const std::array<double, 2> times{0.5, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gexp::expect_cylinder(gen, f, times, gexp::Accuracy::Coarse));
  }
}
BENCHMARK(BM_PdeCylinder)->Unit(benchmark::kMillisecond);

void BM_GirsanovIdentity(benchmark::State& state) {
  const gexp::Generator gen(gexp::VolatilityBand(0.25, 1.0));
  const gexp::Functional cos1 = *gexp::catalog("cos1");
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gexp::verify_identity(gen, gexp::IntegrandSpec::constant(0.5), cos1, {1.0}, {m}));
  }
}
BENCHMARK(BM_GirsanovIdentity)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
