// Serial reference vs OpenMP path for the hot kernels.

#include <benchmark/benchmark.h>

#include "aggcorr/estimators.hpp"
#include "aggcorr/harness.hpp"
#include "aggcorr/kernels.hpp"

using namespace aggcorr;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void set_label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_DrawSliceInnovations(benchmark::State& state) {
  const Eigen::Index T = 1000, N = state.range(1);
  Eigen::MatrixXd signal(T, N), local(T, N);
  Eigen::VectorXd global(T);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    kernels::draw_slice_innovations(seed++, signal, local, global, mode(state));
    benchmark::DoNotOptimize(signal.data());
  }
  state.SetItemsProcessed(state.iterations() * T * (2 * N + 1));
  set_label(state);
}
BENCHMARK(BM_DrawSliceInnovations)->ArgsProduct({{0, 1}, {400, 2200}})->Unit(benchmark::kMillisecond);

void BM_StandardizedSum(benchmark::State& state) {
  const Eigen::Index T = 1000, N = state.range(1);
  const Eigen::MatrixXd series = Eigen::MatrixXd::Random(T, N);
  for (auto _ : state) {
    auto s = kernels::standardized_sum(series, 0, static_cast<std::size_t>(N), mode(state));
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * T * N);
  set_label(state);
}
BENCHMARK(BM_StandardizedSum)->ArgsProduct({{0, 1}, {400, 1600}})->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
  const auto cfg = default_experiment();
  ModelParams p = cfg.base;
  p.intra = CorrelationFunction::intra(100.0, 0.6);
  const Dataset data = simulate(p, 1000, 7);
  const auto m = static_cast<Method>(state.range(1));
  const auto ecfg = method_config(cfg, m, 11);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(data, ecfg, mode(state)).value);
  state.SetLabel(std::string(state.range(0) ? "parallel " : "serial ") + std::string(method_name(m)));
}
BENCHMARK(BM_Estimate)
    ->ArgsProduct({{0, 1}, {static_cast<long>(Method::AC), static_cast<long>(Method::LR), static_cast<long>(Method::LRD)}})
    ->Unit(benchmark::kMillisecond);

void BM_Experiment(benchmark::State& state) {
  ExperimentConfig cfg = default_experiment();
  cfg.base.regions = line_layout({{10, 10}, {14, 14}, {5, 5}, {5, 5}}, {1.0, 2.0, 1.0, 1.0}, 2);
  cfg.intra_models = {cfg.intra_models.back()};
  cfg.reps = 4;
  cfg.T = 300;
  cfg.boxplots = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, mode(state)).size());
  set_label(state);
}
BENCHMARK(BM_Experiment)->ArgsProduct({{0, 1}, {0}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
