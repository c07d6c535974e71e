#include <benchmark/benchmark.h>

#include <vector>

#include "gpucb/algorithms.hpp"
#include "gpucb/gp.hpp"
#include "gpucb/harness.hpp"
#include "gpucb/rkhs.hpp"
#include "gpucb/theory_checks.hpp"

namespace {

using namespace gpucb;

std::vector<Point> ucb_sequence(std::size_t horizon) {
  ExperimentConfig config;
  config.horizon = horizon;
  const auto grid = make_grid(config.grid_resolution, config.dim);
  const auto trace = run_single(config, PolicyConfig{}, 0);
  std::vector<Point> seq;
  for (const auto& s : trace.steps) seq.push_back(grid[s.chosen_index]);
  return seq;
}

void BM_HistoryExtend(benchmark::State& state) {
  const auto grid = make_grid(static_cast<std::size_t>(state.range(0)), 2);
  const auto spec = KernelSpec::matern(2.5, 0.25);
  for (auto _ : state) {
    History h(spec, 2, grid);
    for (std::size_t i = 0; i < 100; ++i) {
      h.extend(grid[(i * 97) % grid.size()], static_cast<double>(i));
    }
    benchmark::DoNotOptimize(h.effective_size());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_HistoryExtend)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_UcbSelect(benchmark::State& state) {
  const auto grid = make_grid(50, 2);
  History h(KernelSpec::squared_exponential(0.25), 2, grid);
  for (std::size_t i = 0; i < 60; ++i) h.extend(grid[(i * 131) % grid.size()], 0.01 * static_cast<double>(i));
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_ucb(h.candidate_posterior(), 2.0));
  }
}
BENCHMARK(BM_UcbSelect)->Unit(benchmark::kMicrosecond);

void BM_RunSingle(benchmark::State& state) {
  ExperimentConfig config;
  config.horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_single(config, PolicyConfig{}, 0).steps.back().cum_regret);
  }
}
BENCHMARK(BM_RunSingle)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_LambdaCertificate(benchmark::State& state) {
  const auto seq = ucb_sequence(200);
  const SequenceAnalysis analysis(KernelSpec::squared_exponential(0.25), seq);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analysis.certify(200).lambda_star);
  }
}
BENCHMARK(BM_LambdaCertificate)->Unit(benchmark::kMillisecond);

void BM_CumulativeCertificate(benchmark::State& state) {
  const auto seq = ucb_sequence(static_cast<std::size_t>(state.range(0)));
  const SequenceAnalysis analysis(KernelSpec::squared_exponential(0.25), seq);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analysis.cumulative(seq.size()).rhs);
  }
}
BENCHMARK(BM_CumulativeCertificate)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
