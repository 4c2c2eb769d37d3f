#include <benchmark/benchmark.h>

#include "feddaf/aggregation.hpp"
#include "feddaf/data_fabric.hpp"
#include "feddaf/federation.hpp"
#include "feddaf/gradient_field.hpp"

namespace {

using namespace feddaf;

const FederationConfig& bench_config() {
  static const FederationConfig c;
  return c;
}

const FdaTask& bench_task() {
  static const FdaTask task = build_fda_task(bench_config());
  return task;
}

void BM_LossAndGradient(benchmark::State& state) {
  const auto& task = bench_task();
  const auto p = initial_model(bench_config(), task);
  const auto idx = shuffled_indices(task.source_datasets[0].rows(), 1);
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(state.range(0)), idx.size());
  const auto batch = task.source_datasets[0].select(std::span(idx).first(n));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(task.spec, p, batch.view()));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_LossAndGradient)->Arg(16)->Arg(64)->Arg(256);

void BM_TrainLocalEpoch(benchmark::State& state) {
  const auto& task = bench_task();
  const auto p = initial_model(bench_config(), task);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_local(task.spec, p, task.source_datasets[0], 1, 0.01, 64, 3));
  }
}
BENCHMARK(BM_TrainLocalEpoch);

void BM_MeanGradientField(benchmark::State& state) {
  const auto& task = bench_task();
  const auto p = initial_model(bench_config(), task);
  for (auto _ : state) benchmark::DoNotOptimize(mean_gradient_field(task.spec, p, task.target_test, 16, 4));
}
BENCHMARK(BM_MeanGradientField);

void BM_TargetAggregate(benchmark::State& state) {
  const auto& task = bench_task();
  const auto s = initial_model(bench_config(), task);
  const auto t = train_local(task.spec, s, task.target_train, 1, 0.001, 16, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(target_aggregate(task.spec, s, t, task.target_train, 5.0, 16, 6));
  }
}
BENCHMARK(BM_TargetAggregate);

void BM_FedDafRun(benchmark::State& state) {
  auto c = bench_config();
  c.rounds = static_cast<std::size_t>(state.range(0));
  const auto& task = bench_task();
  const auto init = initial_model(c, task);
  for (auto _ : state) benchmark::DoNotOptimize(run_feddaf(c, task, init));
}
BENCHMARK(BM_FedDafRun)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
