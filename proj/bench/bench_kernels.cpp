#include <benchmark/benchmark.h>

#include "driftbench/forest.hpp"
#include "driftbench/knn.hpp"
#include "driftbench/neural.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/svm.hpp"
#include "driftbench/synth.hpp"

using namespace driftbench;

namespace {

Dataset sample(std::size_t n, std::size_t classes, std::size_t dim, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.num_classes = classes;
  cfg.num_features = dim;
  cfg.samples_per_batch = n;
  cfg.num_batches = 1;
  return generate_drift_stream(cfg, seed);
}

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(num_threads()));
}

void BM_KnnPredictAll(benchmark::State& state) {
  const KnnModel model(sample(2000, 6, 128, 1), 5);
  const auto queries = sample(500, 6, 128, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_proba_all(queries, mode(state)));
  label(state);
}

void BM_ForestFit(benchmark::State& state) {
  const auto train = sample(1000, 6, 32, 3);
  ForestOptions opts;
  opts.num_trees = 50;
  for (auto _ : state) benchmark::DoNotOptimize(ForestModel::fit(train, opts, 7, mode(state)));
  label(state);
}

void BM_GramMatrix(benchmark::State& state) {
  const auto d = sample(1000, 6, 128, 4);
  const Kernel k{Kernel::Type::rbf, default_rbf_gamma(d)};
  for (auto _ : state) benchmark::DoNotOptimize(GramMatrix::compute(d, k, mode(state)));
  label(state);
}

void BM_EnsembleFit(benchmark::State& state) {
  const auto train = sample(500, 6, 128, 5);
  TrainConfig cfg;
  cfg.epochs = 5;
  for (auto _ : state) benchmark::DoNotOptimize(EnsembleModel::fit(train, 4, cfg, mode(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_KnnPredictAll)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
