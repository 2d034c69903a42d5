#include <benchmark/benchmark.h>

#include "reln/dataset.hpp"
#include "reln/gdln.hpp"

using namespace reln;

static void BM_PathwayStats(benchmark::State& state) {
  const Dataset d = build_contextual_hierarchy(8, static_cast<int>(state.range(0)), 1);
  const RelnNetwork net = build_reln_graph(
      d, {RelnKind::kContextual, static_cast<int>(state.range(0)), 2, true}, 100);
  for (auto _ : state) benchmark::DoNotOptimize(pathway_stats(net.graph, net.gates, d));
}
BENCHMARK(BM_PathwayStats)->Arg(3)->Arg(5);

static void BM_GradientFromStats(benchmark::State& state) {
  const Dataset d = build_contextual_hierarchy(8, 3, 1);
  RelnNetwork net = build_reln_graph(d, {RelnKind::kContextual, 3, 2, true}, 100);
  init_weights(net.graph, 1e-3, 0);
  const PathwayStats st = pathway_stats(net.graph, net.gates, d);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(net.graph, st));
}
BENCHMARK(BM_GradientFromStats);

static void BM_TrainEpochs(benchmark::State& state) {
  const Dataset d = build_contextual_hierarchy(8, 3, 1);
  RelnNetwork net = build_reln_graph(d, {RelnKind::kContextual, 3, 2, true}, 100);
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.record_every = 100;
  for (auto _ : state) {
    init_weights(net.graph, 1e-3, 0);
    benchmark::DoNotOptimize(train(net.graph, net.gates, d, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);
