#include <benchmark/benchmark.h>

#include "reln/dataset.hpp"
#include "reln/relu.hpp"

using namespace reln;

static void BM_ReluEpochs(benchmark::State& state) {
  const Dataset d = build_contextual_hierarchy(8, 3, 1);
  ReluConfig cfg;
  cfg.hidden_widths = {static_cast<int>(state.range(0))};
  cfg.epochs = 100;
  cfg.init_scale = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(train_relu(d, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.epochs);
}
BENCHMARK(BM_ReluEpochs)->Arg(128)->Arg(700)->Unit(benchmark::kMillisecond);

static void BM_ActivationPattern(benchmark::State& state) {
  const Dataset d = build_contextual_hierarchy(8, 3, 1);
  const MlpState s = init_mlp(d.input_dim(), {700}, d.output_dim(), 1e-2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(activation_pattern(s, d.inputs));
}
BENCHMARK(BM_ActivationPattern);
