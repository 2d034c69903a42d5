#include <random>

#include <benchmark/benchmark.h>

#include "reln/gate_finder.hpp"
#include "reln/linalg.hpp"

using namespace reln;

static void BM_ThinSvd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix m = Matrix::Random(n + 10, n);
  for (auto _ : state) benchmark::DoNotOptimize(thin_svd(m));
}
BENCHMARK(BM_ThinSvd)->Arg(11)->Arg(24)->Arg(64);

static void BM_KMeans(benchmark::State& state) {
  std::mt19937 rng(0);
  std::bernoulli_distribution coin(0.5);
  SampleStack s;
  s.rows.resize(4000, 24);
  for (Eigen::Index r = 0; r < s.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.rows.cols(); ++c) s.rows(r, c) = coin(rng);
    s.provenance.emplace_back(0, static_cast<int>(r));
  }
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(s, static_cast<int>(state.range(0)), 1));
}
BENCHMARK(BM_KMeans)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
