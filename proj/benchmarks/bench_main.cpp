#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "groundbridge/bridge.hpp"
#include "groundbridge/encoder.hpp"
#include "groundbridge/eval.hpp"
#include "groundbridge/msloss.hpp"
#include "groundbridge/objindex.hpp"
#include "groundbridge/trainer.hpp"

using namespace groundbridge;

namespace {

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> unit(std::mt19937_64& rng, std::size_t n) {
  auto v = gaussian(rng, n);
  double s = 0.0;
  for (double x : v) s += x * x;
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

void BM_EncoderForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto params = init_params(1);
  const auto x = gaussian(rng, 42);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, x));
}
BENCHMARK(BM_EncoderForward);

// One training step's worth of work: 70 forwards, mining, loss and backward.
void BM_BatchLossAndGrads(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto params = init_params(2);
  std::vector<std::vector<double>> xs;
  std::vector<int> labels;
  for (int i = 0; i < 70; ++i) {
    xs.push_back(gaussian(rng, 42));
    labels.push_back(i / 10);
  }
  for (auto _ : state) benchmark::DoNotOptimize(batch_loss_and_grads(params, xs, labels, MsLossConfig{}));
}
BENCHMARK(BM_BatchLossAndGrads)->Unit(benchmark::kMillisecond);

void BM_KnnQuery(benchmark::State& state) {
  std::mt19937_64 rng(3);
  ObjectIndex idx;
  for (int i = 0; i < state.range(0); ++i) idx.add(unit(rng, kEmbeddingDim), all_labels()[i % kLabelCount]);
  const auto q = unit(rng, kEmbeddingDim);
  for (auto _ : state) benchmark::DoNotOptimize(knn_query(idx, q, 10));
}
BENCHMARK(BM_KnnQuery)->Arg(1100)->Arg(11000);

void BM_FitRidge(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<GroundingPair> pairs;
  for (int i = 0; i < state.range(0); ++i) {
    pairs.push_back(GroundingPair{gaussian(rng, static_cast<std::size_t>(state.range(1))), unit(rng, kEmbeddingDim),
                                  "w", "s" + std::to_string(i), ObjectLabel::cube});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_ridge(pairs, 1.0));
}
// curriculum-sized dual solves and a primal one
BENCHMARK(BM_FitRidge)->Args({10, 768})->Args({80, 768})->Args({400, 128})->Unit(benchmark::kMillisecond);

void BM_Pca2d(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back(gaussian(rng, kEmbeddingDim));
  for (auto _ : state) benchmark::DoNotOptimize(pca_2d(pts));
}
BENCHMARK(BM_Pca2d)->Arg(300)->Arg(1100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
