#include <benchmark/benchmark.h>

#include "xmodal/xmodal.hpp"

using namespace xmodal;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& x : m.values()) x = rng.uniform(-1, 1);
  return m;
}

Matrix random_scores(std::size_t n) { return random_matrix(n, n, 1); }

void BM_CosineForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmbeddingBatch v{random_matrix(n, 16, 1), Modality::visual};
  const EmbeddingBatch t{random_matrix(n, 16, 2), Modality::text};
  for (auto _ : state) benchmark::DoNotOptimize(cosine_forward(v, t));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_CosineForward)->RangeMultiplier(2)->Range(32, 512);

void BM_CosineBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto sim = cosine_forward({random_matrix(n, 16, 1), Modality::visual},
                                  {random_matrix(n, 16, 2), Modality::text});
  const Matrix g = random_scores(n);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_backward(sim, g));
}
BENCHMARK(BM_CosineBackward)->RangeMultiplier(2)->Range(32, 512);

void BM_Mine(benchmark::State& state) {
  const Matrix s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mine(s, 0.2));
}
BENCHMARK(BM_Mine)->RangeMultiplier(2)->Range(32, 512);

void BM_Loss(benchmark::State& state, LossKind kind) {
  const Matrix s = random_scores(static_cast<std::size_t>(state.range(0)));
  LossSpec spec;
  spec.kind = kind;
  for (auto _ : state) benchmark::DoNotOptimize(compute_loss(s, spec));
}
BENCHMARK_CAPTURE(BM_Loss, triplet, LossKind::triplet)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK_CAPTURE(BM_Loss, avg_poly, LossKind::avg_poly)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK_CAPTURE(BM_Loss, max_poly, LossKind::max_poly)->RangeMultiplier(2)->Range(32, 512);

void BM_RecallAtK(benchmark::State& state) {
  const Matrix s = random_scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(recall_at_k(s, kDefaultKs));
}
BENCHMARK(BM_RecallAtK)->Arg(205)->Arg(1000);

void BM_TrainStep(benchmark::State& state) {
  Rng rng(3);
  const EncoderParams params = init_encoder({64, 48, 16, 0}, rng);
  const Matrix v = random_matrix(128, 64, 4), t = random_matrix(128, 48, 5);
  const LossSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(forward_backward(params, v, t, spec));
}
BENCHMARK(BM_TrainStep);

void BM_TrainEpoch(benchmark::State& state) {
  const FeaturePairSet data = generate_synthetic(SyntheticSpec{});
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(data, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
