// Microbenchmarks for the pieces that dominate a training step. Run with
// --benchmark_filter=<regex> to narrow.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "relpatch/grid.hpp"
#include "relpatch/heads.hpp"
#include "relpatch/model.hpp"
#include "relpatch/rng.hpp"
#include "relpatch/targets.hpp"
#include "relpatch/tensor.hpp"

namespace {

using namespace relpatch;

TensorF random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(static_cast<size_t>(rows) * cols);
  for (auto& x : v) x = d(rng);
  return TensorF::from_values({rows, cols}, std::move(v));
}

void bm_matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto rng = make_rng(1);
  NoGradGuard ng;
  TensorF a = random_matrix(n, n, rng);
  TensorF b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 2ll * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

void bm_encoder_forward(benchmark::State& state) {
  ModelConfig cfg = preset_config(state.range(0) == 0 ? "tiny" : "vit-s-4");
  auto rng = make_rng(2);
  EncoderF enc(cfg);
  enc.init_weights(rng);
  const PatchGrid g = cfg.grid();
  NoGradGuard ng;
  TensorF rows = random_matrix(g.n_tokens(), g.patch_dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(enc.forward(rows).patch_tokens);
}
BENCHMARK(bm_encoder_forward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void bm_encoder_step(benchmark::State& state) {
  // Forward plus backward through the joint SSL objective, as in training.
  ModelConfig cfg = preset_config("tiny");
  auto rng = make_rng(3);
  EncoderF enc(cfg);
  enc.init_weights(rng);
  const PatchGrid g = cfg.grid();
  SslHeads<float> heads(cfg.dim, g.n_tokens());
  heads.init_weights(rng);
  TensorF rows = random_matrix(g.n_tokens(), g.patch_dim(), rng);
  std::vector<GridPos> pos;
  for (int i = 0; i < g.n_tokens(); ++i) pos.push_back(position_of(i, g));
  TargetSet targets = build_target_set(g, pos);
  TaskSet tasks = TaskSet::parse("sp_rel,abs_pos,dist,angle");
  auto params = enc.parameters();
  for (auto _ : state) {
    for (auto& p : params) p.tensor.zero_grad();
    auto out = enc.forward(rows);
    auto loss = total_loss(out.patch_tokens, out.class_logits, targets, heads, tasks);
    loss.total.backward();
    benchmark::DoNotOptimize(loss.total.item());
  }
}
BENCHMARK(bm_encoder_step)->Unit(benchmark::kMillisecond);

void bm_pairwise_scores(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = 96;
  auto rng = make_rng(4);
  NoGradGuard ng;
  PairwiseHead<float> head(9, d);
  std::normal_distribution<float> dist(0.0f, 0.02f);
  for (auto& w : head.w)
    for (auto& v : w.values()) v = dist(rng);
  TensorF z = random_matrix(n, d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_scores(z, head));
}
BENCHMARK(bm_pairwise_scores)->Arg(16)->Arg(64);

void bm_build_targets(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  PatchGrid g(side * 4, side * 4, 3, 4);
  std::vector<GridPos> pos;
  for (int i = 0; i < g.n_tokens(); ++i) pos.push_back(position_of(i, g));
  for (auto _ : state) benchmark::DoNotOptimize(build_target_set(g, pos));
}
BENCHMARK(bm_build_targets)->Arg(4)->Arg(8)->Arg(14);

void bm_layout_sampling(benchmark::State& state) {
  PatchGrid g(32, 32, 3, 4);
  auto rng = make_rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_megapatch_layout(g, 4, rng));
}
BENCHMARK(bm_layout_sampling);

void bm_megapatch_extract(benchmark::State& state) {
  PatchGrid g(32, 32, 3, 4);
  auto rng = make_rng(6);
  NoGradGuard ng;
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> v(static_cast<size_t>(3 * 32 * 32));
  for (auto& x : v) x = u(rng);
  TensorF img = TensorF::from_values({3, 32, 32}, std::move(v));
  auto layout = sample_megapatch_layout(g, 4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(extract_megapatches(img, layout, g));
}
BENCHMARK(bm_megapatch_extract);

}  // namespace

BENCHMARK_MAIN();
