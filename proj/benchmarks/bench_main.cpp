#include "jsccf/channel.hpp"
#include "jsccf/nn.hpp"
#include "jsccf/protocol.hpp"

#include "test_support.hpp"

#include <benchmark/benchmark.h>

using namespace jsccf;

namespace {

// Multi-head attention forward pass over l tokens of width d, eight heads.
void BM_Attention(benchmark::State& state) {
  const auto l = static_cast<int>(state.range(0));
  nn::ModelSpec spec;
  spec.width = static_cast<int>(state.range(1));
  nn::ParamStore store;
  nn::Initializer init(1);
  const auto p = nn::AttentionParams::create(store, init, "att", spec);
  const nn::Var x = nn::Var::constant(testing::random_matrix(l, spec.width, 2));
  nn::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(nn::multi_head_self_attention(x, p).value().data());
}
BENCHMARK(BM_Attention)->Args({16, 64})->Args({64, 64})->Args({64, 256})->Unit(benchmark::kMicrosecond);

// Forward plus backward through one transformer layer.
void BM_LayerBackward(benchmark::State& state) {
  const auto l = static_cast<int>(state.range(0));
  nn::ModelSpec spec;
  spec.width = static_cast<int>(state.range(1));
  nn::ParamStore store;
  nn::Initializer init(3);
  const auto p = nn::TransformerLayerParams::create(store, init, "layer", spec);
  const nn::Var x = nn::Var::constant(testing::random_matrix(l, spec.width, 4));
  for (auto _ : state) {
    store.zero_grad();
    nn::sum_squares(nn::transformer_layer(x, p)).backward();
  }
}
BENCHMARK(BM_LayerBackward)->Args({16, 64})->Args({64, 256})->Unit(benchmark::kMillisecond);

// AWGN forward channel on k complex symbols.
void BM_ForwardChannel(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  ChannelConfig cfg;
  Rng rng(5);
  const SymbolBlock x = complex_gaussian(k, 1.0, rng);
  const FadingState fading = sample_fading(cfg, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward_channel(x, cfg, fading, rng).symbols.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}
BENCHMARK(BM_ForwardChannel)->Arg(256)->Arg(4096);

// One m-block session on 8x8 smoke models.
void BM_SmokeSession(benchmark::State& state) {
  const auto mode = static_cast<FeedbackMode>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const JsccfModel model(testing::smoke_config(mode, m, 0.5));
  const Image image = synthetic_dataset(1, 8, 6).front();
  SessionConfig cfg;
  std::uint64_t id = 0;
  for (auto _ : state) {
    cfg.image_id = id++;
    benchmark::DoNotOptimize(run_session(image, model, cfg).psnr);
  }
}
BENCHMARK(BM_SmokeSession)
    ->Args({static_cast<int>(FeedbackMode::Lite), 2})
    ->Args({static_cast<int>(FeedbackMode::Full), 2})
    ->Args({static_cast<int>(FeedbackMode::Lite), 4})
    ->Args({static_cast<int>(FeedbackMode::Full), 4})
    ->Unit(benchmark::kMillisecond);

// Full-size CIFAR model (d=256, eight layers, eight heads, p=8), R=1/6, m=2.
void BM_FullSizeSession(benchmark::State& state) {
  ModelConfig mc;
  mc.geometry = SessionGeometry::from_ratio(32, 32, 8, 2, 1.0 / 6.0);
  mc.mode = static_cast<FeedbackMode>(state.range(0));
  const JsccfModel model(mc);
  const Image image = synthetic_dataset(1, 32, 7).front();
  SessionConfig cfg;
  cfg.channel.snr_db = 7.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_session(image, model, cfg).psnr);
}
BENCHMARK(BM_FullSizeSession)
    ->Arg(static_cast<int>(FeedbackMode::Lite))
    ->Arg(static_cast<int>(FeedbackMode::Full))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
