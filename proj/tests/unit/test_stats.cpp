#include "jsccf/model.hpp"
#include "jsccf/stats.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace jsccf;

namespace {

nn::ModelSpec full_size_spec() { return nn::ModelSpec{}; }

}  // namespace

TEST(Stats, HandTallyForTinyLayer) {
  // d = 4, one head, MLP 16: norms 16, attention 64, MLP 4*16+16+16*4+4 = 148.
  nn::ModelSpec spec;
  spec.layers = 1;
  spec.heads = 1;
  spec.width = 4;
  spec.mlp_hidden = 16;
  EXPECT_EQ(transformer_layer_params(spec), 16u + 64u + 148u);
  EXPECT_EQ(position_embedding_params(spec, 4), 16u);
  spec.pos_embed = nn::PosEmbedKind::Conditional;
  EXPECT_EQ(position_embedding_params(spec, 4), 9u * 16u + 4u);
  // l = 4: projections 4*4*16, products 2*16*4, MLP 2*4*4*16.
  EXPECT_EQ(transformer_layer_macs(spec, 4), 256u + 128u + 512u);
}

TEST(Stats, MatchesInstantiatedModels) {
  for (auto mode : {FeedbackMode::Full, FeedbackMode::Lite, FeedbackMode::ScalarSnr, FeedbackMode::None}) {
    for (bool siamese : {true, false}) {
      for (auto pe : {nn::PosEmbedKind::Dense, nn::PosEmbedKind::Conditional}) {
        ModelConfig mc = jsccf::testing::smoke_config(mode, 3, 0.5);
        mc.spec.siamese = siamese;
        mc.spec.pos_embed = pe;
        const JsccfModel model(mc);
        const ModelStats s = model_stats(mc.spec, mc.geometry, mode);
        EXPECT_EQ(s.params(), model.params().scalar_count()) << to_string(mode) << " " << siamese;
        std::uint64_t enc = 0;
        for (const auto& [name, p] : model.params().entries()) {
          if (name.rfind("enc.", 0) == 0) enc += static_cast<std::uint64_t>(p.value().size());
        }
        EXPECT_EQ(s.encoder_params, enc);
      }
    }
  }
}

TEST(Stats, GrowthWithBlockCount) {
  const auto base = model_stats(full_size_spec(), SessionGeometry::from_ratio(32, 32, 8, 1, 0.5), FeedbackMode::Lite);
  std::uint64_t prev_full = 0;
  for (int m : {1, 2, 3, 4, 6, 8, 12}) {
    const auto g = SessionGeometry::from_ratio(32, 32, 8, m, 0.5);
    const auto lite = model_stats(full_size_spec(), g, FeedbackMode::Lite);
    // The (m-1) 2k/l feedback rows of W_0 are offset exactly by the narrower
    // channel head, since k = Rn/m.
    EXPECT_EQ(lite.params(), base.params());
    EXPECT_EQ(lite.decoder_params, base.decoder_params);
    const auto full = model_stats(full_size_spec(), g, FeedbackMode::Full);
    EXPECT_GT(full.params(), prev_full);
    prev_full = full.params();
    EXPECT_EQ(full.session_macs, m * full.encoder_macs + m * full.decoder_macs);
    EXPECT_EQ(lite.session_macs, m * lite.encoder_macs + lite.decoder_macs);
  }
}

TEST(Stats, FullSizeConfiguration) {
  const auto s = model_stats(full_size_spec(), SessionGeometry::from_ratio(32, 32, 8, 1, 0.5), FeedbackMode::Lite);
  EXPECT_NEAR(static_cast<double>(s.params()) / 1e6, 12.93, 0.02 * 12.93);
  // One block is one encoder and one decoder pass, on the order of 0.8 G MACs.
  EXPECT_NEAR(static_cast<double>(s.session_macs) / 1e9, 0.83, 0.25 * 0.83);
}
