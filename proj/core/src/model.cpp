#include "jsccf/model.hpp"

namespace jsccf {

JsccfModel::JsccfModel(const ModelConfig& config) : config_(config) {
  config_.spec.validate();
  config_.geometry.validate();
  const auto& g = config_.geometry;
  nn::Initializer init(config_.init_seed, config_.spec.init_std);
  encoder_ = ViTEncoder(params_, init, "enc", config_.spec, g.encoder_input_width(config_.mode), g.grid,
                        g.block_width());
  decoder_ = ViTDecoder(params_, init, "dec", config_.spec, g.decoder_input_width(), g.grid, g.token_dim());
}

BroadcastModel::BroadcastModel(const ModelConfig& config) : config_(config) {
  config_.spec.validate();
  config_.geometry.validate();
  config_.mode = FeedbackMode::Lite;
  const auto& g = config_.geometry;
  const int d = config_.spec.width;
  nn::Initializer init(config_.init_seed, config_.spec.init_std);
  for (int j = 0; j < 2; ++j) {
    message_.emplace_back(params_, init, "msg" + std::to_string(j + 1), config_.spec,
                          g.encoder_input_width(FeedbackMode::Lite), g.grid, 0);
  }
  merge_ = params_.add("comb.merge", init.weight(2 * d, d));
  combiner_ = nn::TransformerStack::create(params_, init, "comb", config_.spec, g.grid);
  channel_head_ = params_.add("comb.wc", init.weight(d, g.block_width()));
  for (int j = 0; j < 2; ++j) {
    decoders_.emplace_back(params_, init, "dec" + std::to_string(j + 1), config_.spec, g.decoder_input_width(),
                           g.grid, g.token_dim());
  }
}

nn::Var BroadcastModel::combine(const nn::Var& features1, const nn::Var& features2, double power) const {
  const std::vector<nn::Var> both{features1, features2};
  const nn::Var merged = nn::linear_project(nn::concat_cols(both), merge_);
  return nn::power_normalize(nn::linear_project(combiner_(merged), channel_head_), power);
}

}  // namespace jsccf
