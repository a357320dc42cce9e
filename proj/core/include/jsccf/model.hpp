#pragma once

#include "jsccf/decoder.hpp"
#include "jsccf/encoder.hpp"
#include "jsccf/geometry.hpp"
#include "jsccf/nn.hpp"

#include <cstdint>

namespace jsccf {

struct ModelConfig {
  nn::ModelSpec spec;
  SessionGeometry geometry;
  FeedbackMode mode = FeedbackMode::Lite;
  std::uint64_t init_seed = 0;
};

// Point-to-point encoder/decoder pair with its parameters. The transmitter's
// copy of the decoder is the same object (used gradient-stopped).
class JsccfModel {
 public:
  explicit JsccfModel(const ModelConfig& config);

  JsccfModel(const JsccfModel&) = delete;
  JsccfModel& operator=(const JsccfModel&) = delete;
  JsccfModel(JsccfModel&&) = default;
  JsccfModel& operator=(JsccfModel&&) = default;

  const ModelConfig& config() const { return config_; }
  const nn::ModelSpec& spec() const { return config_.spec; }
  const SessionGeometry& geometry() const { return config_.geometry; }
  FeedbackMode mode() const { return config_.mode; }

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const ViTEncoder& encoder() const { return encoder_; }
  const ViTDecoder& decoder() const { return decoder_; }

 private:
  ModelConfig config_;
  nn::ParamStore params_;
  ViTEncoder encoder_;
  ViTDecoder decoder_;
};

// Two message encoders (one per receiver's image and feedback), a combiner
// encoder that merges their features into the shared X_i, and one decoder
// per receiver.
class BroadcastModel {
 public:
  explicit BroadcastModel(const ModelConfig& config);

  BroadcastModel(const BroadcastModel&) = delete;
  BroadcastModel& operator=(const BroadcastModel&) = delete;
  BroadcastModel(BroadcastModel&&) = default;
  BroadcastModel& operator=(BroadcastModel&&) = default;

  const ModelConfig& config() const { return config_; }
  const SessionGeometry& geometry() const { return config_.geometry; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  const ViTEncoder& message_encoder(int receiver) const { return message_.at(static_cast<std::size_t>(receiver)); }
  const ViTDecoder& decoder(int receiver) const { return decoders_.at(static_cast<std::size_t>(receiver)); }

  // [F^1 | F^2] -> merge -> combiner stack -> W_c -> power normalization.
  nn::Var combine(const nn::Var& features1, const nn::Var& features2, double power) const;

 private:
  ModelConfig config_;
  nn::ParamStore params_;
  std::vector<ViTEncoder> message_;
  nn::Var merge_;
  nn::TransformerStack combiner_;
  nn::Var channel_head_;
  std::vector<ViTDecoder> decoders_;
};

}  // namespace jsccf
