#include "jsccf/stats.hpp"

namespace jsccf {

namespace {

using u64 = std::uint64_t;

}  // namespace

u64 transformer_layer_params(const nn::ModelSpec& spec) {
  const u64 d = static_cast<u64>(spec.width);
  const u64 h = static_cast<u64>(spec.mlp_width());
  const u64 norms = 2 * 2 * d;
  const u64 attention = 4 * d * d;
  const u64 mlp = d * h + h + h * d + d;
  return norms + attention + mlp;
}

u64 position_embedding_params(const nn::ModelSpec& spec, int length) {
  const u64 d = static_cast<u64>(spec.width);
  if (spec.pos_embed == nn::PosEmbedKind::Dense) return static_cast<u64>(length) * d;
  return 9 * d * d + d;
}

u64 transformer_layer_macs(const nn::ModelSpec& spec, int length) {
  const u64 d = static_cast<u64>(spec.width);
  const u64 h = static_cast<u64>(spec.mlp_width());
  const u64 l = static_cast<u64>(length);
  // Q, K, V and output projections, the two attention products, the MLP.
  return 4 * l * d * d + 2 * l * l * d + 2 * l * d * h;
}

ModelStats model_stats(const nn::ModelSpec& spec, const SessionGeometry& g, FeedbackMode mode) {
  spec.validate();
  g.validate();
  const u64 d = static_cast<u64>(spec.width);
  const u64 l = static_cast<u64>(g.length());
  const u64 layers = static_cast<u64>(spec.layers);
  const u64 enc_in = static_cast<u64>(g.encoder_input_width(mode));
  const u64 dec_in = static_cast<u64>(g.decoder_input_width());
  const u64 out = static_cast<u64>(g.block_width());
  const u64 c = static_cast<u64>(g.token_dim());
  const u64 stack_params = position_embedding_params(spec, g.length()) + layers * transformer_layer_params(spec);
  const u64 pos_macs = spec.pos_embed == nn::PosEmbedKind::Dense ? 0 : l * 9 * d * d;
  const u64 stack_macs = pos_macs + layers * transformer_layer_macs(spec, g.length());

  ModelStats s;
  s.encoder_params = enc_in * d + stack_params + d * out;
  s.encoder_macs = l * enc_in * d + stack_macs + l * d * out;

  u64 front_params = 0;
  u64 front_macs = 0;
  if (spec.siamese) {
    front_params = dec_in * d + d + d * d + d;
    front_macs = 2 * (l * dec_in * d + l * d * d);
  } else {
    front_params = dec_in * d;
    front_macs = l * dec_in * d;
  }
  s.decoder_params = front_params + stack_params + d * c;
  s.decoder_macs = front_macs + stack_macs + l * d * c;

  const u64 m = static_cast<u64>(g.blocks);
  const u64 decodes = mode == FeedbackMode::Full ? m : 1;
  s.session_macs = m * s.encoder_macs + decodes * s.decoder_macs;
  return s;
}

}  // namespace jsccf
