#include "jsccf/decoder.hpp"

#include "jsccf/errors.hpp"

namespace jsccf {

ViTDecoder::ViTDecoder(nn::ParamStore& store, nn::Initializer& init, const std::string& name,
                       const nn::ModelSpec& spec, int input_width, int grid, int token_dim)
    : siamese_(spec.siamese), input_width_(input_width) {
  if (siamese_) {
    front_ = nn::SiameseParams::create(store, init, name + ".siamese", input_width, spec.width);
  } else {
    plain_front_ = store.add(name + ".front", init.weight(input_width, spec.width));
  }
  stack_ = nn::TransformerStack::create(store, init, name, spec, grid);
  output_head_ = store.add(name + ".wout", init.weight(spec.width, token_dim));
}

nn::Var ViTDecoder::decode_tokens(const nn::Var& combined) const {
  if (combined.cols() != input_width_) {
    throw DimensionError("decoder: input width " + std::to_string(combined.cols()) + ", expected " +
                         std::to_string(input_width_));
  }
  const nn::Var front = siamese_ ? nn::siamese_embed(combined, front_) : nn::linear_project(combined, plain_front_);
  return nn::clamp(nn::linear_project(stack_(front), output_head_), 0.0, 1.0);
}

nn::Var combine_received(const ReceivedBuffer& buffer) { return buffer.concatenated(); }

Image decode(const nn::Var& combined, const ViTDecoder& decoder, const SessionGeometry& geometry) {
  nn::NoGradGuard no_grad;
  return unpatchify_matrix(decoder.decode_tokens(combined).value(), PatchSpec{geometry.grid}, geometry.height,
                           geometry.width);
}

nn::Var transmitter_belief(const FeedbackBuffer& feedback, const ViTDecoder& decoder) {
  nn::NoGradGuard stop_gradient;
  return decoder.decode_tokens(combine_received(feedback));
}

}  // namespace jsccf
