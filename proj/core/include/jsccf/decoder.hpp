#pragma once

#include "jsccf/encoder.hpp"
#include "jsccf/imaging.hpp"
#include "jsccf/nn.hpp"

#include <string>

namespace jsccf {

// D_phi: Siamese front end (or a plain projection), positional embedding,
// transformer stack, W_out back to l x c tokens, clamped to [0,1].
class ViTDecoder {
 public:
  ViTDecoder() = default;
  ViTDecoder(nn::ParamStore& store, nn::Initializer& init, const std::string& name, const nn::ModelSpec& spec,
             int input_width, int grid, int token_dim);

  nn::Var decode_tokens(const nn::Var& combined) const;
  int input_width() const { return input_width_; }

 private:
  bool siamese_ = true;
  nn::SiameseParams front_;
  nn::Var plain_front_;
  nn::TransformerStack stack_;
  nn::Var output_head_;
  int input_width_ = 0;
};

// [Y_1 | ... | Y_m], zero for blocks not yet received.
nn::Var combine_received(const ReceivedBuffer& buffer);

Image decode(const nn::Var& combined, const ViTDecoder& decoder, const SessionGeometry& geometry);

// S_hat_si from the transmitter's feedback buffer, gradient-stopped.
nn::Var transmitter_belief(const FeedbackBuffer& feedback, const ViTDecoder& decoder);

}  // namespace jsccf
