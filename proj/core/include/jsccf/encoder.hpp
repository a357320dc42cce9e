#pragma once

#include "jsccf/autograd.hpp"
#include "jsccf/geometry.hpp"
#include "jsccf/nn.hpp"

#include <string>
#include <vector>

namespace jsccf {

class ViTDecoder;

// m zero-padded slots of l x (2k/l) channel matrices. Slots are filled
// strictly in order; everything past filled() is exactly zero.
class BlockBuffer {
 public:
  BlockBuffer(int blocks, int rows, int cols);

  // Fills the next slot.
  void push(const nn::Var& block);
  // Fills slot `index` (1-based); it must be the next unfilled one.
  void receive(int index, const nn::Var& block);

  int filled() const { return filled_; }
  int capacity() const { return static_cast<int>(slots_.size()); }
  const nn::Var& slot(int i) const { return slots_.at(static_cast<std::size_t>(i)); }

  // Raw slot write that ignores the fill order; enforce_padding() restores
  // the zero-padding invariant.
  void overwrite(int i, const nn::Var& block);
  void enforce_padding();

  // l x (m * 2k/l), block order.
  nn::Var concatenated() const;

 private:
  void check_shape(const nn::Var& block) const;

  std::vector<nn::Var> slots_;
  int rows_;
  int cols_;
  int filled_ = 0;
};

using FeedbackBuffer = BlockBuffer;
using ReceivedBuffer = BlockBuffer;

// E_theta: W0 projection, positional embedding, transformer stack, then W_c
// to 2k/l real channel inputs per token.
class ViTEncoder {
 public:
  ViTEncoder() = default;
  ViTEncoder(nn::ParamStore& store, nn::Initializer& init, const std::string& name, const nn::ModelSpec& spec,
             int input_width, int grid, int output_width);

  // F_{L_t}, l x d.
  nn::Var features(const nn::Var& input) const;
  nn::Var project(const nn::Var& features) const { return nn::linear_project(features, channel_head_); }
  nn::Var encode(const nn::Var& input, double power) const;

  int input_width() const { return static_cast<int>(input_proj_.rows()); }

 private:
  nn::Var input_proj_;
  nn::TransformerStack stack_;
  nn::Var channel_head_;
};

// Per-image transmitter state across the m blocks.
class EncoderState {
 public:
  EncoderState(nn::Matrix source_tokens, const SessionGeometry& geometry, FeedbackMode mode, double snr_db = 0.0);

  int current_block() const { return current_block_; }
  FeedbackMode mode() const { return mode_; }
  const SessionGeometry& geometry() const { return geometry_; }
  const nn::Var& source() const { return source_; }
  const FeedbackBuffer& feedback() const { return feedback_; }
  FeedbackBuffer& feedback() { return feedback_; }
  // Z_1..Z_{m-1}; slots at or after current_block() are zero.
  const std::vector<nn::Var>& embedded() const { return embedded_; }
  double snr_db() const { return snr_db_; }

  // Raw write of Z slot `slot` (0-based) that ignores causality.
  void overwrite_embedded(int slot, const nn::Var& z);
  // Re-zeros every Z slot and feedback slot at or past the causal frontier.
  void enforce_padding();

 private:
  friend nn::Var embed_feedback(EncoderState&, const nn::Var&, const ViTDecoder*);

  nn::Var source_;
  SessionGeometry geometry_;
  FeedbackMode mode_;
  double snr_db_;
  FeedbackBuffer feedback_;
  std::vector<nn::Var> embedded_;
  int current_block_ = 1;
};

// Records feedback of the block just sent, computes its embedding Z_{i-1}
// and advances to block i. Full mode needs the transmitter-side decoder.
nn::Var embed_feedback(EncoderState& state, const nn::Var& feedback_block, const ViTDecoder* decoder);

// S_in = [S_s | Z_1 | ... | Z_{m-1}].
nn::Var build_input_sequence(const EncoderState& state);

// X_i for the current block, power-normalized, in real layout.
nn::Var encode_block(const EncoderState& state, const ViTEncoder& encoder, double power);

}  // namespace jsccf
