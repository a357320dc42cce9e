#include "jsccf/encoder.hpp"

#include "jsccf/decoder.hpp"
#include "jsccf/errors.hpp"

namespace jsccf {

BlockBuffer::BlockBuffer(int blocks, int rows, int cols) : rows_(rows), cols_(cols) {
  if (blocks < 1 || rows < 1 || cols < 0) throw DimensionError("BlockBuffer: bad dimensions");
  slots_.reserve(static_cast<std::size_t>(blocks));
  for (int i = 0; i < blocks; ++i) slots_.push_back(nn::Var::constant(nn::Matrix::Zero(rows, cols)));
}

void BlockBuffer::check_shape(const nn::Var& block) const {
  if (block.rows() != rows_ || block.cols() != cols_) {
    throw DimensionError("BlockBuffer: block is " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) +
                         ", expected " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

void BlockBuffer::push(const nn::Var& block) { receive(filled_ + 1, block); }

void BlockBuffer::receive(int index, const nn::Var& block) {
  if (filled_ >= capacity()) throw SequenceError("BlockBuffer: all " + std::to_string(capacity()) + " slots filled");
  if (index != filled_ + 1) {
    throw SequenceError("BlockBuffer: expected block " + std::to_string(filled_ + 1) + ", got " +
                        std::to_string(index));
  }
  check_shape(block);
  slots_[static_cast<std::size_t>(filled_)] = block;
  ++filled_;
}

void BlockBuffer::overwrite(int i, const nn::Var& block) {
  check_shape(block);
  slots_.at(static_cast<std::size_t>(i)) = block;
}

void BlockBuffer::enforce_padding() {
  for (int i = filled_; i < capacity(); ++i) {
    slots_[static_cast<std::size_t>(i)] = nn::Var::constant(nn::Matrix::Zero(rows_, cols_));
  }
}

nn::Var BlockBuffer::concatenated() const {
  if (slots_.size() == 1) return slots_.front();
  return nn::concat_cols(slots_);
}

ViTEncoder::ViTEncoder(nn::ParamStore& store, nn::Initializer& init, const std::string& name,
                       const nn::ModelSpec& spec, int input_width, int grid, int output_width) {
  input_proj_ = store.add(name + ".w0", init.weight(input_width, spec.width));
  stack_ = nn::TransformerStack::create(store, init, name, spec, grid);
  if (output_width > 0) channel_head_ = store.add(name + ".wc", init.weight(spec.width, output_width));
}

nn::Var ViTEncoder::features(const nn::Var& input) const {
  if (input.cols() != input_proj_.rows()) {
    throw DimensionError("encoder: input width " + std::to_string(input.cols()) + ", expected " +
                         std::to_string(input_proj_.rows()));
  }
  return stack_(nn::linear_project(input, input_proj_));
}

nn::Var ViTEncoder::encode(const nn::Var& input, double power) const {
  return nn::power_normalize(project(features(input)), power);
}

EncoderState::EncoderState(nn::Matrix source_tokens, const SessionGeometry& geometry, FeedbackMode mode,
                           double snr_db)
    : source_(nn::Var::constant(std::move(source_tokens))),
      geometry_(geometry),
      mode_(mode),
      snr_db_(snr_db),
      feedback_(geometry.blocks, geometry.length(), geometry.block_width()) {
  if (source_.rows() != geometry.length() || source_.cols() != geometry.token_dim()) {
    throw DimensionError("EncoderState: source tokens do not match the session geometry");
  }
  const int z = geometry.feedback_width(mode);
  for (int t = 0; t + 1 < geometry.blocks; ++t) {
    embedded_.push_back(nn::Var::constant(nn::Matrix::Zero(geometry.length(), z)));
  }
}

void EncoderState::overwrite_embedded(int slot, const nn::Var& z) {
  auto& target = embedded_.at(static_cast<std::size_t>(slot));
  if (z.rows() != target.rows() || z.cols() != target.cols()) throw DimensionError("overwrite_embedded: shape mismatch");
  target = z;
}

void EncoderState::enforce_padding() {
  for (std::size_t t = static_cast<std::size_t>(current_block_ - 1); t < embedded_.size(); ++t) {
    embedded_[t] = nn::Var::constant(nn::Matrix::Zero(embedded_[t].rows(), embedded_[t].cols()));
  }
  feedback_.enforce_padding();
}

nn::Var embed_feedback(EncoderState& state, const nn::Var& feedback_block, const ViTDecoder* decoder) {
  const int next = state.current_block_ + 1;
  if (next > state.geometry_.blocks) {
    throw SequenceError("embed_feedback: no block after " + std::to_string(state.current_block_));
  }
  if (state.mode_ == FeedbackMode::Full && decoder == nullptr) {
    throw ModeError("embed_feedback: full feedback mode needs the transmitter-side decoder");
  }
  state.feedback_.receive(state.current_block_, feedback_block);

  const auto l = static_cast<nn::Index>(state.geometry_.length());
  nn::Var z;
  switch (state.mode_) {
    case FeedbackMode::Lite: z = feedback_block; break;
    case FeedbackMode::Full: {
      std::vector<nn::Var> parts{transmitter_belief(state.feedback_, *decoder), feedback_block};
      z = nn::concat_cols(parts);
      break;
    }
    case FeedbackMode::ScalarSnr: z = nn::Var::constant(nn::Matrix::Constant(l, 1, state.snr_db_)); break;
    case FeedbackMode::None: z = nn::Var::constant(nn::Matrix::Zero(l, 0)); break;
  }
  state.embedded_[static_cast<std::size_t>(state.current_block_ - 1)] = z;
  state.current_block_ = next;
  return z;
}

nn::Var build_input_sequence(const EncoderState& state) {
  if (state.embedded().empty()) return state.source();
  std::vector<nn::Var> parts;
  parts.reserve(state.embedded().size() + 1);
  parts.push_back(state.source());
  for (const auto& z : state.embedded()) parts.push_back(z);
  return nn::concat_cols(parts);
}

nn::Var encode_block(const EncoderState& state, const ViTEncoder& encoder, double power) {
  return encoder.encode(build_input_sequence(state), power);
}

}  // namespace jsccf
