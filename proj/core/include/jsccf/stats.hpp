#pragma once

#include "jsccf/geometry.hpp"
#include "jsccf/nn.hpp"

#include <cstdint>

namespace jsccf {

// Closed-form sizes, independent of any instantiated model.
struct ModelStats {
  std::uint64_t encoder_params = 0;
  std::uint64_t decoder_params = 0;
  std::uint64_t encoder_macs = 0;  // one forward pass
  std::uint64_t decoder_macs = 0;  // one forward pass
  std::uint64_t session_macs = 0;  // all passes of an m-block session

  std::uint64_t params() const { return encoder_params + decoder_params; }
};

std::uint64_t transformer_layer_params(const nn::ModelSpec& spec);
std::uint64_t position_embedding_params(const nn::ModelSpec& spec, int length);
std::uint64_t transformer_layer_macs(const nn::ModelSpec& spec, int length);

// Session MACs count m encoder passes plus one receiver decode, and in full
// mode the m-1 transmitter-side decodes.
ModelStats model_stats(const nn::ModelSpec& spec, const SessionGeometry& geometry, FeedbackMode mode);

}  // namespace jsccf
