#pragma once

#include "jsccf/channel.hpp"
#include "jsccf/imaging.hpp"
#include "jsccf/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace jsccf {

struct SessionConfig {
  ChannelConfig channel;
  std::uint64_t seed = 0;      // master seed for all noise streams
  std::uint64_t image_id = 0;  // selects this image's streams
};

struct SessionOptions {
  // Receiver reconstruction after every block (zero-padded), with gradients.
  bool intermediate_reconstructions = false;
  // Transmitter-side belief PSNR after every block (gradient-stopped).
  bool record_beliefs = false;
  // Variable-rate stopping: end once the belief PSNR reaches this target.
  std::optional<double> stop_at_psnr;
};

// Differentiable record of one m-block transmission, all in real layout.
struct SessionGraph {
  std::vector<nn::Var> sent;       // X_i
  std::vector<nn::Var> received;   // Y_i
  std::vector<nn::Var> fed_back;   // Y_hat_i
  std::vector<nn::Var> intermediate;  // receiver tokens after block i
  std::vector<double> belief_psnr;
  nn::Var reconstruction;  // l x c tokens
  FadingState fading;
  int blocks_used = 0;
};

// Encode -> forward channel -> feedback channel -> state update, block by
// block, then decode the zero-padded concatenation of everything received.
SessionGraph simulate_session(const JsccfModel& model, const nn::Matrix& source_tokens, const SessionConfig& cfg,
                              const SessionOptions& options = {});

struct BlockRecord {
  int block = 0;  // 1-based
  SymbolBlock sent;
  SymbolBlock received;
  SymbolBlock fed_back;
  double power = 0.0;
  std::optional<double> belief_psnr;
};

struct TransmissionTrace {
  std::uint64_t session_id = 0;
  std::vector<BlockRecord> blocks;
  Complex fading{1.0, 0.0};
  Image reconstruction;
  double psnr = 0.0;
  int blocks_used = 0;
  int symbols_per_block = 0;

  std::size_t channel_uses() const { return static_cast<std::size_t>(blocks_used) * symbols_per_block; }
};

TransmissionTrace run_session(const Image& image, const JsccfModel& model, const SessionConfig& cfg,
                              bool record_beliefs = false);

// Stops after the first block whose transmitter-side belief reaches
// `target_psnr_db`, or after m blocks. Requires perfect feedback.
TransmissionTrace run_variable_rate(const Image& image, const JsccfModel& model, const SessionConfig& cfg,
                                    double target_psnr_db);

struct BroadcastConfig {
  double snr1_db = 4.0;
  double snr2_db = 7.0;
  double lambda = 0.5;
  double power = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t image_id = 0;
  // Exchanges the two receivers' noise streams.
  bool swap_receiver_streams = false;

  void validate() const;
};

struct BroadcastGraph {
  std::vector<nn::Var> sent;
  std::vector<nn::Var> received[2];
  nn::Var reconstruction[2];
};

BroadcastGraph simulate_broadcast(const BroadcastModel& model, const nn::Matrix& tokens1, const nn::Matrix& tokens2,
                                  const BroadcastConfig& cfg);

std::pair<TransmissionTrace, TransmissionTrace> run_broadcast_session(const Image& image1, const Image& image2,
                                                                      const BroadcastModel& model,
                                                                      const BroadcastConfig& cfg);

// session_id,block,psnr_belief,power,blocks_used
void write_trace_csv_header(std::ostream& out);
void write_trace_csv(std::ostream& out, const TransmissionTrace& trace);

// Little-endian binary dump: magic, counts, then per block the sent,
// received and fed-back symbols as float64 (re, im) pairs, then the
// reconstruction pixels.
void write_trace_binary(std::ostream& out, const TransmissionTrace& trace);
TransmissionTrace read_trace_binary(std::istream& in);

}  // namespace jsccf
