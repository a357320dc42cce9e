#include "jsccf/protocol.hpp"

#include "jsccf/errors.hpp"
#include "jsccf/metrics.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>

namespace jsccf {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

double token_psnr(const nn::Matrix& reference, const nn::Matrix& estimate) {
  return psnr_from_mse((reference - estimate).squaredNorm() / static_cast<double>(reference.size()));
}

}  // namespace

SessionGraph simulate_session(const JsccfModel& model, const nn::Matrix& source_tokens, const SessionConfig& cfg,
                              const SessionOptions& options) {
  cfg.channel.validate();
  if (options.stop_at_psnr && cfg.channel.feedback != FeedbackKind::Perfect) {
    throw ConfigError("variable-rate transmission requires perfect feedback");
  }
  const SessionGeometry& g = model.geometry();
  const int m = g.blocks;
  const double power = cfg.channel.power;

  SessionGraph out;
  EncoderState state(source_tokens, g, model.mode(), cfg.channel.snr_db);
  ReceivedBuffer rx(m, g.length(), g.block_width());
  FeedbackBuffer tx(m, g.length(), g.block_width());

  Rng fading_rng = derive_stream(cfg.seed, cfg.image_id, 0, Link::Fading);
  out.fading = sample_fading(cfg.channel, fading_rng);

  for (int i = 1; i <= m; ++i) {
    if (i > 1) embed_feedback(state, out.fed_back.back(), &model.decoder());
    nn::Var x = encode_block(state, model.encoder(), power);
    Rng forward_rng = derive_stream(cfg.seed, cfg.image_id, static_cast<std::uint64_t>(i), Link::Forward);
    nn::Var y = forward_channel(x, cfg.channel, out.fading, forward_rng);
    Rng feedback_rng = derive_stream(cfg.seed, cfg.image_id, static_cast<std::uint64_t>(i), Link::Feedback);
    nn::Var y_hat = feedback_channel(y, cfg.channel, feedback_rng);

    out.sent.push_back(x);
    out.received.push_back(y);
    out.fed_back.push_back(y_hat);
    rx.receive(i, y);
    tx.push(y_hat);
    out.blocks_used = i;

    if (options.intermediate_reconstructions) {
      out.intermediate.push_back(model.decoder().decode_tokens(combine_received(rx)));
    }
    if (options.record_beliefs || options.stop_at_psnr) {
      const double belief = token_psnr(source_tokens, transmitter_belief(tx, model.decoder()).value());
      out.belief_psnr.push_back(belief);
      if (options.stop_at_psnr && belief >= *options.stop_at_psnr) break;
    }
  }

  if (options.intermediate_reconstructions && out.blocks_used == m) {
    out.reconstruction = out.intermediate.back();
  } else {
    out.reconstruction = model.decoder().decode_tokens(combine_received(rx));
  }
  return out;
}

namespace {

TransmissionTrace trace_from_graph(const SessionGraph& graph, const Image& image, const SessionGeometry& g,
                                   std::uint64_t session_id) {
  TransmissionTrace trace;
  trace.session_id = session_id;
  trace.fading = graph.fading.h;
  trace.blocks_used = graph.blocks_used;
  trace.symbols_per_block = g.symbols;
  for (std::size_t i = 0; i < graph.sent.size(); ++i) {
    BlockRecord rec;
    rec.block = static_cast<int>(i) + 1;
    rec.sent = real_to_complex_layout(graph.sent[i].value());
    rec.received = real_to_complex_layout(graph.received[i].value());
    rec.fed_back = real_to_complex_layout(graph.fed_back[i].value());
    rec.power = rec.sent.mean_power();
    if (i < graph.belief_psnr.size()) rec.belief_psnr = graph.belief_psnr[i];
    trace.blocks.push_back(std::move(rec));
  }
  trace.reconstruction = unpatchify_matrix(graph.reconstruction.value(), PatchSpec{g.grid}, g.height, g.width);
  trace.psnr = psnr(image, trace.reconstruction);
  return trace;
}

}  // namespace

TransmissionTrace run_session(const Image& image, const JsccfModel& model, const SessionConfig& cfg,
                              bool record_beliefs) {
  nn::NoGradGuard no_grad;
  const SessionGeometry& g = model.geometry();
  SessionOptions options;
  options.record_beliefs = record_beliefs;
  const auto graph = simulate_session(model, patchify_matrix(image, PatchSpec{g.grid}), cfg, options);
  return trace_from_graph(graph, image, g, cfg.image_id);
}

TransmissionTrace run_variable_rate(const Image& image, const JsccfModel& model, const SessionConfig& cfg,
                                    double target_psnr_db) {
  nn::NoGradGuard no_grad;
  const SessionGeometry& g = model.geometry();
  SessionOptions options;
  options.stop_at_psnr = target_psnr_db;
  const auto graph = simulate_session(model, patchify_matrix(image, PatchSpec{g.grid}), cfg, options);
  return trace_from_graph(graph, image, g, cfg.image_id);
}

void BroadcastConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("broadcast: lambda must lie in [0,1]");
  if (!(power > 0.0)) throw ConfigError("broadcast: power must be positive");
  if (!std::isfinite(snr1_db) || !std::isfinite(snr2_db)) throw ConfigError("broadcast: SNRs must be finite");
}

BroadcastGraph simulate_broadcast(const BroadcastModel& model, const nn::Matrix& tokens1, const nn::Matrix& tokens2,
                                  const BroadcastConfig& cfg) {
  cfg.validate();
  const SessionGeometry& g = model.geometry();
  const int m = g.blocks;
  std::array<EncoderState, 2> states{EncoderState(tokens1, g, FeedbackMode::Lite),
                                     EncoderState(tokens2, g, FeedbackMode::Lite)};
  std::array<ReceivedBuffer, 2> rx{ReceivedBuffer(m, g.length(), g.block_width()),
                                   ReceivedBuffer(m, g.length(), g.block_width())};
  std::array<ChannelConfig, 2> links;
  links[0].snr_db = cfg.snr1_db;
  links[1].snr_db = cfg.snr2_db;
  std::array<Link, 2> streams{Link::Broadcast1, Link::Broadcast2};
  if (cfg.swap_receiver_streams) std::swap(streams[0], streams[1]);

  BroadcastGraph out;
  for (int i = 1; i <= m; ++i) {
    std::array<nn::Var, 2> features;
    for (std::size_t j = 0; j < 2; ++j) {
      // Feedback is noiseless, so each message encoder sees its receiver's Y.
      if (i > 1) embed_feedback(states[j], out.received[j].back(), nullptr);
      features[j] = model.message_encoder(static_cast<int>(j)).features(build_input_sequence(states[j]));
    }
    nn::Var x = model.combine(features[0], features[1], cfg.power);
    out.sent.push_back(x);
    for (std::size_t j = 0; j < 2; ++j) {
      Rng rng = derive_stream(cfg.seed, cfg.image_id, static_cast<std::uint64_t>(i), streams[j]);
      nn::Var y = forward_channel(x, links[j], FadingState{}, rng);
      out.received[j].push_back(y);
      rx[j].receive(i, y);
    }
  }
  for (std::size_t j = 0; j < 2; ++j) {
    out.reconstruction[j] = model.decoder(static_cast<int>(j)).decode_tokens(combine_received(rx[j]));
  }
  return out;
}

std::pair<TransmissionTrace, TransmissionTrace> run_broadcast_session(const Image& image1, const Image& image2,
                                                                      const BroadcastModel& model,
                                                                      const BroadcastConfig& cfg) {
  nn::NoGradGuard no_grad;
  const SessionGeometry& g = model.geometry();
  const PatchSpec spec{g.grid};
  const auto graph = simulate_broadcast(model, patchify_matrix(image1, spec), patchify_matrix(image2, spec), cfg);
  std::array<TransmissionTrace, 2> traces;
  const std::array<const Image*, 2> images{&image1, &image2};
  for (std::size_t j = 0; j < 2; ++j) {
    SessionGraph view;
    view.sent = graph.sent;
    view.received = graph.received[j];
    view.fed_back = graph.received[j];
    view.reconstruction = graph.reconstruction[j];
    view.blocks_used = g.blocks;
    traces[j] = trace_from_graph(view, *images[j], g, cfg.image_id);
  }
  return {std::move(traces[0]), std::move(traces[1])};
}

void write_trace_csv_header(std::ostream& out) { out << "session_id,block,psnr_belief,power,blocks_used\n"; }

void write_trace_csv(std::ostream& out, const TransmissionTrace& trace) {
  for (const auto& b : trace.blocks) {
    out << trace.session_id << ',' << b.block << ',';
    if (b.belief_psnr) out << *b.belief_psnr;
    out << ',' << b.power << ',' << trace.blocks_used << '\n';
  }
}

namespace {

constexpr std::array<char, 8> kTraceMagic{'J', 'S', 'C', 'C', 'T', 'R', 'C', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("trace: truncated input");
  return v;
}

void put_block(std::ostream& out, const SymbolBlock& b) {
  for (const auto& s : b.symbols) {
    put(out, s.real());
    put(out, s.imag());
  }
}

SymbolBlock get_block(std::istream& in, int k) {
  SymbolBlock b;
  b.symbols.resize(static_cast<std::size_t>(k));
  for (auto& s : b.symbols) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    s = Complex(re, im);
  }
  return b;
}

}  // namespace

void write_trace_binary(std::ostream& out, const TransmissionTrace& trace) {
  out.write(kTraceMagic.data(), kTraceMagic.size());
  put<std::uint64_t>(out, trace.session_id);
  put<std::int32_t>(out, static_cast<std::int32_t>(trace.blocks.size()));
  put<std::int32_t>(out, trace.symbols_per_block);
  put<std::int32_t>(out, trace.blocks_used);
  put(out, trace.fading.real());
  put(out, trace.fading.imag());
  put(out, trace.psnr);
  for (const auto& b : trace.blocks) {
    put<std::int32_t>(out, b.block);
    put(out, b.power);
    put<std::uint8_t>(out, b.belief_psnr ? 1 : 0);
    put(out, b.belief_psnr.value_or(0.0));
    put_block(out, b.sent);
    put_block(out, b.received);
    put_block(out, b.fed_back);
  }
  put<std::int32_t>(out, trace.reconstruction.height);
  put<std::int32_t>(out, trace.reconstruction.width);
  for (double v : trace.reconstruction.pixels) put(out, v);
}

TransmissionTrace read_trace_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kTraceMagic) throw FormatError("trace: bad magic");
  TransmissionTrace t;
  t.session_id = get<std::uint64_t>(in);
  const auto blocks = get<std::int32_t>(in);
  t.symbols_per_block = get<std::int32_t>(in);
  t.blocks_used = get<std::int32_t>(in);
  const double re = get<double>(in);
  const double im = get<double>(in);
  t.fading = Complex(re, im);
  t.psnr = get<double>(in);
  if (blocks < 0 || t.symbols_per_block < 0) throw FormatError("trace: negative counts");
  for (int i = 0; i < blocks; ++i) {
    BlockRecord b;
    b.block = get<std::int32_t>(in);
    b.power = get<double>(in);
    const bool has_belief = get<std::uint8_t>(in) != 0;
    const double belief = get<double>(in);
    if (has_belief) b.belief_psnr = belief;
    b.sent = get_block(in, t.symbols_per_block);
    b.received = get_block(in, t.symbols_per_block);
    b.fed_back = get_block(in, t.symbols_per_block);
    t.blocks.push_back(std::move(b));
  }
  const auto h = get<std::int32_t>(in);
  const auto w = get<std::int32_t>(in);
  t.reconstruction = Image(h, w);
  for (auto& v : t.reconstruction.pixels) v = get<double>(in);
  return t;
}

}  // namespace jsccf
