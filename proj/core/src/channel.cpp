#include "jsccf/channel.hpp"

#include "jsccf/errors.hpp"

#include <cmath>

namespace jsccf {

namespace {

nn::Matrix noise_layout(nn::Index rows, nn::Index cols, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  nn::Matrix noise(rows, cols);
  for (nn::Index j = 0; j < noise.size(); ++j) noise.data()[j] = normal(rng);
  return noise;
}

}  // namespace

ForwardKind parse_forward_kind(const std::string& name) {
  if (name == "awgn") return ForwardKind::Awgn;
  if (name == "slow_fading") return ForwardKind::SlowFading;
  throw ConfigError("unknown forward channel '" + name + "'");
}

FeedbackKind parse_feedback_kind(const std::string& name) {
  if (name == "perfect") return FeedbackKind::Perfect;
  if (name == "awgn") return FeedbackKind::Awgn;
  throw ConfigError("unknown feedback channel '" + name + "'");
}

std::string to_string(ForwardKind kind) { return kind == ForwardKind::Awgn ? "awgn" : "slow_fading"; }
std::string to_string(FeedbackKind kind) { return kind == FeedbackKind::Perfect ? "perfect" : "awgn"; }

double ChannelConfig::noise_variance() const {
  if (noiseless) return 0.0;
  return sigma_h2 * std::pow(10.0, -snr_db / 10.0);
}

double ChannelConfig::feedback_noise_variance() const {
  if (feedback == FeedbackKind::Perfect) return 0.0;
  return power * std::pow(10.0, -snr_fb_db.value_or(0.0) / 10.0);
}

void ChannelConfig::validate() const {
  if (!(sigma_h2 > 0.0)) throw ConfigError("channel.sigma_h2 must be positive");
  if (!(power > 0.0)) throw ConfigError("channel.power must be positive");
  if (!noiseless && !std::isfinite(snr_db)) throw ConfigError("channel.snr_db must be finite (use noiseless)");
  if (feedback == FeedbackKind::Awgn && !snr_fb_db) throw ConfigError("channel.snr_fb_db required for awgn feedback");
}

double SymbolBlock::mean_power() const {
  if (symbols.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : symbols) acc += std::norm(s);
  return acc / static_cast<double>(symbols.size());
}

nn::Matrix complex_to_real_layout(const SymbolBlock& block, int rows) {
  const auto reals = static_cast<nn::Index>(2 * block.size());
  if (rows < 1 || reals % rows != 0) {
    throw DimensionError("layout: " + std::to_string(rows) + " rows do not divide 2k = " + std::to_string(reals));
  }
  nn::Matrix out(rows, reals / rows);
  double* flat = out.data();
  for (std::size_t j = 0; j < block.size(); ++j) {
    flat[2 * j] = block.symbols[j].real();
    flat[2 * j + 1] = block.symbols[j].imag();
  }
  return out;
}

SymbolBlock real_to_complex_layout(const nn::Matrix& layout) {
  if (layout.size() % 2 != 0) throw DimensionError("layout: odd number of real components");
  SymbolBlock block;
  block.symbols.resize(static_cast<std::size_t>(layout.size() / 2));
  const double* flat = layout.data();
  for (std::size_t j = 0; j < block.size(); ++j) block.symbols[j] = Complex(flat[2 * j], flat[2 * j + 1]);
  return block;
}

SymbolBlock power_normalize(const nn::Matrix& raw, double power) {
  nn::NoGradGuard no_grad;
  return real_to_complex_layout(nn::power_normalize(nn::Var::constant(raw), power).value());
}

SymbolBlock complex_gaussian(std::size_t k, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  SymbolBlock out;
  out.symbols.resize(k);
  for (auto& s : out.symbols) {
    const double re = normal(rng);
    const double im = normal(rng);
    s = Complex(re, im);
  }
  return out;
}

FadingState sample_fading(const ChannelConfig& cfg, Rng& rng) {
  if (cfg.forward == ForwardKind::Awgn) return {};
  return {complex_gaussian(1, cfg.sigma_h2, rng).symbols.front()};
}

SymbolBlock forward_channel(const SymbolBlock& x, const ChannelConfig& cfg, const FadingState& fading, Rng& rng) {
  SymbolBlock y = x;
  if (cfg.forward == ForwardKind::SlowFading) {
    for (auto& s : y.symbols) s *= fading.h;
  }
  if (cfg.noiseless) return y;
  const SymbolBlock w = complex_gaussian(x.size(), cfg.noise_variance(), rng);
  for (std::size_t j = 0; j < y.size(); ++j) y.symbols[j] += w.symbols[j];
  return y;
}

SymbolBlock feedback_channel(const SymbolBlock& y, const ChannelConfig& cfg, Rng& rng) {
  if (cfg.feedback == FeedbackKind::Perfect) return y;
  SymbolBlock out = y;
  const SymbolBlock w = complex_gaussian(y.size(), cfg.feedback_noise_variance(), rng);
  for (std::size_t j = 0; j < out.size(); ++j) out.symbols[j] += w.symbols[j];
  return out;
}

nn::Var forward_channel(const nn::Var& x, const ChannelConfig& cfg, const FadingState& fading, Rng& rng) {
  nn::Var y = x;
  if (cfg.forward == ForwardKind::SlowFading) y = nn::complex_scale(x, fading.h.real(), fading.h.imag());
  if (cfg.noiseless) return y;
  return y + nn::Var::constant(noise_layout(x.rows(), x.cols(), cfg.noise_variance(), rng));
}

nn::Var feedback_channel(const nn::Var& y, const ChannelConfig& cfg, Rng& rng) {
  if (cfg.feedback == FeedbackKind::Perfect) return y;
  return y + nn::Var::constant(noise_layout(y.rows(), y.cols(), cfg.feedback_noise_variance(), rng));
}

}  // namespace jsccf
