#pragma once

#include "jsccf/autograd.hpp"
#include "jsccf/rng.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace jsccf {

using Complex = std::complex<double>;

enum class ForwardKind { Awgn, SlowFading };
enum class FeedbackKind { Perfect, Awgn };

ForwardKind parse_forward_kind(const std::string& name);
FeedbackKind parse_feedback_kind(const std::string& name);
std::string to_string(ForwardKind kind);
std::string to_string(FeedbackKind kind);

struct ChannelConfig {
  ForwardKind forward = ForwardKind::Awgn;
  FeedbackKind feedback = FeedbackKind::Perfect;
  double snr_db = 10.0;
  // Infinite forward SNR; no noise is drawn.
  bool noiseless = false;
  std::optional<double> snr_fb_db;
  double sigma_h2 = 1.0;
  double power = 1.0;

  // sigma_w^2 = sigma_h^2 * 10^(-snr_db/10); zero when noiseless.
  double noise_variance() const;
  // sigma_f^2 = P_s * 10^(-snr_fb_db/10); zero for a perfect link.
  double feedback_noise_variance() const;
  void validate() const;
};

// k complex channel symbols.
struct SymbolBlock {
  std::vector<Complex> symbols;

  std::size_t size() const { return symbols.size(); }
  double mean_power() const;
  friend bool operator==(const SymbolBlock&, const SymbolBlock&) = default;
};

// Channel gain, drawn once per image and held for all m blocks.
struct FadingState {
  Complex h{1.0, 0.0};
};

// Real layout: an l x (2k/l) matrix whose row-major flattening interleaves
// (re, im) of symbols 0..k-1.
nn::Matrix complex_to_real_layout(const SymbolBlock& block, int rows);
SymbolBlock real_to_complex_layout(const nn::Matrix& layout);

// Uniform rescale so that (1/k)||X||^2 == power. Throws DegenerateInput on a
// zero input.
SymbolBlock power_normalize(const nn::Matrix& raw, double power);

// k i.i.d. CN(0, variance) samples (variance/2 per real component).
SymbolBlock complex_gaussian(std::size_t k, double variance, Rng& rng);

FadingState sample_fading(const ChannelConfig& cfg, Rng& rng);
SymbolBlock forward_channel(const SymbolBlock& x, const ChannelConfig& cfg, const FadingState& fading, Rng& rng);
SymbolBlock feedback_channel(const SymbolBlock& y, const ChannelConfig& cfg, Rng& rng);

// Differentiable versions on the real layout. Noise enters as an additive
// constant, so gradients flow to x unchanged.
nn::Var forward_channel(const nn::Var& x, const ChannelConfig& cfg, const FadingState& fading, Rng& rng);
nn::Var feedback_channel(const nn::Var& y, const ChannelConfig& cfg, Rng& rng);

}  // namespace jsccf
