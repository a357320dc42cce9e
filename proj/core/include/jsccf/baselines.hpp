#pragma once

#include "jsccf/imaging.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace jsccf {

// log2(1 + 10^(snr_db/10)), bits per complex channel use.
double awgn_capacity(double snr_db);

struct RatePoint {
  double r1 = 0.0;  // bits per real channel use
  double r2 = 0.0;
};

struct RateRegionPoint {
  double alpha = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};

// Two-user Gaussian broadcast channel with feedback. Both parameterized
// curves use 1/2 log2(1 + x).
//   curve a: R1 = 1/2 log2(1 + aP / s12), R2 = 1/2 log2(1 + (1-a)P / (aP + s2^2))
//   curve b: the same with the users exchanged,
// where s12 = s1^2 s2^2 / (s1^2 + s2^2).
RateRegionPoint broadcast_curve_a(double power, double sigma1_sq, double sigma2_sq, double alpha);
RateRegionPoint broadcast_curve_b(double power, double sigma1_sq, double sigma2_sq, double alpha);

struct RateRegion {
  double power = 1.0;
  double sigma1_sq = 1.0;
  double sigma2_sq = 1.0;
  std::vector<RateRegionPoint> curve_a;
  std::vector<RateRegionPoint> curve_b;
  // Upper boundary of the intersection of the two dominated regions,
  // ordered by increasing R1.
  std::vector<RatePoint> boundary;
  // Convex hull of the boundary plus the origin and axis intercepts,
  // counter-clockwise, not closed.
  std::vector<RatePoint> hull;
};

// Throws DomainError on non-positive power or variance, or alpha outside [0,1].
RateRegion broadcast_feedback_region(double power, double sigma1_sq, double sigma2_sq,
                                     std::span<const double> alpha_grid);
// `count` evenly spaced alphas over [0,1], endpoints included.
std::vector<double> alpha_grid(int count);

// Codec output at one quality level.
struct CodecLevel {
  int quality = 0;
  double bits = 0.0;
  double psnr = 0.0;
};

struct CapacityPoint {
  int quality = 0;
  double bits = 0.0;
  double psnr = 0.0;
  double channel_uses = 0.0;     // complex uses at capacity
  double bandwidth_ratio = 0.0;  // channel_uses / n
};

// Channel uses = bits / capacity for every level; returns the Pareto
// envelope (PSNR strictly increasing with channel uses).
std::vector<CapacityPoint> capacity_envelope(std::span<const CodecLevel> levels, double capacity_bits_per_use,
                                             int source_dim);
// Best envelope PSNR within a channel-use budget; -infinity if none fits.
double psnr_within_budget(std::span<const CapacityPoint> envelope, double channel_uses);

inline constexpr const char* kCodecHookEnv = "JSCCF_CODEC_HOOK";

// Runs `$JSCCF_CODEC_HOOK <input.png> <quality> <work_dir>` for each level;
// the hook prints "<bits> <decoded.png>" on stdout. Throws HookMissing when
// the variable is unset or the executable is absent.
std::vector<CodecLevel> run_codec_hook(const Image& image, std::span<const int> qualities,
                                       const std::filesystem::path& work_dir);

std::vector<CapacityPoint> bpg_capacity_bound(const Image& image, double snr_db, std::span<const int> qualities,
                                              const std::filesystem::path& work_dir);

}  // namespace jsccf
