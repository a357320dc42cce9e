#include "jsccf/geometry.hpp"

#include "jsccf/errors.hpp"

#include <cmath>

namespace jsccf {

FeedbackMode parse_feedback_mode(const std::string& name) {
  if (name == "full") return FeedbackMode::Full;
  if (name == "lite") return FeedbackMode::Lite;
  if (name == "scalar_snr") return FeedbackMode::ScalarSnr;
  if (name == "none") return FeedbackMode::None;
  throw ConfigError("unknown feedback mode '" + name + "'");
}

std::string to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::Full: return "full";
    case FeedbackMode::Lite: return "lite";
    case FeedbackMode::ScalarSnr: return "scalar_snr";
    case FeedbackMode::None: return "none";
  }
  return "?";
}

SessionGeometry SessionGeometry::from_ratio(int height, int width, int grid, int blocks, double ratio) {
  if (blocks < 1) throw ConfigError("session: blocks must be >= 1");
  const double k = ratio * 3.0 * height * width / blocks;
  const double rounded = std::round(k);
  if (rounded < 1.0 || std::abs(k - rounded) > 1e-9 * std::max(1.0, k)) {
    throw ConfigError("session: R * n / m = " + std::to_string(k) + " is not a whole number of symbols");
  }
  SessionGeometry g{height, width, grid, blocks, static_cast<int>(rounded)};
  g.validate();
  return g;
}

int SessionGeometry::feedback_width(FeedbackMode mode) const {
  switch (mode) {
    case FeedbackMode::Full: return block_width() + token_dim();
    case FeedbackMode::Lite: return block_width();
    case FeedbackMode::ScalarSnr: return 1;
    case FeedbackMode::None: return 0;
  }
  return 0;
}

void SessionGeometry::validate() const {
  if (height < 1 || width < 1 || grid < 1 || blocks < 1 || symbols < 1) {
    throw ConfigError("session: dimensions must be positive");
  }
  if (height % grid != 0 || width % grid != 0) {
    throw DimensionError("session: grid " + std::to_string(grid) + " does not divide the image");
  }
  if ((2 * symbols) % length() != 0) {
    throw DimensionError("session: l = " + std::to_string(length()) + " does not divide 2k = " +
                         std::to_string(2 * symbols));
  }
}

}  // namespace jsccf
