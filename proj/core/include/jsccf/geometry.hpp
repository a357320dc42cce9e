#pragma once

#include <string>

namespace jsccf {

// What the encoder receives from block t's feedback.
enum class FeedbackMode {
  Full,       // gradient-stopped transmitter-side reconstruction + raw feedback
  Lite,       // raw feedback only
  ScalarSnr,  // the configured SNR (dB) as a single column
  None,       // nothing
};

FeedbackMode parse_feedback_mode(const std::string& name);
std::string to_string(FeedbackMode mode);

// Dimensions of an (n, m, k) code over h x w images tokenized on a
// grid x grid patch layout.
struct SessionGeometry {
  int height = 32;
  int width = 32;
  int grid = 8;
  int blocks = 1;   // m
  int symbols = 1;  // k, complex symbols per block

  // k = ratio * n / m; throws ConfigError when that is not a whole number.
  static SessionGeometry from_ratio(int height, int width, int grid, int blocks, double ratio);

  int length() const { return grid * grid; }                   // l
  int token_dim() const { return 3 * height * width / length(); }  // c
  int source_dim() const { return 3 * height * width; }        // n
  int block_width() const { return 2 * symbols / length(); }   // 2k/l
  int feedback_width(FeedbackMode mode) const;                 // z
  int encoder_input_width(FeedbackMode mode) const { return token_dim() + (blocks - 1) * feedback_width(mode); }
  int decoder_input_width() const { return blocks * block_width(); }
  double bandwidth_ratio() const { return static_cast<double>(blocks) * symbols / source_dim(); }

  void validate() const;
  friend bool operator==(const SessionGeometry&, const SessionGeometry&) = default;
};

}  // namespace jsccf
