#include "jsccf/plot.hpp"

#include "jsccf/errors.hpp"
#include "jsccf/io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace jsccf {

namespace {

constexpr int kGlyphW = 7;
constexpr int kGlyphH = 12;

// DejaVu Sans Mono at 11 px, printable ASCII from ' ' to '~', one row per byte.
constexpr unsigned char kFont[95][kGlyphH] = {
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // ' '
    {0x00, 0x00, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x00, 0x08, 0x00, 0x00},  // '!'
    {0x00, 0x00, 0x14, 0x14, 0x14, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // '"'
    {0x00, 0x00, 0x0a, 0x12, 0x3f, 0x14, 0x14, 0x7e, 0x28, 0x28, 0x00, 0x00},  // '#'
    {0x00, 0x00, 0x08, 0x1e, 0x28, 0x28, 0x1c, 0x0a, 0x0a, 0x3c, 0x08, 0x08},  // '$'
    {0x00, 0x00, 0x30, 0x48, 0x32, 0x04, 0x10, 0x2e, 0x0a, 0x0e, 0x00, 0x00},  // '%'
    {0x00, 0x00, 0x1c, 0x20, 0x30, 0x30, 0x28, 0x46, 0x66, 0x3e, 0x00, 0x00},  // '&'
    {0x00, 0x00, 0x08, 0x08, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // '\''
    {0x00, 0x04, 0x08, 0x08, 0x18, 0x10, 0x10, 0x18, 0x08, 0x08, 0x04, 0x00},  // '('
    {0x00, 0x10, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x18, 0x10, 0x00},  // ')'
    {0x00, 0x00, 0x08, 0x2a, 0x1c, 0x1c, 0x2a, 0x08, 0x00, 0x00, 0x00, 0x00},  // '*'
    {0x00, 0x00, 0x00, 0x00, 0x08, 0x08, 0x7e, 0x08, 0x08, 0x00, 0x00, 0x00},  // '+'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x08, 0x08, 0x10, 0x00},  // ','
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1c, 0x00, 0x00, 0x00, 0x00, 0x00},  // '-'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x08, 0x08, 0x00, 0x00},  // '.'
    {0x00, 0x00, 0x06, 0x04, 0x04, 0x08, 0x08, 0x10, 0x10, 0x20, 0x20, 0x00},  // '/'
    {0x00, 0x00, 0x1c, 0x36, 0x22, 0x22, 0x2a, 0x22, 0x36, 0x1c, 0x00, 0x00},  // '0'
    {0x00, 0x00, 0x38, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x3e, 0x00, 0x00},  // '1'
    {0x00, 0x00, 0x3c, 0x26, 0x06, 0x04, 0x08, 0x18, 0x30, 0x3e, 0x00, 0x00},  // '2'
    {0x00, 0x00, 0x1c, 0x26, 0x06, 0x1c, 0x06, 0x02, 0x26, 0x3c, 0x00, 0x00},  // '3'
    {0x00, 0x00, 0x0c, 0x0c, 0x14, 0x24, 0x24, 0x7e, 0x04, 0x04, 0x00, 0x00},  // '4'
    {0x00, 0x00, 0x3c, 0x20, 0x20, 0x3c, 0x06, 0x02, 0x06, 0x3c, 0x00, 0x00},  // '5'
    {0x00, 0x00, 0x1c, 0x30, 0x20, 0x3c, 0x26, 0x22, 0x26, 0x1c, 0x00, 0x00},  // '6'
    {0x00, 0x00, 0x3e, 0x04, 0x04, 0x04, 0x08, 0x08, 0x18, 0x10, 0x00, 0x00},  // '7'
    {0x00, 0x00, 0x1c, 0x26, 0x26, 0x1c, 0x26, 0x22, 0x26, 0x1c, 0x00, 0x00},  // '8'
    {0x00, 0x00, 0x1c, 0x26, 0x22, 0x26, 0x1e, 0x02, 0x04, 0x3c, 0x00, 0x00},  // '9'
    {0x00, 0x00, 0x00, 0x00, 0x08, 0x08, 0x00, 0x00, 0x08, 0x08, 0x00, 0x00},  // ':'
    {0x00, 0x00, 0x00, 0x00, 0x08, 0x08, 0x00, 0x00, 0x08, 0x08, 0x10, 0x00},  // ';'
    {0x00, 0x00, 0x00, 0x00, 0x02, 0x1c, 0x60, 0x1c, 0x02, 0x00, 0x00, 0x00},  // '<'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x7e, 0x00, 0x7e, 0x00, 0x00, 0x00, 0x00},  // '='
    {0x00, 0x00, 0x00, 0x00, 0x60, 0x1c, 0x06, 0x1c, 0x60, 0x00, 0x00, 0x00},  // '>'
    {0x00, 0x00, 0x3c, 0x06, 0x04, 0x08, 0x08, 0x08, 0x00, 0x08, 0x00, 0x00},  // '?'
    {0x00, 0x00, 0x1c, 0x22, 0x22, 0x4e, 0x52, 0x52, 0x4e, 0x20, 0x30, 0x1c},  // '@'
    {0x00, 0x00, 0x18, 0x18, 0x14, 0x14, 0x24, 0x3e, 0x22, 0x62, 0x00, 0x00},  // 'A'
    {0x00, 0x00, 0x3c, 0x26, 0x26, 0x3c, 0x22, 0x22, 0x22, 0x3c, 0x00, 0x00},  // 'B'
    {0x00, 0x00, 0x1c, 0x32, 0x20, 0x20, 0x20, 0x20, 0x32, 0x1c, 0x00, 0x00},  // 'C'
    {0x00, 0x00, 0x38, 0x24, 0x22, 0x22, 0x22, 0x22, 0x24, 0x38, 0x00, 0x00},  // 'D'
    {0x00, 0x00, 0x3e, 0x20, 0x20, 0x3e, 0x20, 0x20, 0x20, 0x3e, 0x00, 0x00},  // 'E'
    {0x00, 0x00, 0x3e, 0x20, 0x20, 0x3e, 0x20, 0x20, 0x20, 0x20, 0x00, 0x00},  // 'F'
    {0x00, 0x00, 0x1c, 0x32, 0x20, 0x20, 0x26, 0x22, 0x32, 0x1c, 0x00, 0x00},  // 'G'
    {0x00, 0x00, 0x22, 0x22, 0x22, 0x3e, 0x22, 0x22, 0x22, 0x22, 0x00, 0x00},  // 'H'
    {0x00, 0x00, 0x3e, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x3e, 0x00, 0x00},  // 'I'
    {0x00, 0x00, 0x1c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04, 0x38, 0x00, 0x00},  // 'J'
    {0x00, 0x00, 0x22, 0x24, 0x28, 0x38, 0x28, 0x24, 0x26, 0x22, 0x00, 0x00},  // 'K'
    {0x00, 0x00, 0x20, 0x20, 0x20, 0x20, 0x20, 0x20, 0x20, 0x3e, 0x00, 0x00},  // 'L'
    {0x00, 0x00, 0x66, 0x76, 0x76, 0x7a, 0x6a, 0x62, 0x62, 0x62, 0x00, 0x00},  // 'M'
    {0x00, 0x00, 0x22, 0x32, 0x32, 0x2a, 0x2a, 0x2e, 0x26, 0x26, 0x00, 0x00},  // 'N'
    {0x00, 0x00, 0x1c, 0x26, 0x22, 0x22, 0x22, 0x22, 0x26, 0x1c, 0x00, 0x00},  // 'O'
    {0x00, 0x00, 0x3c, 0x22, 0x22, 0x26, 0x3c, 0x20, 0x20, 0x20, 0x00, 0x00},  // 'P'
    {0x00, 0x00, 0x1c, 0x26, 0x22, 0x22, 0x22, 0x22, 0x26, 0x1c, 0x04, 0x00},  // 'Q'
    {0x00, 0x00, 0x3c, 0x26, 0x26, 0x26, 0x3c, 0x24, 0x22, 0x22, 0x00, 0x00},  // 'R'
    {0x00, 0x00, 0x1c, 0x20, 0x20, 0x30, 0x0c, 0x02, 0x26, 0x1c, 0x00, 0x00},  // 'S'
    {0x00, 0x00, 0x7e, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x00, 0x00},  // 'T'
    {0x00, 0x00, 0x22, 0x22, 0x22, 0x22, 0x22, 0x22, 0x26, 0x1c, 0x00, 0x00},  // 'U'
    {0x00, 0x00, 0x62, 0x22, 0x26, 0x24, 0x14, 0x14, 0x18, 0x18, 0x00, 0x00},  // 'V'
    {0x00, 0x00, 0x43, 0x42, 0x4a, 0x7a, 0x32, 0x36, 0x36, 0x26, 0x00, 0x00},  // 'W'
    {0x00, 0x00, 0x22, 0x34, 0x14, 0x08, 0x18, 0x14, 0x26, 0x62, 0x00, 0x00},  // 'X'
    {0x00, 0x00, 0x62, 0x26, 0x14, 0x18, 0x08, 0x08, 0x08, 0x08, 0x00, 0x00},  // 'Y'
    {0x00, 0x00, 0x3e, 0x02, 0x04, 0x08, 0x08, 0x10, 0x20, 0x3e, 0x00, 0x00},  // 'Z'
    {0x00, 0x1c, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x1c, 0x00},  // '['
    {0x00, 0x00, 0x20, 0x20, 0x10, 0x10, 0x08, 0x08, 0x04, 0x04, 0x06, 0x00},  // '\\'
    {0x00, 0x18, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x18, 0x00},  // ']'
    {0x00, 0x00, 0x18, 0x14, 0x22, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // '^'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // '_'
    {0x00, 0x10, 0x08, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // '`'
    {0x00, 0x00, 0x00, 0x00, 0x3c, 0x06, 0x3e, 0x22, 0x26, 0x3e, 0x00, 0x00},  // 'a'
    {0x00, 0x20, 0x20, 0x20, 0x3c, 0x36, 0x22, 0x22, 0x36, 0x3c, 0x00, 0x00},  // 'b'
    {0x00, 0x00, 0x00, 0x00, 0x1e, 0x30, 0x20, 0x20, 0x30, 0x1e, 0x00, 0x00},  // 'c'
    {0x00, 0x02, 0x02, 0x02, 0x1e, 0x26, 0x26, 0x26, 0x26, 0x1e, 0x00, 0x00},  // 'd'
    {0x00, 0x00, 0x00, 0x00, 0x1c, 0x22, 0x3e, 0x20, 0x20, 0x1e, 0x00, 0x00},  // 'e'
    {0x00, 0x0e, 0x08, 0x08, 0x3e, 0x08, 0x08, 0x08, 0x08, 0x08, 0x00, 0x00},  // 'f'
    {0x00, 0x00, 0x00, 0x00, 0x1e, 0x26, 0x26, 0x26, 0x26, 0x1e, 0x04, 0x3c},  // 'g'
    {0x00, 0x20, 0x20, 0x20, 0x3c, 0x36, 0x22, 0x22, 0x22, 0x22, 0x00, 0x00},  // 'h'
    {0x00, 0x08, 0x00, 0x00, 0x38, 0x08, 0x08, 0x08, 0x08, 0x3e, 0x00, 0x00},  // 'i'
    {0x00, 0x08, 0x00, 0x00, 0x38, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x38},  // 'j'
    {0x00, 0x20, 0x20, 0x20, 0x26, 0x2c, 0x38, 0x3c, 0x24, 0x22, 0x00, 0x00},  // 'k'
    {0x00, 0x38, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x18, 0x0e, 0x00, 0x00},  // 'l'
    {0x00, 0x00, 0x00, 0x00, 0x3e, 0x2a, 0x2a, 0x2a, 0x2a, 0x2a, 0x00, 0x00},  // 'm'
    {0x00, 0x00, 0x00, 0x00, 0x3c, 0x36, 0x22, 0x22, 0x22, 0x22, 0x00, 0x00},  // 'n'
    {0x00, 0x00, 0x00, 0x00, 0x1c, 0x26, 0x22, 0x22, 0x26, 0x1c, 0x00, 0x00},  // 'o'
    {0x00, 0x00, 0x00, 0x00, 0x3c, 0x36, 0x22, 0x22, 0x36, 0x3c, 0x20, 0x20},  // 'p'
    {0x00, 0x00, 0x00, 0x00, 0x1e, 0x26, 0x22, 0x22, 0x26, 0x1e, 0x02, 0x02},  // 'q'
    {0x00, 0x00, 0x00, 0x00, 0x1e, 0x18, 0x10, 0x10, 0x10, 0x10, 0x00, 0x00},  // 'r'
    {0x00, 0x00, 0x00, 0x00, 0x1c, 0x20, 0x38, 0x0c, 0x06, 0x3c, 0x00, 0x00},  // 's'
    {0x00, 0x00, 0x10, 0x10, 0x3e, 0x10, 0x10, 0x10, 0x18, 0x0e, 0x00, 0x00},  // 't'
    {0x00, 0x00, 0x00, 0x00, 0x22, 0x22, 0x22, 0x22, 0x26, 0x1e, 0x00, 0x00},  // 'u'
    {0x00, 0x00, 0x00, 0x00, 0x22, 0x26, 0x24, 0x14, 0x1c, 0x18, 0x00, 0x00},  // 'v'
    {0x00, 0x00, 0x00, 0x00, 0x43, 0x42, 0x2a, 0x3a, 0x36, 0x34, 0x00, 0x00},  // 'w'
    {0x00, 0x00, 0x00, 0x00, 0x26, 0x14, 0x18, 0x18, 0x34, 0x22, 0x00, 0x00},  // 'x'
    {0x00, 0x00, 0x00, 0x00, 0x22, 0x22, 0x14, 0x14, 0x18, 0x08, 0x18, 0x30},  // 'y'
    {0x00, 0x00, 0x00, 0x00, 0x3e, 0x04, 0x08, 0x10, 0x10, 0x3e, 0x00, 0x00},  // 'z'
    {0x00, 0x0e, 0x08, 0x08, 0x08, 0x30, 0x18, 0x08, 0x08, 0x08, 0x0e, 0x00},  // '{'
    {0x00, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08, 0x08},  // '|'
    {0x00, 0x30, 0x08, 0x08, 0x08, 0x0e, 0x08, 0x08, 0x08, 0x08, 0x30, 0x00},  // '}'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x38, 0x0e, 0x00, 0x00, 0x00, 0x00},  // '~'
};

using Rgb = std::array<double, 3>;

const std::array<Rgb, 8> kPalette{{{0.12, 0.47, 0.71},
                                   {0.84, 0.15, 0.16},
                                   {0.17, 0.63, 0.17},
                                   {1.00, 0.50, 0.05},
                                   {0.58, 0.40, 0.74},
                                   {0.55, 0.34, 0.29},
                                   {0.89, 0.47, 0.76},
                                   {0.50, 0.50, 0.50}}};

class Canvas {
 public:
  Canvas(int w, int h) : image_(h, w, 1.0) {}

  void set(int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    for (int k = 0; k < 3; ++k) image_.at(y, x, k) = c[static_cast<std::size_t>(k)];
  }

  void line(double x0, double y0, double x1, double y1, const Rgb& c, int thickness = 1) {
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      for (int dy = 0; dy < thickness; ++dy) {
        for (int dx = 0; dx < thickness; ++dx) set(x + dx - thickness / 2, y + dy - thickness / 2, c);
      }
    }
  }

  void marker(double x, double y, const Rgb& c) {
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));
    for (int dy = -3; dy <= 3; ++dy) {
      for (int dx = -3; dx <= 3; ++dx) {
        if (dx * dx + dy * dy <= 9) set(cx + dx, cy + dy, c);
      }
    }
  }

  void text(int x, int y, const std::string& s, const Rgb& c) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const unsigned char ch = static_cast<unsigned char>(s[i]);
      if (ch < 32 || ch > 126) continue;
      const auto& glyph = kFont[ch - 32];
      for (int gy = 0; gy < kGlyphH; ++gy) {
        for (int gx = 0; gx < kGlyphW; ++gx) {
          if (glyph[gy] & (1 << (kGlyphW - 1 - gx))) set(x + static_cast<int>(i) * kGlyphW + gx, y + gy, c);
        }
      }
    }
  }

  // Rotated 90 degrees counter-clockwise, reading bottom to top.
  void text_vertical(int x, int y, const std::string& s, const Rgb& c) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const unsigned char ch = static_cast<unsigned char>(s[i]);
      if (ch < 32 || ch > 126) continue;
      const auto& glyph = kFont[ch - 32];
      for (int gy = 0; gy < kGlyphH; ++gy) {
        for (int gx = 0; gx < kGlyphW; ++gx) {
          if (glyph[gy] & (1 << (kGlyphW - 1 - gx))) set(x + gy, y - static_cast<int>(i) * kGlyphW - gx, c);
        }
      }
    }
  }

  Image take() { return std::move(image_); }

 private:
  Image image_;
};

std::string tick_label(double v, double step) {
  std::ostringstream s;
  const int decimals = std::max(0, static_cast<int>(std::ceil(-std::log10(step) - 1e-9)));
  s << std::fixed << std::setprecision(decimals) << (std::abs(v) < step * 1e-9 ? 0.0 : v);
  return s.str();
}

int text_width(const std::string& s) { return static_cast<int>(s.size()) * kGlyphW; }

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target_count) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / std::max(1, target_count - 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) ticks.push_back(t);
  return ticks;
}

Image render_plot(const Plot& plot) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) throw DomainError("plot: nothing to draw");
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0 ? 0.05 * span : std::max(1.0, std::abs(lo) * 0.1);
    lo -= margin;
    hi += margin;
  };
  pad(xmin, xmax);
  pad(ymin, ymax);

  const int left = 70, right = 20, top = 36, bottom = 50;
  const int pw = plot.width - left - right;
  const int ph = plot.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

  Canvas c(plot.width, plot.height);
  const Rgb black{0, 0, 0};
  const Rgb grid{0.88, 0.88, 0.88};

  const auto xt = nice_ticks(xmin, xmax);
  const auto yt = nice_ticks(ymin, ymax);
  const double xstep = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
  const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
  for (double t : xt) {
    c.line(px(t), top, px(t), top + ph, grid);
    const std::string label = tick_label(t, xstep);
    c.text(static_cast<int>(px(t)) - text_width(label) / 2, top + ph + 6, label, black);
  }
  for (double t : yt) {
    c.line(left, py(t), left + pw, py(t), grid);
    const std::string label = tick_label(t, ystep);
    c.text(left - 6 - text_width(label), static_cast<int>(py(t)) - kGlyphH / 2, label, black);
  }
  c.line(left, top, left, top + ph, black);
  c.line(left, top + ph, left + pw, top + ph, black);
  c.line(left, top, left + pw, top, black);
  c.line(left + pw, top, left + pw, top + ph, black);

  c.text(plot.width / 2 - text_width(plot.title) / 2, 10, plot.title, black);
  c.text(left + pw / 2 - text_width(plot.x_label) / 2, plot.height - 20, plot.x_label, black);
  c.text_vertical(8, top + ph / 2 + text_width(plot.y_label) / 2, plot.y_label, black);

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const Rgb& color = kPalette[i % kPalette.size()];
    const auto& p = s.points;
    if (s.line) {
      for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        c.line(px(p[j].first), py(p[j].second), px(p[j + 1].first), py(p[j + 1].second), color, 2);
      }
      if (s.closed && p.size() > 2) {
        c.line(px(p.back().first), py(p.back().second), px(p.front().first), py(p.front().second), color, 2);
      }
    }
    if (s.markers) {
      for (const auto& [x, y] : p) {
        if (std::isfinite(x) && std::isfinite(y)) c.marker(px(x), py(y), color);
      }
    }
    const int ly = top + 8 + static_cast<int>(i) * (kGlyphH + 4);
    c.line(left + pw - 150, ly + kGlyphH / 2, left + pw - 130, ly + kGlyphH / 2, color, 2);
    c.text(left + pw - 124, ly, s.label, black);
  }
  return c.take();
}

void save_plot_png(const Plot& plot, const std::filesystem::path& path) {
  const Image img = render_plot(plot);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp.png";
  write_png(img, tmp);
  std::filesystem::rename(tmp, path);
}

std::string plot_data_csv(const Plot& plot) {
  std::ostringstream s;
  s << std::setprecision(17) << "series,x,y\n";
  for (const auto& series : plot.series) {
    for (const auto& [x, y] : series.points) s << series.label << ',' << x << ',' << y << '\n';
  }
  return s.str();
}

}  // namespace jsccf
