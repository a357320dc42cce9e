#include "jsccf/imaging.hpp"

#include "jsccf/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

namespace jsccf {

namespace {

constexpr std::size_t kCifarSide = 32;
constexpr std::size_t kCifarPlane = kCifarSide * kCifarSide;
constexpr std::size_t kCifarRecord = 1 + 3 * kCifarPlane;

}  // namespace

Image::Image(int h, int w, double fill) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, fill) {
  if (h < 1 || w < 1) throw DimensionError("Image: dimensions must be positive");
}

int PatchSpec::token_dim(int height, int width) const {
  check(height, width);
  return 3 * height * width / (side * side);
}

void PatchSpec::check(int height, int width) const {
  if (side < 1 || height % side != 0 || width % side != 0) {
    throw DimensionError("patch grid " + std::to_string(side) + " does not divide " + std::to_string(height) + "x" +
                         std::to_string(width));
  }
}

nn::Matrix patchify_matrix(const Image& image, PatchSpec spec) {
  spec.check(image.height, image.width);
  const int ph = image.height / spec.side;
  const int pw = image.width / spec.side;
  nn::Matrix tokens(spec.sequence_length(), 3 * ph * pw);
  for (int gy = 0; gy < spec.side; ++gy) {
    for (int gx = 0; gx < spec.side; ++gx) {
      const int row = gy * spec.side + gx;
      int col = 0;
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          for (int c = 0; c < 3; ++c) tokens(row, col++) = image.at(gy * ph + y, gx * pw + x, c);
        }
      }
    }
  }
  return tokens;
}

Image unpatchify_matrix(const nn::Matrix& tokens, PatchSpec spec, int height, int width) {
  spec.check(height, width);
  const int ph = height / spec.side;
  const int pw = width / spec.side;
  if (tokens.rows() != spec.sequence_length() || tokens.cols() != 3 * ph * pw) {
    throw DimensionError("unpatchify: tokens " + std::to_string(tokens.rows()) + "x" + std::to_string(tokens.cols()) +
                         " inconsistent with " + std::to_string(height) + "x" + std::to_string(width) + " grid " +
                         std::to_string(spec.side));
  }
  Image image(height, width);
  for (int gy = 0; gy < spec.side; ++gy) {
    for (int gx = 0; gx < spec.side; ++gx) {
      const int row = gy * spec.side + gx;
      int col = 0;
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          for (int c = 0; c < 3; ++c) image.at(gy * ph + y, gx * pw + x, c) = tokens(row, col++);
        }
      }
    }
  }
  return image;
}

PatchSequence patchify(const Image& image, PatchSpec spec) { return {patchify_matrix(image, spec), spec}; }

Image unpatchify(const PatchSequence& seq, int height, int width) {
  return unpatchify_matrix(seq.tokens, seq.spec, height, width);
}

DatasetFormat parse_dataset_format(const std::string& name) {
  if (name == "cifar10-binary") return DatasetFormat::Cifar10Binary;
  if (name == "image-folder") return DatasetFormat::ImageFolder;
  if (name == "synthetic") return DatasetFormat::Synthetic;
  throw ConfigError("unknown dataset format '" + name + "'");
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::Cifar10Binary: return "cifar10-binary";
    case DatasetFormat::ImageFolder: return "image-folder";
    case DatasetFormat::Synthetic: return "synthetic";
  }
  return "?";
}

std::vector<Image> load_dataset(const DatasetSource& source) {
  switch (source.format) {
    case DatasetFormat::Cifar10Binary: return load_cifar10_binary(source.path);
    case DatasetFormat::ImageFolder: return load_image_folder(source.path);
    case DatasetFormat::Synthetic: return synthetic_dataset(source.count, source.size, source.seed);
  }
  return {};
}

static void append_cifar_file(const std::filesystem::path& file, std::vector<Image>& out) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % kCifarRecord != 0) {
    throw FormatError(file.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of " +
                      std::to_string(kCifarRecord));
  }
  const std::size_t records = bytes.size() / kCifarRecord;
  out.reserve(out.size() + records);
  for (std::size_t r = 0; r < records; ++r) {
    // Label byte is discarded; pixel planes are stored channel-major.
    const unsigned char* rec = bytes.data() + r * kCifarRecord + 1;
    Image img(kCifarSide, kCifarSide);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < kCifarPlane; ++p) img.pixels[p * 3 + c] = rec[c * kCifarPlane + p] / 255.0;
    }
    out.push_back(std::move(img));
  }
}

std::vector<Image> load_cifar10_binary(const std::filesystem::path& path) {
  std::vector<Image> out;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) append_cifar_file(f, out);
  } else {
    append_cifar_file(path, out);
  }
  return out;
}

std::vector<Image> load_image_folder(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (entry.is_regular_file() && ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_png(f));
  return out;
}

std::vector<Image> synthetic_dataset(int count, int size, std::uint64_t seed) {
  if (count < 0 || size < 1) throw ConfigError("synthetic dataset needs count >= 0 and size >= 1");
  constexpr double kTwoPi = 6.283185307179586;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Image> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Image img(size, size);
    for (int c = 0; c < 3; ++c) {
      const double base = 0.2 + 0.6 * uniform(rng);
      double amp[2], fy[2], fx[2], phase[2];
      for (int t = 0; t < 2; ++t) {
        amp[t] = 0.25 * uniform(rng);
        fy[t] = uniform(rng);
        fx[t] = uniform(rng);
        phase[t] = kTwoPi * uniform(rng);
      }
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          double v = base;
          for (int t = 0; t < 2; ++t) {
            v += amp[t] * std::cos(kTwoPi * (fy[t] * y + fx[t] * x) / size + phase[t]);
          }
          img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw FormatError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw FormatError(path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.height), static_cast<int>(png.width));
  for (std::size_t i = 0; i < buffer.size(); ++i) img.pixels[i] = buffer[i] / 255.0;
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(image.pixels.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<unsigned char>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw FormatError(path.string() + ": " + png.message);
  }
}

}  // namespace jsccf
