#pragma once

#include "jsccf/autograd.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace jsccf {

// RGB image, interleaved HWC, row-major, values in [0,1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0);

  double& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::size_t size() const { return pixels.size(); }

  friend bool operator==(const Image&, const Image&) = default;
};

// Splits an image into a side x side grid of patches.
struct PatchSpec {
  int side = 1;

  int sequence_length() const { return side * side; }
  // Token width c = 3hw / side^2.
  int token_dim(int height, int width) const;
  // Throws DimensionError unless side divides both dimensions.
  void check(int height, int width) const;
};

// l x c token matrix; row r is the row-major flattening of patch r.
struct PatchSequence {
  nn::Matrix tokens;
  PatchSpec spec;
};

PatchSequence patchify(const Image& image, PatchSpec spec);
Image unpatchify(const PatchSequence& seq, int height, int width);

nn::Matrix patchify_matrix(const Image& image, PatchSpec spec);
Image unpatchify_matrix(const nn::Matrix& tokens, PatchSpec spec, int height, int width);

enum class DatasetFormat { Cifar10Binary, ImageFolder, Synthetic };

DatasetFormat parse_dataset_format(const std::string& name);
std::string to_string(DatasetFormat format);

struct DatasetSource {
  DatasetFormat format = DatasetFormat::Synthetic;
  std::filesystem::path path;
  // Synthetic only.
  int count = 0;
  int size = 8;
  std::uint64_t seed = 0;
};

// CIFAR-10 binary: a single batch file or a directory of *.bin batches
// (sorted by name). Image folder: *.png sorted lexicographically. Synthetic:
// seeded smooth random fields (a base level plus two low-frequency cosines
// per channel), size x size.
std::vector<Image> load_dataset(const DatasetSource& source);

std::vector<Image> load_cifar10_binary(const std::filesystem::path& path);
std::vector<Image> load_image_folder(const std::filesystem::path& dir);
std::vector<Image> synthetic_dataset(int count, int size, std::uint64_t seed);

Image read_png(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace jsccf
