#include "jsccf/errors.hpp"
#include "jsccf/imaging.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace jsccf;
namespace fs = std::filesystem;

namespace {

Image ramp(int h, int w) {
  Image img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = static_cast<double>(i) / img.size();
  return img;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jsccf_imaging_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Imaging, PatchifyRoundTrip) {
  const Image img = ramp(8, 8);
  for (int side : {1, 2, 4, 8}) {
    const PatchSequence seq = patchify(img, PatchSpec{side});
    EXPECT_EQ(seq.tokens.rows(), side * side);
    EXPECT_EQ(seq.tokens.cols(), 192 / (side * side));
    EXPECT_EQ(unpatchify(seq, 8, 8), img);
  }
}

TEST(Imaging, PatchTokenLayout) {
  // Patch r is row-major over the grid; within a patch, pixels are row-major
  // and channels interleaved.
  const Image img = ramp(4, 4);
  const nn::Matrix t = patchify_matrix(img, PatchSpec{2});
  ASSERT_EQ(t.rows(), 4);
  ASSERT_EQ(t.cols(), 12);
  for (int gy = 0; gy < 2; ++gy) {
    for (int gx = 0; gx < 2; ++gx) {
      for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) {
          for (int c = 0; c < 3; ++c) {
            EXPECT_EQ(t(gy * 2 + gx, (y * 2 + x) * 3 + c), img.at(gy * 2 + y, gx * 2 + x, c));
          }
        }
      }
    }
  }
}

TEST(Imaging, CifarSequenceLengths) {
  // 32x32 on an 8x8 grid: l = 64, c = 48.
  EXPECT_EQ(PatchSpec{8}.sequence_length(), 64);
  EXPECT_EQ(PatchSpec{8}.token_dim(32, 32), 48);
  EXPECT_EQ(patchify_matrix(Image(32, 32), PatchSpec{8}).rows(), 64);
  EXPECT_THROW(PatchSpec{3}.check(32, 32), DimensionError);
  EXPECT_THROW(patchify(Image(10, 10), PatchSpec{4}), DimensionError);
}

TEST(Imaging, CifarBinaryRecords) {
  const fs::path dir = temp_dir("cifar");
  std::vector<unsigned char> bytes;
  for (int r = 0; r < 2; ++r) {
    bytes.push_back(static_cast<unsigned char>(r));  // label
    for (int i = 0; i < 3072; ++i) bytes.push_back(static_cast<unsigned char>((i + r * 7) % 256));
  }
  {
    std::ofstream out(dir / "data_batch_1.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const auto images = load_cifar10_binary(dir);
  ASSERT_EQ(images.size(), 2u);
  for (int r = 0; r < 2; ++r) {
    const Image& img = images[static_cast<std::size_t>(r)];
    ASSERT_EQ(img.height, 32);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
          const int plane_index = c * 1024 + y * 32 + x;
          EXPECT_DOUBLE_EQ(img.at(y, x, c), ((plane_index + r * 7) % 256) / 255.0);
        }
      }
    }
  }
  {
    std::ofstream out(dir / "broken.bin", std::ios::binary);
    out.write("abc", 3);
  }
  EXPECT_THROW(load_cifar10_binary(dir / "broken.bin"), FormatError);
}

TEST(Imaging, PngRoundTripIsQuantized) {
  const fs::path dir = temp_dir("png");
  const Image img = ramp(5, 7);
  write_png(img, dir / "a.png");
  const Image back = read_png(dir / "a.png");
  ASSERT_EQ(back.height, 5);
  ASSERT_EQ(back.width, 7);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.pixels[i], img.pixels[i], 0.5 / 255.0 + 1e-12);
}

TEST(Imaging, ImageFolderSortedByName) {
  const fs::path dir = temp_dir("folder");
  write_png(Image(2, 2, 1.0), dir / "b.png");
  write_png(Image(2, 2, 0.0), dir / "a.png");
  const auto images = load_image_folder(dir);
  ASSERT_EQ(images.size(), 2u);
  EXPECT_EQ(images[0].pixels[0], 0.0);
  EXPECT_EQ(images[1].pixels[0], 1.0);
}

TEST(Imaging, SyntheticIsSeededAndInRange) {
  const auto a = synthetic_dataset(4, 8, 3);
  const auto b = synthetic_dataset(4, 8, 3);
  const auto c = synthetic_dataset(4, 8, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& img : a) {
    for (double v : img.pixels) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Imaging, DatasetFormatNames) {
  for (auto f : {DatasetFormat::Cifar10Binary, DatasetFormat::ImageFolder, DatasetFormat::Synthetic}) {
    EXPECT_EQ(parse_dataset_format(to_string(f)), f);
  }
  EXPECT_THROW(parse_dataset_format("jpeg"), ConfigError);
}
