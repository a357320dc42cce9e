#include "jsccf/errors.hpp"
#include "jsccf/metrics.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

using namespace jsccf;
using jsccf::testing::random_matrix;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
  const nn::Matrix m = random_matrix(1, 3 * h * w, seed, 0, 1);
  Image img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = m(0, static_cast<nn::Index>(i));
  return img;
}

Image shifted(const Image& img, double delta) {
  Image out = img;
  for (double& v : out.pixels) v += delta;
  return out;
}

// Fixed 2-layer extractor: the pixels, then 2 x 2 average pooling with
// non-unit channel weights.
class PoolExtractor final : public FeatureExtractor {
 public:
  std::string name() const override { return "pool"; }
  std::vector<FeatureLayer> extract(const nn::Var& pixels, int height, int width) const override {
    nn::Matrix pool = nn::Matrix::Zero((height / 2) * (width / 2), height * width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) pool((y / 2) * (width / 2) + x / 2, y * width + x) = 0.25;
    }
    nn::Matrix w(1, 3);
    w << 0.5, 1.0, 2.0;
    return {FeatureLayer{pixels, height, width, nn::Matrix::Ones(1, 3)},
            FeatureLayer{nn::matmul(nn::Var::constant(pool), pixels), height / 2, width / 2, w}};
  }
};

}  // namespace

TEST(Metrics, PsnrValues) {
  const Image a = random_image(4, 4, 1);
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(psnr(Image(4, 4, 0.0), Image(4, 4, 1.0)), 0.0, 1e-12);
  EXPECT_NEAR(psnr(Image(4, 4, 0.0), Image(4, 4, 0.1)), 20.0, 1e-9);
  EXPECT_NEAR(psnr_from_mse(1e-3), 30.0, 1e-12);
  EXPECT_NEAR(psnr(Image(4, 4, 0.0), Image(4, 4, 1.0), 255.0), 20.0 * std::log10(255.0), 1e-9);
}

TEST(Metrics, MseOracle) {
  const Image a = random_image(3, 5, 2);
  const Image b = random_image(3, 5, 3);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a.pixels[i] - b.pixels[i]) * (a.pixels[i] - b.pixels[i]);
  EXPECT_NEAR(mse(a, b), acc / 45.0, 1e-15);
  EXPECT_THROW(mse(a, Image(5, 3)), ShapeError);
}

TEST(Lpips, IdentityExtractorOracle) {
  const Image a = random_image(4, 4, 4);
  const Image b = random_image(4, 4, 5);
  const IdentityExtractor id;
  EXPECT_NEAR(lpips(a, b, &id), 3.0 * mse(a, b), 1e-12);
  EXPECT_EQ(lpips(a, a, &id), 0.0);
}

TEST(Lpips, ConstantShiftScalesWithChannelWeights) {
  // A constant offset delta per pixel gives sum_l sum_c w_c^2 delta^2.
  const PoolExtractor pool;
  const Image a = random_image(4, 4, 6);
  const double delta = 0.05;
  const double expected = (3.0 + (0.25 + 1.0 + 4.0)) * delta * delta;
  EXPECT_NEAR(lpips(a, shifted(a, delta), &pool), expected, 1e-12);
}

TEST(Lpips, SymmetricAndNonNegative) {
  const PoolExtractor pool;
  const Image a = random_image(4, 4, 7);
  const Image b = random_image(4, 4, 8);
  EXPECT_NEAR(lpips(a, b, &pool), lpips(b, a, &pool), 1e-15);
  EXPECT_GT(lpips(a, b, &pool), 0.0);
}

TEST(Lpips, GraphIsDifferentiable) {
  const PoolExtractor pool;
  const nn::Var a = image_pixels(random_image(4, 4, 9));
  nn::Var b = nn::Var::parameter(image_pixels(random_image(4, 4, 10)).value());
  std::vector<std::pair<std::string, nn::Var>> params{{"b", b}};
  const auto r = jsccf::testing::check_gradients([&] { return lpips_graph(a, b, 4, 4, pool); }, params);
  EXPECT_LT(r.max_rel_error, 1e-6) << r.worst;
}

TEST(Lpips, PluginMissing) {
  ::unsetenv(kExtractorPluginEnv);
  EXPECT_THROW(load_feature_extractor("plugin"), PluginMissing);
  ::setenv(kExtractorPluginEnv, "/nonexistent/libfeatures.so", 1);
  EXPECT_THROW(load_feature_extractor("plugin"), PluginMissing);
  ::unsetenv(kExtractorPluginEnv);
  EXPECT_EQ(load_feature_extractor("identity")->name(), "identity");
  EXPECT_THROW(load_feature_extractor("alexnet"), ConfigError);
}

TEST(Metrics, TokensToPixelsMatchesUnpatchify) {
  const Image img = random_image(4, 4, 11);
  const nn::Matrix tokens = patchify_matrix(img, PatchSpec{2});
  const nn::Matrix pixels = tokens_to_pixels(nn::Var::constant(tokens), 2, 4, 4).value();
  EXPECT_EQ(pixels, image_pixels(img).value());
}
