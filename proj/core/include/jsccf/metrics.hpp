#pragma once

#include "jsccf/autograd.hpp"
#include "jsccf/imaging.hpp"

#include <memory>
#include <string>
#include <vector>

namespace jsccf {

// (1/3hw) ||a - b||^2. Throws ShapeError on mismatched images.
double mse(const Image& a, const Image& b);

// 10 log10(peak^2 / mse); +infinity when the images are identical.
double psnr(const Image& reference, const Image& estimate, double peak = 1.0);
double psnr_from_mse(double mse, double peak = 1.0);

// Per-layer features of one image: an (H*W) x C matrix plus channel weights.
struct FeatureLayer {
  nn::Var features;
  int height = 0;
  int width = 0;
  nn::Matrix weights;  // 1 x C
};

// Feature network behind the perceptual metric. `pixels` is an (h*w) x 3
// row-major pixel matrix; implementations must be differentiable in it.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::vector<FeatureLayer> extract(const nn::Var& pixels, int height, int width) const = 0;
};

// One layer whose features are the pixels themselves, unit weights.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::string name() const override { return "identity"; }
  std::vector<FeatureLayer> extract(const nn::Var& pixels, int height, int width) const override;
};

// Symbol a plugin shared library must export:
//   extern "C" jsccf::FeatureExtractor* jsccf_create_feature_extractor();
inline constexpr const char* kExtractorFactorySymbol = "jsccf_create_feature_extractor";
inline constexpr const char* kExtractorPluginEnv = "JSCCF_LPIPS_PLUGIN";

// "identity" is built in; "plugin" loads the library named by
// $JSCCF_LPIPS_PLUGIN. Throws PluginMissing when unavailable.
std::shared_ptr<const FeatureExtractor> load_feature_extractor(const std::string& name);

// sum_l 1/(H_l W_l) sum_{h,w} || w_l (.) (y^l - yhat^l) ||^2
nn::Var lpips_graph(const nn::Var& pixels_a, const nn::Var& pixels_b, int height, int width,
                    const FeatureExtractor& extractor);
double lpips(const Image& a, const Image& b, const FeatureExtractor* extractor);

nn::Var image_pixels(const Image& image);

// Differentiable permutation from l x c patch tokens to (h*w) x 3 pixels.
nn::Var tokens_to_pixels(const nn::Var& tokens, int grid, int height, int width);

}  // namespace jsccf
