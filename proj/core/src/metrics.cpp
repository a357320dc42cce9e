#include "jsccf/metrics.hpp"

#include "jsccf/errors.hpp"

#include <dlfcn.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

namespace jsccf {

double mse(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width || a.pixels.size() != b.pixels.size()) {
    throw ShapeError("mse: images differ in shape");
  }
  if (a.pixels.empty()) throw ShapeError("mse: empty image");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const Image& reference, const Image& estimate, double peak) {
  return psnr_from_mse(mse(reference, estimate), peak);
}

std::vector<FeatureLayer> IdentityExtractor::extract(const nn::Var& pixels, int height, int width) const {
  return {FeatureLayer{pixels, height, width, nn::Matrix::Ones(1, pixels.cols())}};
}

namespace {

class PluginHandle {
 public:
  explicit PluginHandle(const std::string& path) : handle_(dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL)) {
    if (handle_ == nullptr) throw PluginMissing("cannot load feature extractor plugin '" + path + "': " + dlerror());
  }
  ~PluginHandle() = default;  // plugins stay loaded for the process lifetime
  void* symbol(const char* name) const { return dlsym(handle_, name); }

 private:
  void* handle_;
};

}  // namespace

std::shared_ptr<const FeatureExtractor> load_feature_extractor(const std::string& name) {
  if (name == "identity") return std::make_shared<IdentityExtractor>();
  if (name != "plugin") throw ConfigError("unknown feature extractor '" + name + "'");
  const char* path = std::getenv(kExtractorPluginEnv);
  if (path == nullptr || *path == '\0') {
    throw PluginMissing(std::string("feature extractor plugin requested but $") + kExtractorPluginEnv + " is unset");
  }
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<PluginHandle>> loaded;
  std::lock_guard lock(mu);
  auto& handle = loaded[path];
  if (!handle) handle = std::make_shared<PluginHandle>(path);
  using Factory = FeatureExtractor* (*)();
  auto factory = reinterpret_cast<Factory>(handle->symbol(kExtractorFactorySymbol));
  if (factory == nullptr) throw PluginMissing(std::string(path) + " does not export " + kExtractorFactorySymbol);
  return std::shared_ptr<const FeatureExtractor>(factory());
}

nn::Var lpips_graph(const nn::Var& pixels_a, const nn::Var& pixels_b, int height, int width,
                    const FeatureExtractor& extractor) {
  const auto fa = extractor.extract(pixels_a, height, width);
  const auto fb = extractor.extract(pixels_b, height, width);
  if (fa.size() != fb.size() || fa.empty()) throw ShapeError("lpips: extractor returned inconsistent layers");
  nn::Var total;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    const auto& la = fa[i];
    const nn::Matrix diag = la.weights.row(0).asDiagonal();
    const nn::Var weighted = nn::matmul(la.features - fb[i].features, nn::Var::constant(diag));
    const nn::Var term = nn::scale(nn::sum_squares(weighted), 1.0 / (static_cast<double>(la.height) * la.width));
    total = i == 0 ? term : total + term;
  }
  return total;
}

double lpips(const Image& a, const Image& b, const FeatureExtractor* extractor) {
  if (extractor == nullptr) throw PluginMissing("lpips: no feature extractor loaded");
  if (a.height != b.height || a.width != b.width) throw ShapeError("lpips: images differ in shape");
  nn::NoGradGuard no_grad;
  return lpips_graph(image_pixels(a), image_pixels(b), a.height, a.width, *extractor).scalar();
}

nn::Var image_pixels(const Image& image) {
  nn::Matrix m = Eigen::Map<const nn::Matrix>(image.pixels.data(), static_cast<nn::Index>(image.height) * image.width, 3);
  return nn::Var::constant(std::move(m));
}

nn::Var tokens_to_pixels(const nn::Var& tokens, int grid, int height, int width) {
  // Cache the permutation per geometry.
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const std::vector<nn::Index>>> cache;
  std::shared_ptr<const std::vector<nn::Index>> index;
  {
    std::lock_guard lock(mu);
    auto& slot = cache[{grid, height, width}];
    if (!slot) {
      PatchSpec spec{grid};
      spec.check(height, width);
      const int ph = height / grid;
      const int pw = width / grid;
      const int c = 3 * ph * pw;
      auto idx = std::make_shared<std::vector<nn::Index>>(static_cast<std::size_t>(height) * width * 3);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const int token = (y / ph) * grid + (x / pw);
          for (int ch = 0; ch < 3; ++ch) {
            const int col = ((y % ph) * pw + (x % pw)) * 3 + ch;
            (*idx)[(static_cast<std::size_t>(y) * width + x) * 3 + ch] = static_cast<nn::Index>(token) * c + col;
          }
        }
      }
      slot = std::move(idx);
    }
    index = slot;
  }
  return nn::gather(tokens, index, static_cast<nn::Index>(height) * width, 3);
}

}  // namespace jsccf
