#include "jsccf/baselines.hpp"

#include "jsccf/errors.hpp"
#include "jsccf/metrics.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <sstream>

namespace jsccf {

double awgn_capacity(double snr_db) { return std::log2(1.0 + std::pow(10.0, snr_db / 10.0)); }

namespace {

double half_log(double x) { return 0.5 * std::log2(1.0 + x); }

void check_region_inputs(double power, double sigma1_sq, double sigma2_sq, double alpha) {
  if (!(power > 0.0)) throw DomainError("broadcast region: power must be positive");
  if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0)) throw DomainError("broadcast region: noise variances must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("broadcast region: alpha must lie in [0,1]");
}

// Largest r2 over the dominated region of a curve at abscissa r1, by linear
// interpolation between samples sorted by r1. -1 when r1 is out of reach.
double dominated_height(const std::vector<RatePoint>& curve, double r1) {
  double best = -1.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].r1 >= r1) best = std::max(best, curve[i].r2);
    if (i + 1 < curve.size()) {
      const RatePoint& a = curve[i];
      const RatePoint& b = curve[i + 1];
      if (a.r1 <= r1 && r1 <= b.r1 && b.r1 > a.r1) {
        const double t = (r1 - a.r1) / (b.r1 - a.r1);
        best = std::max(best, a.r2 + t * (b.r2 - a.r2));
      }
    }
  }
  return best;
}

std::vector<RatePoint> sorted_by_r1(const std::vector<RateRegionPoint>& pts) {
  std::vector<RatePoint> out;
  for (const auto& p : pts) out.push_back({p.r1, p.r2});
  std::sort(out.begin(), out.end(), [](const RatePoint& a, const RatePoint& b) {
    return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 > b.r2);
  });
  return out;
}

}  // namespace

RateRegionPoint broadcast_curve_a(double power, double sigma1_sq, double sigma2_sq, double alpha) {
  check_region_inputs(power, sigma1_sq, sigma2_sq, alpha);
  const double combined = sigma1_sq * sigma2_sq / (sigma1_sq + sigma2_sq);
  return {alpha, half_log(alpha * power / combined), half_log((1.0 - alpha) * power / (alpha * power + sigma2_sq))};
}

RateRegionPoint broadcast_curve_b(double power, double sigma1_sq, double sigma2_sq, double alpha) {
  check_region_inputs(power, sigma1_sq, sigma2_sq, alpha);
  const double combined = sigma1_sq * sigma2_sq / (sigma1_sq + sigma2_sq);
  return {alpha, half_log((1.0 - alpha) * power / (alpha * power + sigma1_sq)), half_log(alpha * power / combined)};
}

std::vector<double> alpha_grid(int count) {
  if (count < 2) throw DomainError("alpha grid needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(i) / (count - 1);
  return out;
}

RateRegion broadcast_feedback_region(double power, double sigma1_sq, double sigma2_sq,
                                     std::span<const double> alphas) {
  check_region_inputs(power, sigma1_sq, sigma2_sq, 0.0);
  if (alphas.empty()) throw DomainError("broadcast region: empty alpha grid");
  RateRegion region;
  region.power = power;
  region.sigma1_sq = sigma1_sq;
  region.sigma2_sq = sigma2_sq;
  for (double a : alphas) {
    region.curve_a.push_back(broadcast_curve_a(power, sigma1_sq, sigma2_sq, a));
    region.curve_b.push_back(broadcast_curve_b(power, sigma1_sq, sigma2_sq, a));
  }

  const auto ca = sorted_by_r1(region.curve_a);
  const auto cb = sorted_by_r1(region.curve_b);
  std::vector<double> xs{0.0};
  for (const auto& p : ca) xs.push_back(p.r1);
  for (const auto& p : cb) xs.push_back(p.r1);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    const double h = std::min(dominated_height(ca, x), dominated_height(cb, x));
    if (h >= 0.0) region.boundary.push_back({x, h});
  }

  namespace bg = boost::geometry;
  using Pt = bg::model::d2::point_xy<double>;
  bg::model::multi_point<Pt> cloud;
  bg::append(cloud, Pt(0.0, 0.0));
  double max_r1 = 0.0;
  double max_r2 = 0.0;
  for (const auto& p : region.boundary) {
    bg::append(cloud, Pt(p.r1, p.r2));
    max_r1 = std::max(max_r1, p.r1);
    max_r2 = std::max(max_r2, p.r2);
  }
  bg::append(cloud, Pt(max_r1, 0.0));
  bg::append(cloud, Pt(0.0, max_r2));
  bg::model::polygon<Pt, false, false> hull;
  bg::convex_hull(cloud, hull);
  for (const auto& p : hull.outer()) region.hull.push_back({p.x(), p.y()});
  return region;
}

std::vector<CapacityPoint> capacity_envelope(std::span<const CodecLevel> levels, double capacity_bits_per_use,
                                             int source_dim) {
  if (!(capacity_bits_per_use > 0.0)) throw DomainError("capacity must be positive");
  if (source_dim < 1) throw DomainError("source dimension must be positive");
  std::vector<CapacityPoint> pts;
  for (const auto& l : levels) {
    if (l.bits < 0.0) throw DomainError("codec level with negative size");
    const double uses = l.bits / capacity_bits_per_use;
    pts.push_back({l.quality, l.bits, l.psnr, uses, uses / source_dim});
  }
  std::sort(pts.begin(), pts.end(), [](const CapacityPoint& a, const CapacityPoint& b) {
    return a.channel_uses < b.channel_uses || (a.channel_uses == b.channel_uses && a.psnr > b.psnr);
  });
  std::vector<CapacityPoint> envelope;
  for (const auto& p : pts) {
    if (envelope.empty() || p.psnr > envelope.back().psnr) envelope.push_back(p);
  }
  return envelope;
}

double psnr_within_budget(std::span<const CapacityPoint> envelope, double channel_uses) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : envelope) {
    if (p.channel_uses <= channel_uses) best = std::max(best, p.psnr);
  }
  return best;
}

std::vector<CodecLevel> run_codec_hook(const Image& image, std::span<const int> qualities,
                                       const std::filesystem::path& work_dir) {
  const char* hook = std::getenv(kCodecHookEnv);
  if (hook == nullptr || *hook == '\0') {
    throw HookMissing(std::string("codec hook not configured; set ") + kCodecHookEnv);
  }
  if (!std::filesystem::exists(hook)) throw HookMissing(std::string("codec hook not found: ") + hook);
  std::filesystem::create_directories(work_dir);
  const auto input = work_dir / "input.png";
  write_png(image, input);

  std::vector<CodecLevel> levels;
  for (int q : qualities) {
    const std::string cmd = "'" + std::string(hook) + "' '" + input.string() + "' " + std::to_string(q) + " '" +
                            work_dir.string() + "'";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) throw HookMissing("cannot run codec hook: " + cmd);
    std::string output;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe.get()) != nullptr) output += buf;
    std::istringstream in(output);
    double bits = 0.0;
    std::string decoded;
    if (!(in >> bits >> decoded)) throw FormatError("codec hook output not understood: '" + output + "'");
    levels.push_back({q, bits, psnr(image, read_png(decoded))});
  }
  return levels;
}

std::vector<CapacityPoint> bpg_capacity_bound(const Image& image, double snr_db, std::span<const int> qualities,
                                              const std::filesystem::path& work_dir) {
  const auto levels = run_codec_hook(image, qualities, work_dir);
  return capacity_envelope(levels, awgn_capacity(snr_db), static_cast<int>(image.size()));
}

}  // namespace jsccf
