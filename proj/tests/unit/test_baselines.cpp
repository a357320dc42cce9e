#include "jsccf/baselines.hpp"
#include "jsccf/errors.hpp"
#include "jsccf/imaging.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace jsccf;
namespace fs = std::filesystem;

namespace {

double half_log2(double x) { return 0.5 * std::log2(1.0 + x); }

// z-component of (b - a) x (p - a); non-negative when p is left of a->b.
double cross(const RatePoint& a, const RatePoint& b, const RatePoint& p) {
  return (b.r1 - a.r1) * (p.r2 - a.r2) - (b.r2 - a.r2) * (p.r1 - a.r1);
}

}  // namespace

TEST(Capacity, AwgnValues) {
  EXPECT_DOUBLE_EQ(awgn_capacity(0.0), 1.0);
  EXPECT_NEAR(awgn_capacity(10.0), std::log2(11.0), 1e-12);
  EXPECT_LT(awgn_capacity(-2.0), awgn_capacity(15.0));
}

TEST(Region, CurveEndpoints) {
  // P = 1, s1^2 = s2^2 = 1: s12 = 1/2.
  const auto a1 = broadcast_curve_a(1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(a1.r1, 0.5 * std::log2(3.0), 1e-12);
  EXPECT_NEAR(a1.r1, 0.79248, 1e-5);
  EXPECT_EQ(a1.r2, 0.0);
  const auto a0 = broadcast_curve_a(1.0, 1.0, 1.0, 0.0);
  EXPECT_EQ(a0.r1, 0.0);
  EXPECT_NEAR(a0.r2, half_log2(1.0), 1e-12);
}

TEST(Region, CurveFormulas) {
  const double p = 2.0, s1 = 0.5, s2 = 1.5, s12 = s1 * s2 / (s1 + s2);
  for (double al : {0.1, 0.4, 0.8}) {
    const auto a = broadcast_curve_a(p, s1, s2, al);
    EXPECT_NEAR(a.r1, half_log2(al * p / s12), 1e-14);
    EXPECT_NEAR(a.r2, half_log2((1 - al) * p / (al * p + s2)), 1e-14);
    const auto b = broadcast_curve_b(p, s1, s2, al);
    EXPECT_NEAR(b.r2, half_log2(al * p / s12), 1e-14);
    EXPECT_NEAR(b.r1, half_log2((1 - al) * p / (al * p + s1)), 1e-14);
  }
}

TEST(Region, SymmetricNoiseMirrorsCurves) {
  for (double al : alpha_grid(11)) {
    const auto a = broadcast_curve_a(1.0, 0.7, 0.7, al);
    const auto b = broadcast_curve_b(1.0, 0.7, 0.7, al);
    EXPECT_NEAR(a.r1, b.r2, 1e-14);
    EXPECT_NEAR(a.r2, b.r1, 1e-14);
  }
}

TEST(Region, CurveAMonotoneInAlpha) {
  const auto grid = alpha_grid(50);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto prev = broadcast_curve_a(1.0, 1.0, 2.0, grid[i - 1]);
    const auto cur = broadcast_curve_a(1.0, 1.0, 2.0, grid[i]);
    EXPECT_GT(cur.r1, prev.r1);
    EXPECT_LT(cur.r2, prev.r2);
  }
}

TEST(Region, RejectsBadInputs) {
  EXPECT_THROW(broadcast_curve_a(0.0, 1.0, 1.0, 0.5), DomainError);
  EXPECT_THROW(broadcast_curve_a(1.0, -1.0, 1.0, 0.5), DomainError);
  EXPECT_THROW(broadcast_curve_b(1.0, 1.0, 1.0, 1.5), DomainError);
  EXPECT_THROW(alpha_grid(1), DomainError);
}

TEST(Region, BoundaryUnderBothCurvesAndHullContainsIt) {
  const auto grid = alpha_grid(101);
  const RateRegion region = broadcast_feedback_region(1.0, 1.0, 2.0, grid);
  ASSERT_FALSE(region.boundary.empty());
  EXPECT_EQ(region.curve_a.size(), grid.size());

  // Every boundary point lies inside the dominated region of each curve:
  // some curve point dominates it up to sampling error.
  for (const auto& pt : region.boundary) {
    for (const auto* curve : {&region.curve_a, &region.curve_b}) {
      bool dominated = false;
      for (std::size_t i = 1; i < curve->size() && !dominated; ++i) {
        const auto& u = (*curve)[i - 1];
        const auto& v = (*curve)[i];
        const double lo = std::min(u.r1, v.r1), hi = std::max(u.r1, v.r1);
        if (pt.r1 < lo - 1e-12 || pt.r1 > hi + 1e-12) continue;
        const double t = hi > lo ? (pt.r1 - u.r1) / (v.r1 - u.r1) : 0.0;
        dominated = pt.r2 <= u.r2 + t * (v.r2 - u.r2) + 1e-9;
      }
      EXPECT_TRUE(dominated) << pt.r1 << "," << pt.r2;
    }
  }

  const auto& hull = region.hull;
  ASSERT_GE(hull.size(), 3u);
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    for (const auto& p : region.boundary) EXPECT_GE(cross(a, b, p), -1e-12);
    EXPECT_GE(cross(a, b, RatePoint{0.0, 0.0}), -1e-12);
  }
}

TEST(Envelope, ParetoAndBudget) {
  const std::vector<CodecLevel> levels{{10, 800.0, 25.0}, {20, 1600.0, 30.0}, {30, 2000.0, 28.0}, {40, 3200.0, 35.0}};
  const auto env = capacity_envelope(levels, 2.0, 3072);
  ASSERT_EQ(env.size(), 3u);
  EXPECT_DOUBLE_EQ(env[0].channel_uses, 400.0);
  EXPECT_DOUBLE_EQ(env[0].bandwidth_ratio, 400.0 / 3072.0);
  EXPECT_EQ(env[2].quality, 40);
  EXPECT_DOUBLE_EQ(psnr_within_budget(env, 1000.0), 30.0);
  EXPECT_DOUBLE_EQ(psnr_within_budget(env, 1e9), 35.0);
  EXPECT_EQ(psnr_within_budget(env, 10.0), -std::numeric_limits<double>::infinity());
}

TEST(CodecHook, MissingHookIsReported) {
  ::unsetenv(kCodecHookEnv);
  const std::vector<int> q{30};
  EXPECT_THROW(run_codec_hook(Image(4, 4), q, fs::temp_directory_path() / "jsccf_hook_missing"), HookMissing);
  ::setenv(kCodecHookEnv, "/nonexistent/bpg_hook", 1);
  EXPECT_THROW(run_codec_hook(Image(4, 4), q, fs::temp_directory_path() / "jsccf_hook_missing"), HookMissing);
  ::unsetenv(kCodecHookEnv);
}

TEST(CodecHook, RunsExternalScript) {
  const fs::path dir = fs::temp_directory_path() / "jsccf_hook";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path script = dir / "hook.sh";
  {
    std::ofstream out(script);
    out << "#!/bin/sh\ncp \"$1\" \"$3/out_$2.png\"\necho \"$(($2 * 100)) $3/out_$2.png\"\n";
  }
  fs::permissions(script, fs::perms::owner_all);
  ::setenv(kCodecHookEnv, script.c_str(), 1);
  Image img(4, 4);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = (static_cast<double>(i % 7) + 0.3) / 10.0;
  const std::vector<int> q{1, 2};
  const auto levels = run_codec_hook(img, q, dir / "work");
  ::unsetenv(kCodecHookEnv);
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_DOUBLE_EQ(levels[1].bits, 200.0);
  EXPECT_GT(levels[0].psnr, 45.0);
  EXPECT_TRUE(std::isfinite(levels[0].psnr));
}
