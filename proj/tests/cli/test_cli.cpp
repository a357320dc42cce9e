#include "cli.hpp"

#include "jsccf/baselines.hpp"
#include "jsccf/checkpoint.hpp"
#include "jsccf/config.hpp"
#include "jsccf/io.hpp"
#include "jsccf/results.hpp"
#include "jsccf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

using namespace jsccf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome jsccf_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "jsccf_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / "jsccf_cli_test" / (name + ".json");
  fs::create_directories(p.parent_path());
  atomic_write_file(p, text);
  return p;
}

const char* kSmoke = R"({
  "schema_version": 1,
  "seed": 5,
  "model": {"layers": 2, "heads": 2, "width": 16, "init_seed": 5},
  "session": {"height": 8, "width": 8, "grid": 4, "blocks": 2, "ratio": 0.5, "feedback_mode": "lite"},
  "channel": {"snr_db": 10.0},
  "train": {"lr": 0.001, "batch": 16, "max_steps": 400, "seed": 5},
  "train_data": {"format": "synthetic", "count": 256, "size": 8, "seed": 11},
  "test_data": {"format": "synthetic", "count": 48, "size": 8, "seed": 12},
  "eval": {"snr_db": [10], "snr_fb_db": [null, 20, 10, 0], "repeats": 3},
  "varrate": {"targets": [-1000, 18, 1000]}
})";

ResultTable read_results(const fs::path& path) {
  std::istringstream in(read_file(path));
  return ResultTable::read_csv(in);
}

// One trained smoke model shared by the evaluation tests.
class TrainedSmoke : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = write_config("smoke", kSmoke);
    run_ = scratch("smoke_train");
    const Outcome o = jsccf_cli({"train", "--config", config_.string(), "--out", run_.string()});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  static fs::path checkpoint() { return run_ / "checkpoint.bin"; }
  static inline fs::path config_;
  static inline fs::path run_;
};

}  // namespace

TEST(Cli, MissingDatasetIsExitTwoNamingTheKey) {
  const auto cfg = write_config(
      "missing", R"({"schema_version": 1, "train_data": {"format": "cifar10-binary", "path": "/no/such/cifar"}})");
  const Outcome o = jsccf_cli({"train", "--config", cfg.string(), "--out", scratch("missing").string()});
  EXPECT_EQ(o.code, cli::kExitConfig);
  EXPECT_NE(o.err.find("train_data.path"), std::string::npos) << o.err;
}

TEST(Cli, UsageErrorsAreExitTwo) {
  EXPECT_EQ(jsccf_cli({}).code, cli::kExitConfig);
  EXPECT_EQ(jsccf_cli({"train", "--bogus"}).code, cli::kExitConfig);
  EXPECT_EQ(jsccf_cli({"eval", "--out", scratch("nockpt").string()}).code, cli::kExitConfig);
  const auto bad = write_config("bad", R"({"schema_version": 1, "model": {"depth": 2}})");
  const Outcome o = jsccf_cli({"stats", "--config", bad.string()});
  EXPECT_EQ(o.code, cli::kExitConfig);
  EXPECT_NE(o.err.find("model.depth"), std::string::npos);
}

TEST(Cli, SameSeedGivesIdenticalCheckpoint) {
  const std::string text = std::string(kSmoke).replace(std::string(kSmoke).find("\"max_steps\": 400"), 16,
                                                       "\"max_steps\": 40");
  const auto cfg = write_config("short", text);
  std::string digest[3];
  for (int i = 0; i < 3; ++i) {
    const auto dir = scratch("repeat" + std::to_string(i));
    std::vector<std::string> args{"train", "--config", cfg.string(), "--out", dir.string()};
    if (i == 2) args.insert(args.end(), {"--seed", "99"});
    ASSERT_EQ(jsccf_cli(args).code, 0);
    digest[i] = sha256_hex(read_file(dir / "checkpoint.bin"));
  }
  EXPECT_EQ(digest[0], digest[1]);
  EXPECT_NE(digest[0], digest[2]);
}

TEST_F(TrainedSmoke, ManifestIsEnoughToRerun) {
  const auto j = nlohmann::json::parse(read_file(run_ / "manifest.json"));
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_FALSE(j.at("code_version").get<std::string>().empty());
  const ExperimentConfig cfg = parse_config(j.at("config").dump());
  EXPECT_EQ(j.at("config_hash"), config_hash(cfg));
  EXPECT_EQ(config_hash(cfg), config_hash(load_config(config_)));
  for (const char* f : {"checkpoint.bin", "history.csv", "loss.csv"}) EXPECT_TRUE(fs::exists(run_ / f)) << f;
  EXPECT_EQ(read_file(run_ / "loss.csv").substr(0, 10), "step,loss\n");
}

TEST_F(TrainedSmoke, EvalSweep) {
  const auto dir = scratch("eval");
  const Outcome o = jsccf_cli({"eval", "--checkpoint", checkpoint().string(), "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const ResultTable t = read_results(dir / "results.csv");
  ASSERT_EQ(t.rows().size(), 4u);
  for (const auto& r : t.rows()) {
    EXPECT_GT(r.psnr_std, 0.0);
    EXPECT_EQ(r.mode, "lite");
    EXPECT_EQ(r.ratio, 0.5);
  }

  // Perfect-feedback column against direct run_session calls.
  const Checkpoint ckpt = load_checkpoint(checkpoint());
  JsccfModel model(ckpt.config.model);
  restore_params(model.params(), ckpt);
  const auto images = load_dataset(*ckpt.config.test_data);
  std::vector<double> means;
  for (int r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      sum += run_session(images[i], model, SessionConfig{ckpt.config.channel, splitmix64(5 + r), i}).psnr;
    }
    means.push_back(sum / static_cast<double>(images.size()));
  }
  EXPECT_EQ(t.rows()[0].psnr_mean, mean_std(means).first);
  EXPECT_FALSE(t.rows()[0].snr_fb_db.has_value());

  // Noisier feedback never helps: perfect >= 20 dB >= 10 dB >= 0 dB.
  EXPECT_EQ(*t.rows()[1].snr_fb_db, 20.0);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_LE(t.rows()[i].psnr_mean, t.rows()[i - 1].psnr_mean) << i;

  // Same seed, same table.
  const auto again = scratch("eval_again");
  ASSERT_EQ(jsccf_cli({"eval", "--checkpoint", checkpoint().string(), "--out", again.string()}).code, 0);
  EXPECT_EQ(read_file(again / "results.csv"), read_file(dir / "results.csv"));
}

TEST_F(TrainedSmoke, VariableRateEndpoints) {
  const auto dir = scratch("varrate");
  ASSERT_EQ(jsccf_cli({"varrate", "--checkpoint", checkpoint().string(), "--out", dir.string()}).code, 0);
  const ResultTable t = read_results(dir / "results.csv");
  ASSERT_EQ(t.rows().size(), 3u);
  EXPECT_EQ(*t.rows()[0].blocks_used_mean, 1.0);
  EXPECT_EQ(*t.rows()[2].blocks_used_mean, 2.0);
  EXPECT_LE(*t.rows()[0].blocks_used_mean, *t.rows()[1].blocks_used_mean);
  EXPECT_LE(*t.rows()[1].blocks_used_mean, *t.rows()[2].blocks_used_mean);
  EXPECT_EQ(t.rows()[2].ratio, 0.5);

  const auto noisy = write_config("noisy", R"({"schema_version": 1, "channel": {"feedback": "awgn", "snr_fb_db": 5},
      "test_data": {"format": "synthetic", "count": 4, "size": 8}, "varrate": {"targets": [20]}})");
  const Outcome o = jsccf_cli({"varrate", "--checkpoint", checkpoint().string(), "--config", noisy.string(), "--out",
                               scratch("varrate_noisy").string()});
  EXPECT_EQ(o.code, cli::kExitConfig) << o.err;
}

TEST_F(TrainedSmoke, PlotsFromResults) {
  const auto eval = scratch("plot_eval");
  ASSERT_EQ(jsccf_cli({"eval", "--checkpoint", checkpoint().string(), "--out", eval.string()}).code, 0);
  const auto dir = scratch("plots");
  for (const char* kind : {"snr", "ratio", "blocks"}) {
    const Outcome o =
        jsccf_cli({"plot", "--input", (eval / "results.csv").string(), "--kind", kind, "--out", dir.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_TRUE(fs::exists(dir / (std::string("plot_") + kind + ".png")));
  }
  // Four feedback settings, one point each.
  EXPECT_NE(jsccf_cli({"plot", "--input", (eval / "results.csv").string(), "--kind", "ratio", "--out", dir.string()})
                .out.find("4 series, 4 points"),
            std::string::npos);
}

TEST(Cli, PlotEdgeCases) {
  const auto dir = scratch("plot_edges");
  fs::create_directories(dir);
  ResultTable t;
  atomic_write_file(dir / "empty.csv", t.to_csv());
  EXPECT_EQ(jsccf_cli({"plot", "--input", (dir / "empty.csv").string(), "--out", dir.string()}).code,
            cli::kExitRuntime);

  ResultRow r;
  r.snr_db = 7.0;
  r.ratio = 1.0 / 6.0;
  r.blocks = 2;
  r.mode = "full";
  r.psnr_mean = 32.98;
  t.append(r);
  atomic_write_file(dir / "one.csv", t.to_csv());
  const Outcome o = jsccf_cli({"plot", "--input", (dir / "one.csv").string(), "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("1 series, 1 points"), std::string::npos) << o.out;
  EXPECT_EQ(read_file(dir / "plot_snr.csv"), "series,x,y\nfull m=2 R=0.166667,7,32.979999999999997\n");
}

TEST(Cli, RegionPlotCarriesTheHull) {
  const auto dir = scratch("region");
  const Outcome o = jsccf_cli({"region", "--power", "1", "--snr1", "0", "--snr2", "0", "--points", "51", "--out",
                               dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto alphas = alpha_grid(51);
  const RateRegion oracle = broadcast_feedback_region(1.0, 1.0, 1.0, alphas);

  std::istringstream data(read_file(dir / "region_plot.csv"));
  std::string line;
  std::getline(data, line);
  std::vector<RatePoint> hull;
  while (std::getline(data, line)) {
    if (line.rfind("hull,", 0) != 0) continue;
    const auto c1 = line.find(',', 5);
    hull.push_back({std::stod(line.substr(5, c1 - 5)), std::stod(line.substr(c1 + 1))});
  }
  ASSERT_EQ(hull.size(), oracle.hull.size());
  for (std::size_t i = 0; i < hull.size(); ++i) {
    EXPECT_NEAR(hull[i].r1, oracle.hull[i].r1, 1e-12);
    EXPECT_NEAR(hull[i].r2, oracle.hull[i].r2, 1e-12);
  }
  EXPECT_TRUE(fs::exists(dir / "region_plot.png"));

  const auto replot = scratch("region_replot");
  EXPECT_EQ(jsccf_cli({"plot", "--kind", "region", "--input", (dir / "region.csv").string(), "--out",
                       replot.string()})
                .code,
            0);
  EXPECT_EQ(read_file(replot / "plot_region.csv"), read_file(dir / "region_plot.csv"));
}

TEST(Cli, StatsMatchesHandTally) {
  // d = 4, one layer, one head, MLP 16, 4x4 images on a 2x2 grid (c = 12),
  // m = 2, k = 8, lite: 2k/l = 4.
  //   layer:   norms 16, attention 64, MLP 4*16+16+16*4+4 = 148  -> 228
  //   encoder: W0 (12+4)x4 = 64, table 16, layer 228, Wc 4x4 = 16 -> 324
  //   decoder: Siamese 8*4+4+4*4+4 = 56, table 16, layer 228, Wout 4x12 = 48 -> 348
  const auto cfg = write_config("tiny", R"({"schema_version": 1,
      "model": {"layers": 1, "heads": 1, "width": 4, "mlp_hidden": 16},
      "session": {"height": 4, "width": 4, "grid": 2, "blocks": 2, "symbols": 8, "feedback_mode": "lite"}})");
  const auto dir = scratch("stats");
  const Outcome o = jsccf_cli({"stats", "--config", cfg.string(), "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("params 672 (encoder 324, decoder 348)"), std::string::npos) << o.out;
  const std::string csv = read_file(dir / "stats.csv");
  EXPECT_NE(csv.find("configured,lite,2,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Cli, BroadcastTrainThenEvaluate) {
  const auto cfg = write_config("bcast", R"({"schema_version": 1, "seed": 3,
      "model": {"layers": 1, "heads": 2, "width": 8},
      "session": {"height": 8, "width": 8, "grid": 4, "blocks": 2, "ratio": 0.5},
      "train": {"lr": 0.001, "batch": 8, "max_steps": 10},
      "loss": {"kind": "broadcast"},
      "train_data": {"format": "synthetic", "count": 32, "size": 8, "seed": 1},
      "test_data": {"format": "synthetic", "count": 8, "size": 8, "seed": 2},
      "broadcast": {"snr1_db": 4, "snr2_db": 7, "lambda": 0.3}})");
  const auto train_dir = scratch("bcast_train");
  ASSERT_EQ(jsccf_cli({"train", "--config", cfg.string(), "--out", train_dir.string()}).code, 0);
  const auto ckpt = (train_dir / "checkpoint.bin").string();
  EXPECT_EQ(load_checkpoint(ckpt).kind, ModelKind::Broadcast);

  const auto dir = scratch("bcast_eval");
  const Outcome o = jsccf_cli({"broadcast", "--checkpoint", ckpt, "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const ResultTable t = read_results(dir / "results.csv");
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.rows()[0].mode, "broadcast-rx1");
  EXPECT_EQ(t.rows()[1].snr_db, 7.0);
  EXPECT_EQ(read_file(dir / "broadcast.csv").substr(0, 33), "lambda,snr1_db,snr2_db,psnr1,psnr");

  EXPECT_EQ(jsccf_cli({"eval", "--checkpoint", ckpt, "--out", scratch("bcast_wrong").string()}).code,
            cli::kExitConfig);
}
