#include "cli.hpp"

#include "jsccf/baselines.hpp"
#include "jsccf/checkpoint.hpp"
#include "jsccf/config.hpp"
#include "jsccf/errors.hpp"
#include "jsccf/io.hpp"
#include "jsccf/metrics.hpp"
#include "jsccf/plot.hpp"
#include "jsccf/results.hpp"
#include "jsccf/rng.hpp"
#include "jsccf/stats.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace jsccf::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string checkpoint;
  std::string out;
  std::string input;
  std::string kind = "snr";
  std::optional<std::uint64_t> seed;
  std::optional<double> power;
  std::optional<double> snr1;
  std::optional<double> snr2;
  int points = 201;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Output directory plus the manifest that describes it.
class Run {
 public:
  Run(const std::string& out, std::string command, const ExperimentConfig& cfg) : dir_(out) {
    if (dir_.empty()) throw ConfigError("--out: an output directory is required");
    fs::create_directories(dir_);
    manifest_.command = std::move(command);
    manifest_.config = cfg;
    manifest_.seed = cfg.seed;
  }

  const fs::path& dir() const { return dir_; }
  RunManifest& manifest() { return manifest_; }

  void write(const std::string& name, const std::string& text) {
    atomic_write_file(dir_ / name, text);
    manifest_.outputs.push_back(name);
  }

  void plot(const std::string& stem, const Plot& p) {
    save_plot_png(p, dir_ / (stem + ".png"));
    manifest_.outputs.push_back(stem + ".png");
    write(stem + ".csv", plot_data_csv(p));
  }

  void finish() { write_manifest(dir_ / "manifest.json", manifest_); }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

void apply_seed(ExperimentConfig& cfg, const Options& opt) {
  if (!opt.seed) return;
  cfg.seed = *opt.seed;
  cfg.train.seed = *opt.seed;
  cfg.model.init_seed = *opt.seed;
}

std::vector<Image> train_images(const ExperimentConfig& cfg) {
  if (!cfg.train_data) throw ConfigError("train_data.path: a training dataset is required");
  return load_dataset_checked(*cfg.train_data, "train_data.path", cfg.train_limit);
}

std::vector<Image> test_images(const ExperimentConfig& cfg) {
  if (!cfg.test_data) throw ConfigError("test_data.path: a test dataset is required");
  auto images = load_dataset_checked(*cfg.test_data, "test_data.path", cfg.test_limit);
  if (images.empty()) throw ConfigError("test_data.path: the test dataset is empty");
  return images;
}

// Evaluation settings from --config when given, the model from the checkpoint.
ExperimentConfig eval_config(const Options& opt, const Checkpoint& ckpt) {
  ExperimentConfig cfg = ckpt.config;
  if (!opt.config.empty()) {
    cfg = load_config(opt.config);
    cfg.model = ckpt.config.model;
  }
  apply_seed(cfg, opt);
  return cfg;
}

Checkpoint load_model_checkpoint(const Options& opt, ModelKind expected) {
  if (opt.checkpoint.empty()) throw ConfigError("--checkpoint: a checkpoint is required");
  Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  if (ckpt.kind != expected) {
    throw ConfigError(expected == ModelKind::Broadcast ? "--checkpoint: expected a broadcast model"
                                                       : "--checkpoint: expected a point-to-point model");
  }
  return ckpt;
}

std::uint64_t repeat_seed(std::uint64_t seed, int repeat) {
  return splitmix64(seed + static_cast<std::uint64_t>(repeat));
}

std::vector<double> eval_snrs(const ExperimentConfig& cfg) {
  return cfg.eval.snr_db.empty() ? std::vector<double>{cfg.channel.snr_db} : cfg.eval.snr_db;
}

ChannelConfig channel_at(const ExperimentConfig& cfg, double snr_db, std::optional<double> snr_fb_db) {
  ChannelConfig ch = cfg.channel;
  ch.snr_db = snr_db;
  ch.noiseless = false;
  ch.snr_fb_db = snr_fb_db;
  ch.feedback = snr_fb_db ? FeedbackKind::Awgn : FeedbackKind::Perfect;
  ch.validate();
  return ch;
}

std::string epoch_line(const EpochRecord& e) {
  std::ostringstream s;
  s << "epoch " << e.epoch << "  step " << e.step << "  loss " << e.train_loss << "  val_psnr " << e.val_psnr;
  return s.str();
}

std::string history_csv(const TrainHistory& h) {
  std::string csv = "epoch,step,train_loss,val_psnr\n";
  for (const auto& e : h.epochs) {
    csv += std::to_string(e.epoch) + "," + std::to_string(e.step) + "," + num(e.train_loss) + "," +
           num(e.val_psnr) + "\n";
  }
  return csv;
}

std::string loss_csv(const TrainHistory& h) {
  std::string csv = "step,loss\n";
  for (std::size_t i = 0; i < h.step_loss.size(); ++i) csv += std::to_string(i + 1) + "," + num(h.step_loss[i]) + "\n";
  return csv;
}

void save_training(Run& run, const Checkpoint& ckpt, std::ostream& out) {
  const std::string bytes = serialize_checkpoint(ckpt);
  run.write("checkpoint.bin", bytes);
  run.write("history.csv", history_csv(ckpt.history));
  run.write("loss.csv", loss_csv(ckpt.history));
  out << "checkpoint sha256 " << sha256_hex(bytes) << "\n";
}

int cmd_train(const Options& opt, const std::string& command, std::ostream& out, std::ostream& err) {
  if (opt.config.empty()) throw ConfigError("--config: a config file is required");
  ExperimentConfig cfg = load_config(opt.config);
  apply_seed(cfg, opt);
  const auto images = train_images(cfg);
  Run run(opt.out, command, cfg);
  const auto on_epoch = [&](const EpochRecord& e) { out << epoch_line(e) << "\n"; };

  TrainHistory history;
  Checkpoint ckpt;
  if (cfg.loss.kind == LossKind::Broadcast) {
    BroadcastModel model(cfg.model);
    BroadcastConfig bc = cfg.broadcast;
    bc.seed = cfg.seed;
    history = train_broadcast(model, images, bc, cfg.train, on_epoch);
    ckpt = make_checkpoint(model.params(), ModelKind::Broadcast, cfg, history);
  } else {
    JsccfModel model(cfg.model);
    history = train(model, images, cfg.channel, cfg.train, cfg.loss, on_epoch);
    ckpt = make_checkpoint(model.params(), ModelKind::PointToPoint, cfg, history);
  }
  for (const auto& w : history.warnings) err << "warning: " << w << "\n";
  save_training(run, ckpt, out);
  run.manifest().history = history;
  run.manifest().warnings = history.warnings;
  run.finish();
  return kExitOk;
}

std::shared_ptr<const FeatureExtractor> optional_extractor(std::vector<std::string>& warnings) {
  try {
    return load_feature_extractor("plugin");
  } catch (const PluginMissing& e) {
    warnings.push_back(std::string("lpips skipped: ") + e.what());
    return nullptr;
  }
}

// Separation baseline rows, only when a codec hook is configured.
void append_codec_rows(ResultTable& table, const ExperimentConfig& cfg, std::span<const Image> images,
                       const fs::path& work, std::vector<std::string>& warnings) {
  if (std::getenv(kCodecHookEnv) == nullptr) return;
  static const std::vector<int> qualities{22, 27, 32, 37, 42, 47};
  const SessionGeometry& g = cfg.model.geometry;
  const double budget = static_cast<double>(g.blocks) * g.symbols;
  try {
    for (double snr : eval_snrs(cfg)) {
      std::vector<double> values;
      int misses = 0;
      for (std::size_t i = 0; i < images.size(); ++i) {
        const auto env = bpg_capacity_bound(images[i], snr, qualities, work / ("codec_" + std::to_string(i)));
        const double p = psnr_within_budget(env, budget);
        if (std::isfinite(p)) values.push_back(p); else ++misses;
      }
      if (misses > 0) {
        warnings.push_back("codec: " + std::to_string(misses) + " images exceed the budget at " + short_num(snr) +
                           " dB");
      }
      if (values.empty()) continue;
      const auto [mean, sd] = mean_std(values);
      ResultRow row;
      row.snr_db = snr;
      row.ratio = g.bandwidth_ratio();
      row.blocks = g.blocks;
      row.mode = "bpg-capacity";
      row.psnr_mean = mean;
      row.psnr_std = sd;
      table.append(row);
    }
  } catch (const HookMissing& e) {
    warnings.push_back(std::string("codec baseline skipped: ") + e.what());
  }
}

int cmd_eval(const Options& opt, const std::string& command, std::ostream& out, std::ostream& err) {
  const Checkpoint ckpt = load_model_checkpoint(opt, ModelKind::PointToPoint);
  const ExperimentConfig cfg = eval_config(opt, ckpt);
  if (cfg.eval.repeats < 1) throw ConfigError("eval.repeats: must be at least 1");
  const auto images = test_images(cfg);
  JsccfModel model(cfg.model);
  restore_params(model.params(), ckpt);
  Run run(opt.out, command, cfg);
  std::vector<std::string>& warnings = run.manifest().warnings;
  const auto extractor = optional_extractor(warnings);

  const SessionGeometry& g = cfg.model.geometry;
  ResultTable table;
  for (double snr : eval_snrs(cfg)) {
    for (const auto& fb : cfg.eval.snr_fb_db) {
      const ChannelConfig ch = channel_at(cfg, snr, fb);
      std::vector<double> repeat_psnr;
      std::vector<double> lp;
      for (int r = 0; r < cfg.eval.repeats; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < images.size(); ++i) {
          const SessionConfig sc{ch, repeat_seed(cfg.seed, r), i};
          const TransmissionTrace t = run_session(images[i], model, sc);
          sum += t.psnr;
          if (extractor) lp.push_back(lpips(images[i], t.reconstruction, extractor.get()));
        }
        repeat_psnr.push_back(sum / static_cast<double>(images.size()));
      }
      const auto [mean, sd] = mean_std(repeat_psnr);
      ResultRow row;
      row.snr_db = snr;
      row.snr_fb_db = fb;
      row.ratio = g.bandwidth_ratio();
      row.blocks = g.blocks;
      row.mode = to_string(cfg.model.mode);
      row.psnr_mean = mean;
      row.psnr_std = sd;
      if (!lp.empty()) row.lpips_mean = mean_std(lp).first;
      out << "snr " << snr << "  fb " << (fb ? short_num(*fb) : "perfect") << "  psnr " << mean << "\n";
      table.append(row);
    }
  }
  append_codec_rows(table, cfg, images, run.dir() / "codec_work", warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  run.write("results.csv", table.to_csv());
  run.finish();
  return kExitOk;
}

int cmd_varrate(const Options& opt, const std::string& command, std::ostream& out, std::ostream&) {
  const Checkpoint ckpt = load_model_checkpoint(opt, ModelKind::PointToPoint);
  const ExperimentConfig cfg = eval_config(opt, ckpt);
  if (cfg.varrate.targets.empty()) throw ConfigError("varrate.targets: at least one target PSNR is required");
  if (cfg.eval.repeats < 1) throw ConfigError("eval.repeats: must be at least 1");
  if (cfg.channel.feedback != FeedbackKind::Perfect) {
    throw ConfigError("channel.feedback: variable-rate transmission needs perfect feedback");
  }
  const auto images = test_images(cfg);
  JsccfModel model(cfg.model);
  restore_params(model.params(), ckpt);
  Run run(opt.out, command, cfg);

  const SessionGeometry& g = cfg.model.geometry;
  ResultTable table;
  for (double snr : eval_snrs(cfg)) {
    const ChannelConfig ch = channel_at(cfg, snr, std::nullopt);
    for (double target : cfg.varrate.targets) {
      std::vector<double> repeat_psnr;
      double blocks = 0.0;
      for (int r = 0; r < cfg.eval.repeats; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < images.size(); ++i) {
          const SessionConfig sc{ch, repeat_seed(cfg.seed, r), i};
          const TransmissionTrace t = run_variable_rate(images[i], model, sc, target);
          sum += t.psnr;
          blocks += t.blocks_used;
        }
        repeat_psnr.push_back(sum / static_cast<double>(images.size()));
      }
      blocks /= static_cast<double>(images.size()) * cfg.eval.repeats;
      const auto [mean, sd] = mean_std(repeat_psnr);
      ResultRow row;
      row.snr_db = snr;
      row.ratio = blocks * g.symbols / g.source_dim();
      row.blocks = g.blocks;
      row.mode = to_string(cfg.model.mode);
      row.psnr_mean = mean;
      row.psnr_std = sd;
      row.blocks_used_mean = blocks;
      row.target_psnr = target;
      out << "snr " << snr << "  target " << target << "  blocks " << blocks << "  psnr " << mean << "\n";
      table.append(row);
    }
  }
  run.write("results.csv", table.to_csv());
  run.finish();
  return kExitOk;
}

struct BroadcastScore {
  double psnr[2] = {0.0, 0.0};
  double sd[2] = {0.0, 0.0};
};

BroadcastScore evaluate_broadcast(const BroadcastModel& model, std::span<const Image> images,
                                  const ExperimentConfig& cfg, double lambda) {
  const std::size_t half = images.size() / 2;
  if (half == 0) throw ConfigError("test_data.path: broadcast evaluation needs at least two images");
  std::vector<double> per[2];
  for (int r = 0; r < cfg.eval.repeats; ++r) {
    double sum[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < half; ++i) {
      BroadcastConfig bc = cfg.broadcast;
      bc.lambda = lambda;
      bc.seed = repeat_seed(cfg.seed, r);
      bc.image_id = i;
      const auto [t1, t2] = run_broadcast_session(images[i], images[i + half], model, bc);
      sum[0] += t1.psnr;
      sum[1] += t2.psnr;
    }
    for (int u = 0; u < 2; ++u) per[u].push_back(sum[u] / static_cast<double>(half));
  }
  BroadcastScore s;
  for (int u = 0; u < 2; ++u) std::tie(s.psnr[u], s.sd[u]) = mean_std(per[u]);
  return s;
}

void append_broadcast_rows(ResultTable& table, std::string& csv, const ExperimentConfig& cfg, double lambda,
                           const BroadcastScore& s) {
  const SessionGeometry& g = cfg.model.geometry;
  const double snr[2] = {cfg.broadcast.snr1_db, cfg.broadcast.snr2_db};
  for (int u = 0; u < 2; ++u) {
    ResultRow row;
    row.snr_db = snr[u];
    row.ratio = g.bandwidth_ratio();
    row.blocks = g.blocks;
    row.mode = "broadcast-rx" + std::to_string(u + 1);
    row.psnr_mean = s.psnr[u];
    row.psnr_std = s.sd[u];
    table.append(row);
  }
  csv += num(lambda) + "," + num(snr[0]) + "," + num(snr[1]) + "," + num(s.psnr[0]) + "," + num(s.psnr[1]) + "\n";
}

// With --checkpoint: evaluates that model. Otherwise trains one model per
// broadcast lambda and evaluates each.
int cmd_broadcast(const Options& opt, const std::string& command, std::ostream& out, std::ostream& err) {
  ResultTable table;
  std::string csv = "lambda,snr1_db,snr2_db,psnr1,psnr2\n";
  if (!opt.checkpoint.empty()) {
    const Checkpoint ckpt = load_model_checkpoint(opt, ModelKind::Broadcast);
    const ExperimentConfig cfg = eval_config(opt, ckpt);
    if (cfg.eval.repeats < 1) throw ConfigError("eval.repeats: must be at least 1");
    const auto images = test_images(cfg);
    BroadcastModel model(cfg.model);
    restore_params(model.params(), ckpt);
    Run run(opt.out, command, cfg);
    const double lambda = ckpt.config.broadcast.lambda;
    const BroadcastScore s = evaluate_broadcast(model, images, cfg, lambda);
    out << "lambda " << lambda << "  psnr " << s.psnr[0] << " / " << s.psnr[1] << "\n";
    append_broadcast_rows(table, csv, cfg, lambda, s);
    run.write("results.csv", table.to_csv());
    run.write("broadcast.csv", csv);
    run.finish();
    return kExitOk;
  }

  if (opt.config.empty()) throw ConfigError("--config: a config file or --checkpoint is required");
  ExperimentConfig cfg = load_config(opt.config);
  apply_seed(cfg, opt);
  if (cfg.eval.repeats < 1) throw ConfigError("eval.repeats: must be at least 1");
  const auto train_set = train_images(cfg);
  const auto test_set = test_images(cfg);
  Run run(opt.out, command, cfg);
  const std::vector<double> lambdas =
      cfg.broadcast_lambdas.empty() ? std::vector<double>{cfg.broadcast.lambda} : cfg.broadcast_lambdas;
  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    ExperimentConfig lc = cfg;
    lc.broadcast.lambda = lambdas[li];
    lc.loss.kind = LossKind::Broadcast;
    lc.loss.lambda_broadcast = lambdas[li];
    lc.broadcast_lambdas.clear();
    BroadcastModel model(lc.model);
    BroadcastConfig bc = lc.broadcast;
    bc.seed = lc.seed;
    const TrainHistory h = train_broadcast(model, train_set, bc, lc.train);
    for (const auto& w : h.warnings) err << "warning: " << w << "\n";
    run.write("checkpoint_lambda" + std::to_string(li) + ".bin",
              serialize_checkpoint(make_checkpoint(model.params(), ModelKind::Broadcast, lc, h)));
    const BroadcastScore s = evaluate_broadcast(model, test_set, lc, lambdas[li]);
    out << "lambda " << lambdas[li] << "  psnr " << s.psnr[0] << " / " << s.psnr[1] << "\n";
    append_broadcast_rows(table, csv, lc, lambdas[li], s);
  }
  run.write("results.csv", table.to_csv());
  run.write("broadcast.csv", csv);
  run.finish();
  return kExitOk;
}

std::string stats_row(const std::string& label, FeedbackMode mode, const SessionGeometry& g, const ModelStats& s) {
  return label + "," + to_string(mode) + "," + std::to_string(g.blocks) + "," + num(g.bandwidth_ratio()) + "," +
         std::to_string(s.params()) + "," + std::to_string(s.encoder_params) + "," +
         std::to_string(s.decoder_params) + "," + std::to_string(s.encoder_macs) + "," +
         std::to_string(s.decoder_macs) + "," + std::to_string(s.session_macs) + "\n";
}

// Closed-form sizes of the configured model, then the same spec over a range
// of block counts at its bandwidth ratio.
int cmd_stats(const Options& opt, const std::string& command, std::ostream& out, std::ostream&) {
  ExperimentConfig cfg;
  std::optional<std::uint64_t> stored;
  if (!opt.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
    cfg = ckpt.config;
    std::uint64_t n = 0;
    for (const auto& a : ckpt.arrays) n += static_cast<std::uint64_t>(a.value.size());
    stored = n;
  } else if (!opt.config.empty()) {
    cfg = load_config(opt.config);
  } else {
    throw ConfigError("--config: a config file or --checkpoint is required");
  }
  apply_seed(cfg, opt);
  const ModelConfig& mc = cfg.model;
  const ModelStats s = model_stats(mc.spec, mc.geometry, mc.mode);
  out << "mode " << to_string(mc.mode) << "  m " << mc.geometry.blocks << "  k " << mc.geometry.symbols << "\n"
      << "params " << s.params() << " (encoder " << s.encoder_params << ", decoder " << s.decoder_params << ")\n"
      << "macs per session " << s.session_macs << " (encoder pass " << s.encoder_macs << ", decoder pass "
      << s.decoder_macs << ")\n";
  if (stored) out << "checkpoint params " << *stored << "\n";

  std::string csv =
      "config,mode,blocks,ratio,params,encoder_params,decoder_params,encoder_macs,decoder_macs,session_macs\n";
  csv += stats_row("configured", mc.mode, mc.geometry, s);
  const SessionGeometry& g = mc.geometry;
  const double ratio = g.bandwidth_ratio();
  for (FeedbackMode mode : {FeedbackMode::Lite, FeedbackMode::Full}) {
    for (int m : {1, 2, 3, 4, 6, 8, 12}) {
      SessionGeometry gm;
      try {
        gm = SessionGeometry::from_ratio(g.height, g.width, g.grid, m, ratio);
        gm.validate();
      } catch (const Error&) {
        continue;
      }
      csv += stats_row("sweep", mode, gm, model_stats(mc.spec, gm, mode));
    }
  }
  if (!opt.out.empty()) {
    Run run(opt.out, command, cfg);
    run.write("stats.csv", csv);
    run.finish();
  }
  return kExitOk;
}

struct RegionCurve {
  std::string name;
  std::vector<RateRegionPoint> points;
};

std::string region_csv(const RateRegion& region) {
  std::string csv = "curve,alpha,r1,r2\n";
  for (const auto& p : region.curve_a) csv += "a," + num(p.alpha) + "," + num(p.r1) + "," + num(p.r2) + "\n";
  for (const auto& p : region.curve_b) csv += "b," + num(p.alpha) + "," + num(p.r1) + "," + num(p.r2) + "\n";
  for (const auto& p : region.boundary) csv += "boundary,," + num(p.r1) + "," + num(p.r2) + "\n";
  for (const auto& p : region.hull) csv += "hull,," + num(p.r1) + "," + num(p.r2) + "\n";
  return csv;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw FormatError("bad number: " + cell);
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad number: " + cell);
  }
}

Plot region_plot(const std::vector<RegionCurve>& curves) {
  Plot p;
  p.title = "broadcast rate region";
  p.x_label = "R1 (bits/use)";
  p.y_label = "R2 (bits/use)";
  for (const auto& c : curves) {
    PlotSeries s;
    s.label = c.name;
    for (const auto& q : c.points) s.points.emplace_back(q.r1, q.r2);
    s.markers = c.name != "hull";
    s.closed = c.name == "hull";
    p.series.push_back(std::move(s));
  }
  return p;
}

std::vector<RegionCurve> read_region_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "curve,alpha,r1,r2") throw FormatError("region csv: bad header");
  std::vector<RegionCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw FormatError("region csv: expected 4 cells in '" + line + "'");
    auto it = std::find_if(curves.begin(), curves.end(), [&](const RegionCurve& c) { return c.name == cells[0]; });
    if (it == curves.end()) it = curves.insert(curves.end(), RegionCurve{cells[0], {}});
    RateRegionPoint p;
    p.alpha = cells[1].empty() ? std::nan("") : parse_cell(cells[1]);
    p.r1 = parse_cell(cells[2]);
    p.r2 = parse_cell(cells[3]);
    it->points.push_back(p);
  }
  return curves;
}

std::vector<RegionCurve> region_curves(const RateRegion& r) {
  std::vector<RegionCurve> curves{{"a", r.curve_a}, {"b", r.curve_b}, {"boundary", {}}, {"hull", {}}};
  for (const auto& p : r.boundary) curves[2].points.push_back({0.0, p.r1, p.r2});
  for (const auto& p : r.hull) curves[3].points.push_back({0.0, p.r1, p.r2});
  return curves;
}

// Feedback capacity region bounds of the two-user Gaussian broadcast channel
// at the configured broadcast SNRs (or --snr1/--snr2).
int cmd_region(const Options& opt, const std::string& command, std::ostream& out, std::ostream&) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
  apply_seed(cfg, opt);
  const double power = opt.power.value_or(cfg.broadcast.power);
  const double snr1 = opt.snr1.value_or(cfg.broadcast.snr1_db);
  const double snr2 = opt.snr2.value_or(cfg.broadcast.snr2_db);
  if (opt.points < 2) throw ConfigError("--points: at least 2 alphas are required");
  const double s1 = power * std::pow(10.0, -snr1 / 10.0);
  const double s2 = power * std::pow(10.0, -snr2 / 10.0);
  const auto alphas = alpha_grid(opt.points);
  const RateRegion region = broadcast_feedback_region(power, s1, s2, alphas);
  Run run(opt.out, command, cfg);
  run.write("region.csv", region_csv(region));
  run.plot("region_plot", region_plot(region_curves(region)));
  out << "boundary points " << region.boundary.size() << "  hull vertices " << region.hull.size() << "\n";
  run.finish();
  return kExitOk;
}

// Series keyed by the columns that are not on the x axis.
Plot results_plot(const ResultTable& table, const std::string& kind) {
  Plot p;
  p.y_label = "PSNR (dB)";
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> groups;
  for (const auto& r : table.rows()) {
    const std::string fb = r.snr_fb_db ? " fb " + short_num(*r.snr_fb_db) : "";
    std::string key;
    double x = 0.0;
    if (kind == "snr") {
      if (r.target_psnr) continue;
      key = r.mode + " m=" + std::to_string(r.blocks) + " R=" + short_num(r.ratio) + fb;
      x = r.snr_db;
    } else if (kind == "ratio") {
      if (r.target_psnr) continue;
      key = r.mode + " m=" + std::to_string(r.blocks) + " " + short_num(r.snr_db) + "dB" + fb;
      x = r.ratio;
    } else if (kind == "blocks") {
      if (r.target_psnr) continue;
      key = r.mode + " R=" + short_num(r.ratio) + " " + short_num(r.snr_db) + "dB" + fb;
      x = r.blocks;
    } else {
      if (!r.target_psnr || !r.blocks_used_mean) continue;
      key = r.mode + " " + short_num(r.snr_db) + "dB";
      x = *r.blocks_used_mean;
    }
    if (!groups.count(key)) order.push_back(key);
    groups[key].emplace_back(x, r.psnr_mean);
  }
  if (kind == "snr") p.x_label = "SNR (dB)";
  if (kind == "ratio") p.x_label = "bandwidth ratio R";
  if (kind == "blocks") p.x_label = "blocks m";
  if (kind == "varrate") p.x_label = "mean blocks used";
  p.title = "PSNR vs " + p.x_label;
  for (const auto& key : order) {
    auto pts = groups[key];
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    p.series.push_back({key, pts});
  }
  return p;
}

int cmd_plot(const Options& opt, const std::string& command, std::ostream& out, std::ostream&) {
  if (opt.input.empty()) throw ConfigError("--input: a results or region CSV is required");
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : load_config(opt.config);
  apply_seed(cfg, opt);
  const std::string text = read_file(opt.input);
  Plot plot;
  if (opt.kind == "region") {
    const auto curves = read_region_csv(text);
    if (curves.empty()) throw DomainError("plot: region table is empty");
    plot = region_plot(curves);
  } else {
    std::istringstream in(text);
    const ResultTable table = ResultTable::read_csv(in);
    if (table.empty()) throw DomainError("plot: result table is empty");
    plot = results_plot(table, opt.kind);
    if (plot.series.empty()) throw DomainError("plot: no rows for kind " + opt.kind);
  }
  Run run(opt.out, command, cfg);
  run.plot("plot_" + opt.kind, plot);
  std::size_t points = 0;
  for (const auto& s : plot.series) points += s.points.size();
  out << plot.series.size() << " series, " << points << " points\n";
  run.finish();
  return kExitOk;
}

std::string join(const std::vector<std::string>& args) {
  std::string s = "jsccf";
  for (const auto& a : args) s += " " + a;
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformer image transmission over feedback channels"};
  app.require_subcommand(1);
  Options opt;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment JSON");
    sub->add_option("--seed", opt.seed, "overrides every seed in the config");
    sub->add_option("--out", opt.out, "output directory");
  };
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  add_common(train_cmd);
  auto* eval_cmd = app.add_subcommand("eval", "PSNR over the test set per (snr, feedback snr)");
  auto* var_cmd = app.add_subcommand("varrate", "variable-rate transmission per target PSNR");
  auto* bc_cmd = app.add_subcommand("broadcast", "train and evaluate broadcast models");
  auto* stats_cmd = app.add_subcommand("stats", "closed-form parameter and MAC counts");
  for (auto* sub : {eval_cmd, var_cmd, bc_cmd, stats_cmd}) {
    add_common(sub);
    sub->add_option("--checkpoint", opt.checkpoint, "trained model");
  }
  auto* plot_cmd = app.add_subcommand("plot", "PNG plot plus data CSV from a results or region CSV");
  add_common(plot_cmd);
  plot_cmd->add_option("--input", opt.input, "results.csv or region.csv")->required();
  plot_cmd->add_option("--kind", opt.kind, "snr, ratio, blocks, varrate or region")
      ->check(CLI::IsMember({"snr", "ratio", "blocks", "varrate", "region"}));
  auto* region_cmd = app.add_subcommand("region", "broadcast feedback rate region bounds");
  add_common(region_cmd);
  region_cmd->add_option("--power", opt.power, "transmit power");
  region_cmd->add_option("--snr1", opt.snr1, "receiver 1 SNR in dB");
  region_cmd->add_option("--snr2", opt.snr2, "receiver 2 SNR in dB");
  region_cmd->add_option("--points", opt.points, "alpha grid size");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = join(args);
  try {
    if (*train_cmd) return cmd_train(opt, command, out, err);
    if (*eval_cmd) return cmd_eval(opt, command, out, err);
    if (*var_cmd) return cmd_varrate(opt, command, out, err);
    if (*bc_cmd) return cmd_broadcast(opt, command, out, err);
    if (*stats_cmd) return cmd_stats(opt, command, out, err);
    if (*plot_cmd) return cmd_plot(opt, command, out, err);
    if (*region_cmd) return cmd_region(opt, command, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace jsccf::cli
