#include "jsccf/training.hpp"

#include "jsccf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jsccf {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "mse_plus_lpips") return LossKind::MsePlusLpips;
  if (name == "intermediate_sum") return LossKind::IntermediateSum;
  if (name == "broadcast") return LossKind::Broadcast;
  throw ConfigError("unknown loss '" + name + "'");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Mse: return "mse";
    case LossKind::MsePlusLpips: return "mse_plus_lpips";
    case LossKind::IntermediateSum: return "intermediate_sum";
    case LossKind::Broadcast: return "broadcast";
  }
  return "?";
}

void LossSpec::validate() const {
  if (!(lambda_lpips >= 0.0) || !std::isfinite(lambda_lpips)) throw ConfigError("loss: lambda_lpips must be >= 0");
  if (!(lambda_broadcast >= 0.0 && lambda_broadcast <= 1.0)) {
    throw ConfigError("loss: lambda_broadcast must lie in [0,1]");
  }
}

nn::Var loss_mse(const nn::Var& source, const nn::Var& estimate) {
  if (source.rows() != estimate.rows() || source.cols() != estimate.cols()) {
    throw ShapeError("loss: source and estimate shapes differ");
  }
  return nn::sum_squares(nn::sub(estimate, source));
}

nn::Var loss_lpips_augmented(const nn::Var& source, const nn::Var& estimate, const SessionGeometry& geometry,
                             const FeatureExtractor& extractor, double lambda) {
  nn::Var loss = loss_mse(source, estimate);
  if (lambda == 0.0) return loss;
  const nn::Var a = tokens_to_pixels(source, geometry.grid, geometry.height, geometry.width);
  const nn::Var b = tokens_to_pixels(estimate, geometry.grid, geometry.height, geometry.width);
  return loss + nn::scale(lpips_graph(a, b, geometry.height, geometry.width, extractor), lambda);
}

nn::Var loss_intermediate_sum(const nn::Var& source, std::span<const nn::Var> beliefs) {
  if (beliefs.empty()) throw ConfigError("loss: intermediate sum needs at least one reconstruction");
  nn::Var total = loss_mse(source, beliefs.front());
  for (std::size_t i = 1; i < beliefs.size(); ++i) total = total + loss_mse(source, beliefs[i]);
  return total;
}

nn::Var loss_broadcast(const nn::Var& s1, const nn::Var& s1_hat, const nn::Var& s2, const nn::Var& s2_hat,
                       double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("loss: broadcast lambda must lie in [0,1]");
  return nn::scale(loss_mse(s1, s1_hat), lambda) + nn::scale(loss_mse(s2, s2_hat), 1.0 - lambda);
}

void SnrStrategy::validate() const {
  if (kind == Kind::Fixed && !std::isfinite(snr_db)) throw ConfigError("snr: fixed value must be finite");
  if (kind == Kind::Uniform && !(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) {
    throw ConfigError("snr: uniform range needs finite lo <= hi");
  }
}

double sample_training_snr(const SnrStrategy& strategy, Rng& rng) {
  if (strategy.kind == SnrStrategy::Kind::Fixed) return strategy.snr_db;
  if (strategy.lo == strategy.hi) return strategy.lo;
  return std::uniform_real_distribution<double>(strategy.lo, strategy.hi)(rng);
}

Adam::Adam(nn::ParamStore& params, AdamConfig config) : params_(params), config_(config) {
  for (const auto& [name, p] : params_.entries()) {
    m_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  auto& entries = params_.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    nn::Var p = entries[i].second;
    if (!p.has_grad()) continue;
    const nn::Matrix& g = p.node().grad;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
    p.mutable_value().array() -=
        config_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (batch < 1) throw ConfigError("train: batch must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("train: val_fraction must lie in [0,1)");
  if (max_steps < 0 || max_epochs < 0) throw ConfigError("train: step and epoch limits must be >= 0");
  snr.validate();
}

DataSplit split_dataset(std::size_t count, double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(splitmix64(seed ^ 0x73706c6974ULL));
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(count)));
  if (val_fraction > 0.0 && n_val == 0 && count >= 2) n_val = 1;
  DataSplit split;
  split.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  split.validation.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

TrainHistory train_loop(nn::ParamStore& params, std::size_t dataset_size, const TrainConfig& cfg,
                        const TrainHooks& hooks, const EpochCallback& on_epoch) {
  cfg.validate();
  const DataSplit split = split_dataset(dataset_size, cfg.val_fraction, cfg.seed);
  if (split.train.empty()) throw ConfigError("train: no training images");
  const bool have_val = !split.validation.empty() && hooks.validate;
  if (!have_val && cfg.max_steps == 0 && cfg.max_epochs == 0) {
    throw ConfigError("train: without a validation split, max_steps or max_epochs must be set");
  }

  Adam adam(params, AdamConfig{cfg.lr});
  Rng order_rng(splitmix64(cfg.seed ^ 0x6f72646572ULL));
  Rng snr_rng(splitmix64(cfg.seed ^ 0x736e72ULL));
  std::vector<std::size_t> order = split.train;

  TrainHistory history;
  history.best_val_psnr = -std::numeric_limits<double>::infinity();
  std::vector<nn::Matrix> best;
  int stale = 0;
  long step = 0;
  bool done = false;

  for (int epoch = 1; !done; ++epoch) {
    if (cfg.max_epochs > 0 && epoch > cfg.max_epochs) break;
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_images = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      if (cfg.max_steps > 0 && step >= cfg.max_steps) {
        done = true;
        break;
      }
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const double snr = sample_training_snr(cfg.snr, snr_rng);
      const std::uint64_t step_seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(step) + 1);
      const double weight = 1.0 / static_cast<double>(end - start);
      params.zero_grad();
      double total = 0.0;
      for (std::size_t j = start; j < end; ++j) {
        const nn::Var loss = hooks.image_loss(order[j], snr, step_seed);
        const double value = loss.scalar();
        if (!std::isfinite(value)) {
          throw DivergenceError("non-finite loss at step " + std::to_string(step) + " (image " +
                                std::to_string(order[j]) + ", snr " + std::to_string(snr) + " dB)");
        }
        nn::scale(loss, weight).backward();
        total += value;
      }
      adam.step();
      ++step;
      history.step_loss.push_back(total * weight);
      epoch_loss += total;
      epoch_images += end - start;
    }
    if (epoch_images == 0) break;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.step = step;
    rec.train_loss = epoch_loss / static_cast<double>(epoch_images);
    rec.val_psnr = std::numeric_limits<double>::quiet_NaN();
    if (have_val) {
      rec.val_psnr = hooks.validate(split.validation);
      if (rec.val_psnr > history.best_val_psnr) {
        history.best_val_psnr = rec.val_psnr;
        history.best_epoch = epoch;
        best.clear();
        for (const auto& [name, p] : params.entries()) best.push_back(p.value());
        stale = 0;
      } else if (++stale >= cfg.patience) {
        history.early_stopped = true;
        done = true;
      }
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }

  if (!best.empty()) {
    auto& entries = params.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      nn::Var p = entries[i].second;
      p.mutable_value() = best[i];
    }
  }
  params.zero_grad();
  history.steps = step;
  return history;
}

namespace {

constexpr std::uint64_t kValidationSalt = 0x76616c6964ULL;

double mean_psnr(const JsccfModel& model, std::span<const Image> dataset, std::span<const std::size_t> indices,
                 const ChannelConfig& channel, std::uint64_t seed) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0.0;
  for (std::size_t i : indices) {
    SessionConfig sc{channel, seed, static_cast<std::uint64_t>(i)};
    total += run_session(dataset[i], model, sc).psnr;
  }
  return total / static_cast<double>(indices.size());
}

std::vector<nn::Matrix> tokenize(std::span<const Image> dataset, const SessionGeometry& g) {
  std::vector<nn::Matrix> tokens;
  tokens.reserve(dataset.size());
  for (const auto& image : dataset) {
    if (image.height != g.height || image.width != g.width) {
      throw DimensionError("train: image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                           ", model expects " + std::to_string(g.height) + "x" + std::to_string(g.width));
    }
    tokens.push_back(patchify_matrix(image, PatchSpec{g.grid}));
  }
  return tokens;
}

}  // namespace

double evaluate_psnr(const JsccfModel& model, std::span<const Image> images, const ChannelConfig& channel,
                     std::uint64_t seed) {
  std::vector<std::size_t> all(images.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return mean_psnr(model, images, all, channel, seed);
}

TrainHistory train(JsccfModel& model, std::span<const Image> dataset, const ChannelConfig& channel,
                   const TrainConfig& cfg, const LossSpec& loss, const EpochCallback& on_epoch) {
  loss.validate();
  if (loss.kind == LossKind::Broadcast) throw ConfigError("train: broadcast loss needs a broadcast model");
  channel.validate();
  const SessionGeometry& g = model.geometry();
  const std::vector<nn::Matrix> tokens = tokenize(dataset, g);

  std::vector<std::string> warnings;
  LossKind kind = loss.kind;
  std::shared_ptr<const FeatureExtractor> extractor;
  if (kind == LossKind::MsePlusLpips) {
    try {
      extractor = load_feature_extractor(loss.extractor);
    } catch (const PluginMissing& e) {
      warnings.push_back(std::string("lpips extractor unavailable, training on mse only: ") + e.what());
      kind = LossKind::Mse;
    }
  }

  TrainHooks hooks;
  hooks.image_loss = [&](std::size_t i, double snr, std::uint64_t step_seed) {
    SessionConfig sc{channel, step_seed, static_cast<std::uint64_t>(i)};
    sc.channel.snr_db = snr;
    SessionOptions options;
    options.intermediate_reconstructions = kind == LossKind::IntermediateSum;
    const SessionGraph graph = simulate_session(model, tokens[i], sc, options);
    const nn::Var source = nn::Var::constant(tokens[i]);
    switch (kind) {
      case LossKind::MsePlusLpips:
        return loss_lpips_augmented(source, graph.reconstruction, g, *extractor, loss.lambda_lpips);
      case LossKind::IntermediateSum: return loss_intermediate_sum(source, graph.intermediate);
      default: return loss_mse(source, graph.reconstruction);
    }
  };
  hooks.validate = [&](std::span<const std::size_t> indices) {
    ChannelConfig vc = channel;
    vc.snr_db = cfg.snr.nominal();
    return mean_psnr(model, dataset, indices, vc, splitmix64(cfg.seed ^ kValidationSalt));
  };

  TrainHistory history = train_loop(model.params(), dataset.size(), cfg, hooks, on_epoch);
  history.warnings.insert(history.warnings.begin(), warnings.begin(), warnings.end());
  return history;
}

TrainHistory train_broadcast(BroadcastModel& model, std::span<const Image> dataset, const BroadcastConfig& bcfg,
                             const TrainConfig& cfg, const EpochCallback& on_epoch) {
  bcfg.validate();
  const SessionGeometry& g = model.geometry();
  const std::vector<nn::Matrix> tokens = tokenize(dataset, g);
  const std::size_t n = dataset.size();
  auto partner = [n](std::size_t i) { return (i + n / 2) % n; };

  TrainHooks hooks;
  hooks.image_loss = [&](std::size_t i, double, std::uint64_t step_seed) {
    BroadcastConfig bc = bcfg;
    bc.seed = step_seed;
    bc.image_id = i;
    const std::size_t j = partner(i);
    const BroadcastGraph graph = simulate_broadcast(model, tokens[i], tokens[j], bc);
    return loss_broadcast(nn::Var::constant(tokens[i]), graph.reconstruction[0], nn::Var::constant(tokens[j]),
                          graph.reconstruction[1], bcfg.lambda);
  };
  hooks.validate = [&](std::span<const std::size_t> indices) {
    double total = 0.0;
    for (std::size_t i : indices) {
      BroadcastConfig bc = bcfg;
      bc.seed = splitmix64(cfg.seed ^ kValidationSalt);
      bc.image_id = i;
      const auto [t1, t2] = run_broadcast_session(dataset[i], dataset[partner(i)], model, bc);
      total += bcfg.lambda * t1.psnr + (1.0 - bcfg.lambda) * t2.psnr;
    }
    return total / static_cast<double>(indices.size());
  };
  return train_loop(model.params(), n, cfg, hooks, on_epoch);
}

}  // namespace jsccf
