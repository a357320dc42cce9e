#pragma once

#include "jsccf/metrics.hpp"
#include "jsccf/model.hpp"
#include "jsccf/protocol.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace jsccf {

enum class LossKind { Mse, MsePlusLpips, IntermediateSum, Broadcast };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::Mse;
  double lambda_lpips = 0.1;
  double lambda_broadcast = 0.5;
  // Feature network for MsePlusLpips: "identity" or "plugin".
  std::string extractor = "plugin";

  void validate() const;
};

// ||S - S_hat||^2 summed over one image's tokens.
nn::Var loss_mse(const nn::Var& source, const nn::Var& estimate);
// loss_mse + lambda * LPIPS, on l x c tokens of an h x w image.
nn::Var loss_lpips_augmented(const nn::Var& source, const nn::Var& estimate, const SessionGeometry& geometry,
                             const FeatureExtractor& extractor, double lambda);
// sum_i ||S - S_hat_i||^2.
nn::Var loss_intermediate_sum(const nn::Var& source, std::span<const nn::Var> beliefs);
// lambda * ||S1 - S1_hat||^2 + (1 - lambda) * ||S2 - S2_hat||^2.
nn::Var loss_broadcast(const nn::Var& s1, const nn::Var& s1_hat, const nn::Var& s2, const nn::Var& s2_hat,
                       double lambda);

struct SnrStrategy {
  enum class Kind { Fixed, Uniform };
  Kind kind = Kind::Fixed;
  double snr_db = 10.0;  // fixed
  double lo = -2.0;      // uniform
  double hi = 15.0;

  static SnrStrategy fixed(double snr_db) { return {Kind::Fixed, snr_db, -2.0, 15.0}; }
  static SnrStrategy uniform(double lo, double hi) { return {Kind::Uniform, 0.0, lo, hi}; }
  // SNR used for validation: the fixed value, or the midpoint of the range.
  double nominal() const { return kind == Kind::Fixed ? snr_db : 0.5 * (lo + hi); }
  void validate() const;
};

double sample_training_snr(const SnrStrategy& strategy, Rng& rng);

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(nn::ParamStore& params, AdamConfig config);

  // One update from the gradients currently stored on the parameters.
  void step();
  long steps() const { return t_; }

 private:
  nn::ParamStore& params_;
  AdamConfig config_;
  std::vector<nn::Matrix> m_;
  std::vector<nn::Matrix> v_;
  long t_ = 0;
};

struct TrainConfig {
  double lr = 5e-5;
  int batch = 128;
  SnrStrategy snr = SnrStrategy::fixed(10.0);
  int patience = 10;  // epochs without validation improvement
  double val_fraction = 0.1;
  long max_steps = 0;   // 0 = until early stopping
  int max_epochs = 0;   // 0 = unbounded
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  long step = 0;
  double train_loss = 0.0;  // mean per-image loss over the epoch
  double val_psnr = 0.0;    // NaN without a validation split
};

struct TrainHistory {
  std::vector<double> step_loss;
  std::vector<EpochRecord> epochs;
  double best_val_psnr = 0.0;
  int best_epoch = 0;
  long steps = 0;
  bool early_stopped = false;
  std::vector<std::string> warnings;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Deterministic shuffle of 0..count-1 into (train, validation) index sets.
struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
DataSplit split_dataset(std::size_t count, double val_fraction, std::uint64_t seed);

// Per-step callbacks of the generic loop.
struct TrainHooks {
  // Loss of one image inside a step; gradients are taken from it.
  std::function<nn::Var(std::size_t image, double snr_db, std::uint64_t step_seed)> image_loss;
  // Validation quality (higher is better) over the given images.
  std::function<double(std::span<const std::size_t> images)> validate;
};

// Adam over `params`, batch by batch, an SNR drawn per step, early stopping
// on validation quality, best parameters restored at the end. Throws
// DivergenceError on a non-finite loss.
TrainHistory train_loop(nn::ParamStore& params, std::size_t dataset_size, const TrainConfig& cfg,
                        const TrainHooks& hooks, const EpochCallback& on_epoch = {});

// Mean PSNR of run_session over `images` at channel `channel`.
double evaluate_psnr(const JsccfModel& model, std::span<const Image> images, const ChannelConfig& channel,
                     std::uint64_t seed);

TrainHistory train(JsccfModel& model, std::span<const Image> dataset, const ChannelConfig& channel,
                   const TrainConfig& cfg, const LossSpec& loss, const EpochCallback& on_epoch = {});

// Image pairs (i, i + half) of the dataset feed the two receivers.
TrainHistory train_broadcast(BroadcastModel& model, std::span<const Image> dataset, const BroadcastConfig& bcfg,
                             const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace jsccf
