#pragma once

#include "jsccf/imaging.hpp"
#include "jsccf/model.hpp"
#include "jsccf/protocol.hpp"
#include "jsccf/training.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jsccf {

inline constexpr int kConfigSchemaVersion = 1;

struct EvalConfig {
  std::vector<double> snr_db;
  // Feedback-link SNRs; nullopt is the perfect link.
  std::vector<std::optional<double>> snr_fb_db{std::nullopt};
  int repeats = 1;
};

struct VarRateConfig {
  std::vector<double> targets;
};

// One experiment description. Every section is optional and defaulted;
// unknown keys are rejected.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 0;
  ModelConfig model;
  ChannelConfig channel;
  TrainConfig train;
  LossSpec loss;
  std::optional<DatasetSource> train_data;
  std::optional<DatasetSource> test_data;
  int train_limit = 0;  // 0 = all images
  int test_limit = 0;
  EvalConfig eval;
  VarRateConfig varrate;
  BroadcastConfig broadcast;
  std::vector<double> broadcast_lambdas;  // empty = just broadcast.lambda
};

// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON with every default filled in.
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);
// SHA-256 of the compact canonical JSON.
std::string config_hash(const ExperimentConfig& cfg);

// Loads a dataset section, naming `key` (e.g. "train_data.path") in the
// ConfigError when the path does not exist.
std::vector<Image> load_dataset_checked(const DatasetSource& source, const std::string& key, int limit);

}  // namespace jsccf
