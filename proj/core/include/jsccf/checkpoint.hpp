#pragma once

#include "jsccf/config.hpp"
#include "jsccf/nn.hpp"
#include "jsccf/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace jsccf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind { PointToPoint, Broadcast };

struct NamedArray {
  std::string name;
  nn::Matrix value;
};

// Layout: 8-byte magic "JSCCFCKP", u32 format version, u64 header length,
// JSON header (config, kind, hash, history, array table), then each array as
// raw little-endian float64 in table order.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelKind kind = ModelKind::PointToPoint;
  ExperimentConfig config;
  std::string config_hash;
  TrainHistory history;
  std::vector<NamedArray> arrays;
};

Checkpoint make_checkpoint(const nn::ParamStore& params, ModelKind kind, const ExperimentConfig& config,
                           const TrainHistory& history);
std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws VersionError on a version mismatch, FormatError on anything else.
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies the arrays into `params`; names and shapes must match exactly.
void restore_params(nn::ParamStore& params, const Checkpoint& ckpt);

std::string history_to_json(const TrainHistory& history, int indent = -1);

}  // namespace jsccf
