#include "jsccf/checkpoint.hpp"

#include "jsccf/errors.hpp"
#include "jsccf/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstring>

namespace jsccf {

static_assert(std::endian::native == std::endian::little, "checkpoint arrays are stored little-endian");

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'J', 'S', 'C', 'C', 'F', 'C', 'K', 'P'};

// NaN and infinities do not survive JSON.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_nullable(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json history_json(const TrainHistory& h) {
  json epochs = json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"step", e.step},
                      {"train_loss", finite_or_null(e.train_loss)},
                      {"val_psnr", finite_or_null(e.val_psnr)}});
  }
  json losses = json::array();
  for (double v : h.step_loss) losses.push_back(finite_or_null(v));
  return {{"step_loss", losses},
          {"epochs", epochs},
          {"best_val_psnr", finite_or_null(h.best_val_psnr)},
          {"best_epoch", h.best_epoch},
          {"steps", h.steps},
          {"early_stopped", h.early_stopped},
          {"warnings", h.warnings}};
}

TrainHistory history_from_json(const json& j) {
  TrainHistory h;
  for (const auto& v : j.at("step_loss")) h.step_loss.push_back(from_nullable(v));
  for (const auto& e : j.at("epochs")) {
    h.epochs.push_back({e.at("epoch").get<int>(), e.at("step").get<long>(), from_nullable(e.at("train_loss")),
                        from_nullable(e.at("val_psnr"))});
  }
  h.best_val_psnr = from_nullable(j.at("best_val_psnr"));
  h.best_epoch = j.at("best_epoch").get<int>();
  h.steps = j.at("steps").get<long>();
  h.early_stopped = j.at("early_stopped").get<bool>();
  h.warnings = j.at("warnings").get<std::vector<std::string>>();
  return h;
}

template <typename T>
void append_raw(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw FormatError("checkpoint: truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string history_to_json(const TrainHistory& history, int indent) { return history_json(history).dump(indent); }

Checkpoint make_checkpoint(const nn::ParamStore& params, ModelKind kind, const ExperimentConfig& config,
                           const TrainHistory& history) {
  Checkpoint c;
  c.kind = kind;
  c.config = config;
  c.config_hash = config_hash(config);
  c.history = history;
  for (const auto& [name, v] : params.entries()) c.arrays.push_back({name, v.value()});
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json table = json::array();
  for (const auto& a : ckpt.arrays) table.push_back({{"name", a.name}, {"rows", a.value.rows()}, {"cols", a.value.cols()}});
  json header{{"kind", ckpt.kind == ModelKind::Broadcast ? "broadcast" : "point_to_point"},
              {"config", json::parse(config_to_json(ckpt.config, -1))},
              {"config_hash", ckpt.config_hash},
              {"history", history_json(ckpt.history)},
              {"arrays", table}};
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  append_raw<std::uint32_t>(out, ckpt.version);
  append_raw<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& a : ckpt.arrays) {
    out.append(reinterpret_cast<const char*>(a.value.data()), static_cast<std::size_t>(a.value.size()) * sizeof(double));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  std::size_t pos = sizeof kMagic;
  Checkpoint c;
  c.version = read_raw<std::uint32_t>(bytes, pos);
  if (c.version != kCheckpointVersion) {
    throw VersionError("checkpoint: format version " + std::to_string(c.version) + ", this build reads " +
                       std::to_string(kCheckpointVersion));
  }
  const auto header_len = read_raw<std::uint64_t>(bytes, pos);
  if (header_len > bytes.size() - pos) throw FormatError("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(pos, header_len));
    pos += header_len;
    c.kind = header.at("kind").get<std::string>() == "broadcast" ? ModelKind::Broadcast : ModelKind::PointToPoint;
    c.config = parse_config(header.at("config").dump());
    c.config_hash = header.at("config_hash").get<std::string>();
    c.history = history_from_json(header.at("history"));
    for (const auto& entry : header.at("arrays")) {
      NamedArray a;
      a.name = entry.at("name").get<std::string>();
      a.value.resize(entry.at("rows").get<Eigen::Index>(), entry.at("cols").get<Eigen::Index>());
      const std::size_t n = static_cast<std::size_t>(a.value.size()) * sizeof(double);
      if (n > bytes.size() - pos) throw FormatError("checkpoint: truncated array '" + a.name + "'");
      std::memcpy(a.value.data(), bytes.data() + pos, n);
      pos += n;
      c.arrays.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: embedded config rejected: ") + e.what());
  }
  if (pos != bytes.size()) throw FormatError("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  atomic_write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

void restore_params(nn::ParamStore& params, const Checkpoint& ckpt) {
  const auto& entries = params.entries();
  if (entries.size() != ckpt.arrays.size()) {
    throw FormatError("checkpoint: " + std::to_string(ckpt.arrays.size()) + " arrays, model has " +
                      std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& a = ckpt.arrays[i];
    nn::Var p = entries[i].second;
    if (a.name != entries[i].first || a.value.rows() != p.rows() || a.value.cols() != p.cols()) {
      throw FormatError("checkpoint: array '" + a.name + "' does not match parameter '" + entries[i].first + "'");
    }
    p.mutable_value() = a.value;
  }
}

}  // namespace jsccf
