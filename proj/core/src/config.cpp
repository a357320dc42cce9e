#include "jsccf/config.hpp"

#include "jsccf/errors.hpp"
#include "jsccf/io.hpp"

#include <nlohmann/json.hpp>

#include <set>

namespace jsccf {

using nlohmann::json;

namespace {

// A JSON object plus its dotted path; remembers which keys were read so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }

  template <typename T>
  void get(const std::string& k, T& out) {
    if (!has(k)) return;
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key(k) + ": " + e.what());
    }
  }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  Section child(const std::string& k) {
    seen_.insert(k);
    return Section(j_.at(k), key(k));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown key '" + key(k) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void parse_model(Section s, ExperimentConfig& cfg) {
  auto& spec = cfg.model.spec;
  s.get("layers", spec.layers);
  s.get("heads", spec.heads);
  s.get("width", spec.width);
  s.get("mlp_hidden", spec.mlp_hidden);
  s.get("siamese", spec.siamese);
  s.get("init_std", spec.init_std);
  s.get("init_seed", cfg.model.init_seed);
  std::string name;
  if (s.has("pos_embed")) {
    s.get("pos_embed", name);
    spec.pos_embed = keyed(s.key("pos_embed"), [&] { return nn::parse_pos_embed(name); });
  }
  if (s.has("attention_scale")) {
    s.get("attention_scale", name);
    spec.attention_scale = keyed(s.key("attention_scale"), [&] { return nn::parse_attention_scale(name); });
  }
  if (s.has("pre_norm")) {
    s.get("pre_norm", name);
    spec.pre_norm = keyed(s.key("pre_norm"), [&] { return nn::parse_pre_norm(name); });
  }
  s.finish();
  keyed("model", [&] { spec.validate(); return 0; });
}

void parse_session(Section s, ExperimentConfig& cfg) {
  int height = 32, width = 32, grid = 8, blocks = 1;
  s.get("height", height);
  s.get("width", width);
  s.get("grid", grid);
  s.get("blocks", blocks);
  if (grid < 1 || height % grid != 0 || width % grid != 0) {
    throw ConfigError(s.key("grid") + ": must divide height and width");
  }
  const bool has_ratio = s.has("ratio");
  const bool has_symbols = s.has("symbols");
  if (has_ratio && has_symbols) throw ConfigError(s.key("ratio") + ": give either ratio or symbols, not both");
  if (has_symbols) {
    int k = 0;
    s.get("symbols", k);
    cfg.model.geometry = SessionGeometry{height, width, grid, blocks, k};
    keyed(s.key("symbols"), [&] { cfg.model.geometry.validate(); return 0; });
  } else {
    double ratio = 1.0 / 6.0;
    s.get("ratio", ratio);
    cfg.model.geometry =
        keyed(s.key("ratio"), [&] { return SessionGeometry::from_ratio(height, width, grid, blocks, ratio); });
  }
  if (s.has("feedback_mode")) {
    std::string mode;
    s.get("feedback_mode", mode);
    cfg.model.mode = keyed(s.key("feedback_mode"), [&] { return parse_feedback_mode(mode); });
  }
  s.finish();
}

void parse_channel(Section s, ChannelConfig& ch) {
  std::string name;
  if (s.has("forward")) {
    s.get("forward", name);
    ch.forward = keyed(s.key("forward"), [&] { return parse_forward_kind(name); });
  }
  if (s.has("feedback")) {
    s.get("feedback", name);
    ch.feedback = keyed(s.key("feedback"), [&] { return parse_feedback_kind(name); });
  }
  s.get("snr_db", ch.snr_db);
  s.get("noiseless", ch.noiseless);
  if (s.has("snr_fb_db")) {
    double v = 0.0;
    s.get("snr_fb_db", v);
    ch.snr_fb_db = v;
  }
  s.get("sigma_h2", ch.sigma_h2);
  s.get("power", ch.power);
  s.finish();
  ch.validate();
}

void parse_snr(Section s, SnrStrategy& snr) {
  std::string kind = "fixed";
  s.get("kind", kind);
  if (kind == "fixed") {
    snr.kind = SnrStrategy::Kind::Fixed;
    s.get("snr_db", snr.snr_db);
  } else if (kind == "uniform") {
    snr.kind = SnrStrategy::Kind::Uniform;
    s.get("lo", snr.lo);
    s.get("hi", snr.hi);
  } else {
    throw ConfigError(s.key("kind") + ": expected 'fixed' or 'uniform'");
  }
  s.finish();
  snr.validate();
}

void parse_train(Section s, TrainConfig& t) {
  s.get("lr", t.lr);
  s.get("batch", t.batch);
  s.get("patience", t.patience);
  s.get("val_fraction", t.val_fraction);
  s.get("max_steps", t.max_steps);
  s.get("max_epochs", t.max_epochs);
  s.get("seed", t.seed);
  if (s.has("snr")) parse_snr(s.child("snr"), t.snr);
  s.finish();
  keyed("train", [&] { t.validate(); return 0; });
}

void parse_loss(Section s, LossSpec& l) {
  if (s.has("kind")) {
    std::string kind;
    s.get("kind", kind);
    l.kind = keyed(s.key("kind"), [&] { return parse_loss_kind(kind); });
  }
  s.get("lambda_lpips", l.lambda_lpips);
  s.get("lambda_broadcast", l.lambda_broadcast);
  s.get("extractor", l.extractor);
  s.finish();
  keyed("loss", [&] { l.validate(); return 0; });
}

DatasetSource parse_dataset(Section s, int& limit) {
  DatasetSource d;
  std::string format;
  if (!s.has("format")) throw ConfigError(s.key("format") + ": required");
  s.get("format", format);
  d.format = keyed(s.key("format"), [&] { return parse_dataset_format(format); });
  if (d.format != DatasetFormat::Synthetic) {
    if (!s.has("path")) throw ConfigError(s.key("path") + ": required for format '" + format + "'");
    std::string path;
    s.get("path", path);
    d.path = path;
  }
  s.get("count", d.count);
  s.get("size", d.size);
  s.get("seed", d.seed);
  s.get("limit", limit);
  s.finish();
  if (limit < 0) throw ConfigError(s.key("limit") + ": must be >= 0");
  return d;
}

void parse_eval(Section s, EvalConfig& e) {
  s.get("snr_db", e.snr_db);
  if (s.has("snr_fb_db")) {
    e.snr_fb_db.clear();
    const json& list = s.raw("snr_fb_db");
    if (!list.is_array()) throw ConfigError(s.key("snr_fb_db") + ": expected an array");
    for (const auto& v : list) {
      if (v.is_null()) {
        e.snr_fb_db.emplace_back(std::nullopt);
      } else if (v.is_number()) {
        e.snr_fb_db.emplace_back(v.get<double>());
      } else {
        throw ConfigError(s.key("snr_fb_db") + ": entries must be numbers or null");
      }
    }
  }
  s.get("repeats", e.repeats);
  s.finish();
  if (e.repeats < 1) throw ConfigError(s.key("repeats") + ": must be >= 1");
}

void parse_broadcast(Section s, ExperimentConfig& cfg) {
  auto& b = cfg.broadcast;
  s.get("snr1_db", b.snr1_db);
  s.get("snr2_db", b.snr2_db);
  s.get("lambda", b.lambda);
  s.get("lambdas", cfg.broadcast_lambdas);
  s.finish();
  keyed("broadcast", [&] { b.validate(); return 0; });
  for (double l : cfg.broadcast_lambdas) {
    if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("broadcast.lambdas: values must lie in [0,1]");
  }
}

json dataset_json(const DatasetSource& d, int limit) {
  json j{{"format", to_string(d.format)}, {"limit", limit}};
  if (d.format == DatasetFormat::Synthetic) {
    j["count"] = d.count;
    j["size"] = d.size;
    j["seed"] = d.seed;
  } else {
    j["path"] = d.path.string();
  }
  return j;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& spec = cfg.model.spec;
  const auto& g = cfg.model.geometry;
  json j;
  j["schema_version"] = cfg.schema_version;
  j["seed"] = cfg.seed;
  j["model"] = {{"layers", spec.layers},
                {"heads", spec.heads},
                {"width", spec.width},
                {"mlp_hidden", spec.mlp_hidden},
                {"pos_embed", nn::to_string(spec.pos_embed)},
                {"siamese", spec.siamese},
                {"attention_scale", nn::to_string(spec.attention_scale)},
                {"pre_norm", nn::to_string(spec.pre_norm)},
                {"init_std", spec.init_std},
                {"init_seed", cfg.model.init_seed}};
  j["session"] = {{"height", g.height},
                  {"width", g.width},
                  {"grid", g.grid},
                  {"blocks", g.blocks},
                  {"symbols", g.symbols},
                  {"feedback_mode", to_string(cfg.model.mode)}};
  const auto& ch = cfg.channel;
  j["channel"] = {{"forward", to_string(ch.forward)}, {"feedback", to_string(ch.feedback)},
                  {"snr_db", ch.snr_db},              {"noiseless", ch.noiseless},
                  {"sigma_h2", ch.sigma_h2},          {"power", ch.power}};
  j["channel"]["snr_fb_db"] = ch.snr_fb_db ? json(*ch.snr_fb_db) : json(nullptr);
  const auto& t = cfg.train;
  json snr = t.snr.kind == SnrStrategy::Kind::Fixed ? json{{"kind", "fixed"}, {"snr_db", t.snr.snr_db}}
                                                    : json{{"kind", "uniform"}, {"lo", t.snr.lo}, {"hi", t.snr.hi}};
  j["train"] = {{"lr", t.lr},
                {"batch", t.batch},
                {"patience", t.patience},
                {"val_fraction", t.val_fraction},
                {"max_steps", t.max_steps},
                {"max_epochs", t.max_epochs},
                {"seed", t.seed},
                {"snr", snr}};
  j["loss"] = {{"kind", to_string(cfg.loss.kind)},
               {"lambda_lpips", cfg.loss.lambda_lpips},
               {"lambda_broadcast", cfg.loss.lambda_broadcast},
               {"extractor", cfg.loss.extractor}};
  if (cfg.train_data) j["train_data"] = dataset_json(*cfg.train_data, cfg.train_limit);
  if (cfg.test_data) j["test_data"] = dataset_json(*cfg.test_data, cfg.test_limit);
  json fb = json::array();
  for (const auto& v : cfg.eval.snr_fb_db) fb.push_back(v ? json(*v) : json(nullptr));
  j["eval"] = {{"snr_db", cfg.eval.snr_db}, {"snr_fb_db", fb}, {"repeats", cfg.eval.repeats}};
  j["varrate"] = {{"targets", cfg.varrate.targets}};
  j["broadcast"] = {{"snr1_db", cfg.broadcast.snr1_db},
                    {"snr2_db", cfg.broadcast.snr2_db},
                    {"lambda", cfg.broadcast.lambda},
                    {"lambdas", cfg.broadcast_lambdas}};
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Section s(root, "");
  if (!s.has("schema_version")) throw ConfigError("schema_version: required");
  s.get("schema_version", cfg.schema_version);
  if (cfg.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version: expected " + std::to_string(kConfigSchemaVersion) + ", got " +
                      std::to_string(cfg.schema_version));
  }
  s.get("seed", cfg.seed);
  cfg.model.geometry = SessionGeometry::from_ratio(32, 32, 8, 1, 1.0 / 6.0);
  if (s.has("model")) parse_model(s.child("model"), cfg);
  if (s.has("session")) parse_session(s.child("session"), cfg);
  if (s.has("channel")) parse_channel(s.child("channel"), cfg.channel);
  if (s.has("train")) parse_train(s.child("train"), cfg.train);
  if (s.has("loss")) parse_loss(s.child("loss"), cfg.loss);
  if (s.has("train_data")) cfg.train_data = parse_dataset(s.child("train_data"), cfg.train_limit);
  if (s.has("test_data")) cfg.test_data = parse_dataset(s.child("test_data"), cfg.test_limit);
  if (s.has("eval")) parse_eval(s.child("eval"), cfg.eval);
  if (s.has("varrate")) {
    Section v = s.child("varrate");
    v.get("targets", cfg.varrate.targets);
    v.finish();
  }
  if (s.has("broadcast")) parse_broadcast(s.child("broadcast"), cfg);
  s.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path));
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) { return to_json(cfg).dump(indent); }

std::string config_hash(const ExperimentConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

std::vector<Image> load_dataset_checked(const DatasetSource& source, const std::string& key, int limit) {
  if (source.format != DatasetFormat::Synthetic && !std::filesystem::exists(source.path)) {
    throw ConfigError(key + ": path does not exist: '" + source.path.string() + "'");
  }
  std::vector<Image> images = load_dataset(source);
  if (limit > 0 && images.size() > static_cast<std::size_t>(limit)) images.resize(static_cast<std::size_t>(limit));
  if (images.empty()) throw ConfigError(key + ": dataset is empty");
  return images;
}

}  // namespace jsccf
