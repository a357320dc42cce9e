#include "jsccf/config.hpp"
#include "jsccf/errors.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace jsccf;

namespace {

const char* kSmoke = R"({
  "schema_version": 1,
  "seed": 7,
  "model": {"layers": 2, "heads": 2, "width": 16, "pos_embed": "cpe", "siamese": false},
  "session": {"height": 8, "width": 8, "grid": 4, "blocks": 2, "ratio": 0.5, "feedback_mode": "full"},
  "channel": {"snr_db": 4.0, "feedback": "awgn", "snr_fb_db": 10.0},
  "train": {"lr": 0.001, "batch": 16, "max_steps": 100, "snr": {"kind": "uniform", "lo": 0, "hi": 10}},
  "loss": {"kind": "mse"},
  "train_data": {"format": "synthetic", "count": 64, "size": 8, "seed": 3},
  "eval": {"snr_db": [1, 4, 7], "snr_fb_db": [null, 0, 20], "repeats": 2},
  "varrate": {"targets": [20, 25]},
  "broadcast": {"snr1_db": 4, "snr2_db": 7, "lambdas": [0.2, 0.8]}
})";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for " << text;
  return {};
}

}  // namespace

TEST(Config, ParsesEverySection) {
  const ExperimentConfig c = parse_config(kSmoke);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.model.spec.layers, 2);
  EXPECT_EQ(c.model.spec.pos_embed, nn::PosEmbedKind::Conditional);
  EXPECT_FALSE(c.model.spec.siamese);
  EXPECT_EQ(c.model.geometry.grid, 4);
  EXPECT_EQ(c.model.geometry.symbols, 48);
  EXPECT_EQ(c.model.mode, FeedbackMode::Full);
  EXPECT_EQ(c.channel.feedback, FeedbackKind::Awgn);
  EXPECT_EQ(*c.channel.snr_fb_db, 10.0);
  EXPECT_EQ(c.train.snr.kind, SnrStrategy::Kind::Uniform);
  EXPECT_EQ(c.train.max_steps, 100);
  ASSERT_TRUE(c.train_data.has_value());
  EXPECT_EQ(c.train_data->count, 64);
  EXPECT_EQ(c.eval.snr_fb_db.size(), 3u);
  EXPECT_FALSE(c.eval.snr_fb_db[0].has_value());
  EXPECT_EQ(*c.eval.snr_fb_db[2], 20.0);
  EXPECT_EQ(c.varrate.targets.size(), 2u);
  EXPECT_EQ(c.broadcast_lambdas.size(), 2u);
}

TEST(Config, DefaultsForMinimalDocument) {
  const ExperimentConfig c = parse_config(R"({"schema_version": 1})");
  EXPECT_EQ(c.model.geometry.symbols, 512);
  EXPECT_EQ(c.model.spec.width, 256);
  EXPECT_DOUBLE_EQ(c.train.lr, 5e-5);
  EXPECT_EQ(c.train.batch, 128);
}

TEST(Config, UnknownKeyIsNamed) {
  const std::string msg = expect_config_error(R"({"schema_version": 1, "model": {"depth": 3}})");
  EXPECT_NE(msg.find("model.depth"), std::string::npos) << msg;
}

TEST(Config, SchemaVersionRequiredAndChecked) {
  EXPECT_NE(expect_config_error("{}").find("schema_version"), std::string::npos);
  EXPECT_NE(expect_config_error(R"({"schema_version": 2})").find("schema_version"), std::string::npos);
}

TEST(Config, BadValuesNameTheKey) {
  EXPECT_NE(expect_config_error(R"({"schema_version": 1, "session": {"ratio": 0.3}})").find("session.ratio"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"schema_version": 1, "model": {"heads": "x"}})").find("model.heads"),
            std::string::npos);
  EXPECT_NE(expect_config_error(R"({"schema_version": 1, "channel": {"forward": "rician"}})").find("channel.forward"),
            std::string::npos);
  expect_config_error("{not json");
}

TEST(Config, MissingDatasetPathNamesTheKey) {
  const ExperimentConfig c = parse_config(
      R"({"schema_version": 1, "train_data": {"format": "cifar10-binary", "path": "/nonexistent/cifar"}})");
  try {
    load_dataset_checked(*c.train_data, "train_data.path", 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train_data.path"), std::string::npos);
  }
  EXPECT_NE(expect_config_error(R"({"schema_version": 1, "test_data": {"format": "image-folder"}})")
                .find("test_data.path"),
            std::string::npos);
}

TEST(Config, CanonicalRoundTripAndStableHash) {
  const ExperimentConfig c = parse_config(kSmoke);
  const std::string canon = config_to_json(c);
  const ExperimentConfig back = parse_config(canon);
  EXPECT_EQ(config_to_json(back), canon);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 64u);
  ExperimentConfig other = c;
  other.seed = 8;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, SyntheticDatasetLoadsWithLimit) {
  const ExperimentConfig c = parse_config(kSmoke);
  EXPECT_EQ(load_dataset_checked(*c.train_data, "train_data.path", 10).size(), 10u);
  EXPECT_EQ(load_dataset_checked(*c.train_data, "train_data.path", 0).size(), 64u);
}
