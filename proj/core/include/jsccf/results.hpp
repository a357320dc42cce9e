#pragma once

#include "jsccf/config.hpp"
#include "jsccf/training.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jsccf {

struct ResultRow {
  double snr_db = 0.0;
  std::optional<double> snr_fb_db;  // empty = perfect feedback
  double ratio = 0.0;
  int blocks = 1;
  std::string mode;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  std::optional<double> lpips_mean;
  std::optional<double> blocks_used_mean;
  std::optional<double> target_psnr;
};

// Append-only rows; CSV columns follow ResultRow's field order.
class ResultTable {
 public:
  static const std::vector<std::string>& columns();

  void append(ResultRow row) { rows_.push_back(std::move(row)); }
  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  // Throws FormatError on a wrong header or malformed cell.
  static ResultTable read_csv(std::istream& in);

 private:
  std::vector<ResultRow> rows_;
};

// Sample mean and (n-1) standard deviation; std is 0 for fewer than 2 values.
std::pair<double, double> mean_std(const std::vector<double>& values);

// Everything needed to rerun: command, config, seed, code version.
struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::optional<TrainHistory> history;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
};

std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace jsccf
