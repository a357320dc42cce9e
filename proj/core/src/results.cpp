#include "jsccf/results.hpp"

#include "jsccf/checkpoint.hpp"
#include "jsccf/errors.hpp"
#include "jsccf/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace jsccf {

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

std::string cell(double v) { return cell(std::optional<double>(v)); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("results: column '" + column + "' has non-numeric value '" + s + "'");
  }
}

std::optional<double> parse_optional(const std::string& s, const std::string& column) {
  if (s.empty()) return std::nullopt;
  return parse_number(s, column);
}

}  // namespace

const std::vector<std::string>& ResultTable::columns() {
  static const std::vector<std::string> cols{"snr_db",    "snr_fb_db",  "ratio",      "blocks",
                                             "mode",      "psnr_mean",  "psnr_std",   "lpips_mean",
                                             "blocks_used_mean", "target_psnr"};
  return cols;
}

void ResultTable::write_csv(std::ostream& out) const {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows_) {
    out << cell(r.snr_db) << ',' << cell(r.snr_fb_db) << ',' << cell(r.ratio) << ',' << r.blocks << ',' << r.mode
        << ',' << cell(r.psnr_mean) << ',' << cell(r.psnr_std) << ',' << cell(r.lpips_mean) << ','
        << cell(r.blocks_used_mean) << ',' << cell(r.target_psnr) << '\n';
  }
}

std::string ResultTable::to_csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

ResultTable ResultTable::read_csv(std::istream& in) {
  const auto& cols = columns();
  std::string line;
  if (!std::getline(in, line)) throw FormatError("results: empty file");
  if (split_csv_line(line) != cols) throw FormatError("results: unexpected header '" + line + "'");
  ResultTable t;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != cols.size()) throw FormatError("results: row has " + std::to_string(f.size()) + " cells");
    ResultRow r;
    r.snr_db = parse_number(f[0], cols[0]);
    r.snr_fb_db = parse_optional(f[1], cols[1]);
    r.ratio = parse_number(f[2], cols[2]);
    r.blocks = static_cast<int>(parse_number(f[3], cols[3]));
    r.mode = f[4];
    r.psnr_mean = parse_number(f[5], cols[5]);
    r.psnr_std = parse_number(f[6], cols[6]);
    r.lpips_mean = parse_optional(f[7], cols[7]);
    r.blocks_used_mean = parse_optional(f[8], cols[8]);
    r.target_psnr = parse_optional(f[9], cols[9]);
    t.append(std::move(r));
  }
  return t;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::string manifest_to_json(const RunManifest& m) {
  using nlohmann::json;
  json j{{"command", m.command},
         {"config", json::parse(config_to_json(m.config, -1))},
         {"config_hash", config_hash(m.config)},
         {"seed", m.seed},
         {"code_version", code_version()},
         {"warnings", m.warnings},
         {"outputs", m.outputs}};
  j["history"] = m.history ? json::parse(history_to_json(*m.history)) : json(nullptr);
  return j.dump(2);
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  atomic_write_file(path, manifest_to_json(manifest) + "\n");
}

}  // namespace jsccf
