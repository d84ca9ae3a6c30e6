#include "pmaug/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pmaug/errors.hpp"

namespace pmaug {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  if (b == e) return false;
  auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && ptr == e;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

void write_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t j = 0; j < cloud.dim(); ++j) out << (j ? "," : "") << 'x' << j;
  if (cloud.has_labels()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << format_double(p[j]);
    if (cloud.has_labels()) out << ',' << cloud.label(i);
    out << '\n';
  }
  write_text(out.str(), path);
}

namespace {

struct Table {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t j = 0; j < cells.size() && numeric; ++j) numeric = parse_double(cells[j], row[j]);
    if (first && !numeric) {
      for (auto& c : cells) {
        while (!c.empty() && (c.back() == ' ' || c.back() == '\t')) c.pop_back();
        while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.erase(c.begin());
      }
      t.header = std::move(cells);
      width = t.header.size();
      first = false;
      continue;
    }
    if (!numeric) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    if (first) width = cells.size();
    first = false;
    if (cells.size() != width)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(width) + " columns");
    t.rows.push_back(std::move(row));
  }
  if (first) throw FormatError(path.string() + ": empty file");
  return t;
}

}  // namespace

LambdaCloud read_csv_with_lambda(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const std::size_t width = t.header.empty() ? (t.rows.empty() ? 0 : t.rows[0].size()) : t.header.size();
  std::ptrdiff_t label_col = -1, lambda_col = -1;
  if (t.header.empty()) {
    label_col = static_cast<std::ptrdiff_t>(width) - 1;
  } else {
    for (std::size_t j = 0; j < width; ++j) {
      if (t.header[j] == "label") label_col = static_cast<std::ptrdiff_t>(j);
      if (t.header[j] == "lambda") lambda_col = static_cast<std::ptrdiff_t>(j);
    }
  }
  std::vector<std::size_t> coord_cols;
  for (std::size_t j = 0; j < width; ++j)
    if (static_cast<std::ptrdiff_t>(j) != label_col && static_cast<std::ptrdiff_t>(j) != lambda_col)
      coord_cols.push_back(j);
  if (coord_cols.empty()) throw FormatError(path.string() + ": no coordinate columns");

  LambdaCloud out;
  std::vector<double> coords;
  std::vector<int> labels;
  coords.reserve(t.rows.size() * coord_cols.size());
  for (const auto& r : t.rows) {
    for (std::size_t j : coord_cols) coords.push_back(r[j]);
    if (label_col >= 0) {
      const double l = r[static_cast<std::size_t>(label_col)];
      if (l != static_cast<int>(l)) throw FormatError(path.string() + ": non-integer label");
      labels.push_back(static_cast<int>(l));
    }
    if (lambda_col >= 0) out.lambda.push_back(r[static_cast<std::size_t>(lambda_col)]);
  }
  try {
    out.cloud = PointCloud(coord_cols.size(), std::move(coords), std::move(labels));
  } catch (const ArgumentError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

PointCloud read_csv(const std::filesystem::path& path) { return read_csv_with_lambda(path).cloud; }

void write_csv_with_lambda(const PointCloud& cloud, std::span<const double> lambda,
                           const std::filesystem::path& path) {
  if (lambda.size() != cloud.size()) throw ArgumentError("write_csv_with_lambda: length mismatch");
  std::ostringstream out;
  for (std::size_t j = 0; j < cloud.dim(); ++j) out << 'x' << j << ',';
  out << "lambda";
  if (cloud.has_labels()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (double v : cloud.point(i)) out << format_double(v) << ',';
    out << format_double(lambda[i]);
    if (cloud.has_labels()) out << ',' << cloud.label(i);
    out << '\n';
  }
  write_text(out.str(), path);
}

nlohmann::json cloud_manifest(const PointCloud& cloud, std::uint64_t seed) {
  nlohmann::json j;
  j["d"] = cloud.dim();
  j["count"] = cloud.size();
  j["seed"] = seed;
  j["classes"] = cloud.classes();
  return j;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  write_text(j.dump(2) + "\n", path);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pmaug
