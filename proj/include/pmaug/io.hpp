#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

/// CSV: header `x0,...,x{d-1}[,label]`, one row per point. Labeled clouds carry
/// a trailing integer label column.
void write_csv(const PointCloud& cloud, const std::filesystem::path& path);
/// Reads the CSV written by write_csv. A header is optional; without one every
/// column but the last is a coordinate and the last is the label.
PointCloud read_csv(const std::filesystem::path& path);

struct LambdaCloud {
  PointCloud cloud;
  std::vector<double> lambda;  // empty when the file has no lambda column
};

/// Header columns x0..,lambda[,label]. read_csv also accepts these files and
/// drops the lambda column.
void write_csv_with_lambda(const PointCloud& cloud, std::span<const double> lambda,
                           const std::filesystem::path& path);
LambdaCloud read_csv_with_lambda(const std::filesystem::path& path);

/// JSON manifest {d, count, seed, classes, ...extra}.
nlohmann::json cloud_manifest(const PointCloud& cloud, std::uint64_t seed);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace pmaug
