#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pmaug/exec.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// k nearest neighbours of every point (the point itself excluded).
/// Row i holds neighbours sorted by (distance, index).
struct NeighborTable {
  std::size_t k = 0;
  std::vector<std::size_t> index;  // n * k
  std::vector<double> dist;        // n * k, Euclidean

  std::span<const std::size_t> neighbors(std::size_t i) const { return {index.data() + i * k, k}; }
  std::span<const double> distances(std::size_t i) const { return {dist.data() + i * k, k}; }
};

/// Exact brute-force search, O(n^2 d). Throws ArgumentError unless 1 <= k < n.
NeighborTable knn_all(const PointCloud& points, std::size_t k,
                      ExecPolicy exec = ExecPolicy::kParallel);

/// Neighbours of a single member `query` (itself excluded).
void knn_one(const PointCloud& points, std::size_t query, std::size_t k,
             std::span<std::size_t> index_out, std::span<double> dist_out);

}  // namespace pmaug
