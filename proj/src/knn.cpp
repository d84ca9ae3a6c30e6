#include "pmaug/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "pmaug/errors.hpp"

namespace pmaug {

namespace {

void check_k(const PointCloud& points, std::size_t k) {
  if (k == 0 || k >= points.size())
    throw ArgumentError("knn: need 1 <= k < n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(points.size()) + ")");
}

// Partial selection on (squared distance, index) pairs; `scratch` is reused.
void select_row(const PointCloud& points, std::size_t query, std::size_t k,
                std::vector<std::pair<double, std::size_t>>& scratch, std::size_t* index_out,
                double* dist_out) {
  const std::size_t n = points.size();
  scratch.clear();
  const auto q = points.point(query);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == query) continue;
    scratch.emplace_back(squared_distance(q, points.point(j)), j);
  }
  auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(scratch.begin(), kth, scratch.end());
  for (std::size_t r = 0; r < k; ++r) {
    index_out[r] = scratch[r].second;
    dist_out[r] = std::sqrt(scratch[r].first);
  }
}

}  // namespace

NeighborTable knn_all(const PointCloud& points, std::size_t k, ExecPolicy exec) {
  check_k(points, k);
  const std::size_t n = points.size();
  NeighborTable t{k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
  if (exec == ExecPolicy::kSerial) {
    std::vector<std::pair<double, std::size_t>> scratch;
    scratch.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      select_row(points, i, k, scratch, t.index.data() + i * k, t.dist.data() + i * k);
    return t;
  }
#pragma omp parallel
  {
    std::vector<std::pair<double, std::size_t>> scratch;
    scratch.reserve(n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
      select_row(points, i, k, scratch, t.index.data() + i * k, t.dist.data() + i * k);
  }
  return t;
}

void knn_one(const PointCloud& points, std::size_t query, std::size_t k,
             std::span<std::size_t> index_out, std::span<double> dist_out) {
  check_k(points, k);
  if (query >= points.size()) throw ArgumentError("knn: query index out of range");
  if (index_out.size() < k || dist_out.size() < k) throw ArgumentError("knn: output too small");
  std::vector<std::pair<double, std::size_t>> scratch;
  scratch.reserve(points.size());
  select_row(points, query, k, scratch, index_out.data(), dist_out.data());
}

}  // namespace pmaug
