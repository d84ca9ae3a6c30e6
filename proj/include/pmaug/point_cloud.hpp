#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pmaug {

/// Row-major collection of d-dimensional points with optional integer labels.
///
/// Invariants: every point has the same dimension d >= 1, coordinates are
/// finite, and labels (when present) have one entry per point.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dim);
  PointCloud(std::size_t dim, std::vector<double> coords, std::vector<int> labels = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return coords_.empty(); }
  bool has_labels() const { return !labels_.empty(); }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }
  int label(std::size_t i) const { return labels_.at(i); }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<int>& labels() const { return labels_; }

  /// Appends a point; `label` is ignored for unlabeled clouds unless the cloud is empty.
  void push_back(std::span<const double> p);
  void push_back(std::span<const double> p, int label);

  /// Sorted distinct labels.
  std::vector<int> classes() const;
  /// Indices of points carrying `label`, ascending.
  std::vector<std::size_t> indices_of(int label) const;
  PointCloud subset(std::span<const std::size_t> indices) const;
  /// Points of one class, labels kept.
  PointCloud class_subset(int label) const;
  /// Same points without labels.
  PointCloud unlabeled() const;

  /// Throws ArgumentError if an invariant is broken.
  void validate() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<int> labels_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace pmaug
