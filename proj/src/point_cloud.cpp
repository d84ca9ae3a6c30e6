#include "pmaug/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "pmaug/errors.hpp"

namespace pmaug {

PointCloud::PointCloud(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ArgumentError("PointCloud: dimension must be >= 1");
}

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords, std::vector<int> labels)
    : dim_(dim), coords_(std::move(coords)), labels_(std::move(labels)) {
  validate();
}

void PointCloud::push_back(std::span<const double> p) {
  if (p.size() != dim_) throw ArgumentError("PointCloud::push_back: dimension mismatch");
  if (has_labels()) throw ArgumentError("PointCloud::push_back: labeled cloud needs a label");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void PointCloud::push_back(std::span<const double> p, int label) {
  if (p.size() != dim_) throw ArgumentError("PointCloud::push_back: dimension mismatch");
  if (!empty() && !has_labels()) throw ArgumentError("PointCloud::push_back: cloud is unlabeled");
  coords_.insert(coords_.end(), p.begin(), p.end());
  labels_.push_back(label);
}

std::vector<int> PointCloud::classes() const {
  std::set<int> s(labels_.begin(), labels_.end());
  return {s.begin(), s.end()};
}

std::vector<std::size_t> PointCloud::indices_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) out.push_back(i);
  return out;
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  PointCloud out(dim_);
  out.coords_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    if (i >= size()) throw ArgumentError("PointCloud::subset: index out of range");
    auto p = point(i);
    out.coords_.insert(out.coords_.end(), p.begin(), p.end());
    if (has_labels()) out.labels_.push_back(labels_[i]);
  }
  return out;
}

PointCloud PointCloud::class_subset(int label) const {
  auto idx = indices_of(label);
  return subset(idx);
}

PointCloud PointCloud::unlabeled() const {
  PointCloud out(dim_);
  out.coords_ = coords_;
  return out;
}

void PointCloud::validate() const {
  if (dim_ == 0) throw ArgumentError("PointCloud: dimension must be >= 1");
  if (coords_.size() % dim_ != 0)
    throw ArgumentError("PointCloud: coordinate count is not a multiple of the dimension");
  if (!labels_.empty() && labels_.size() != size())
    throw ArgumentError("PointCloud: label count " + std::to_string(labels_.size()) +
                        " does not match point count " + std::to_string(size()));
  if (!std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); }))
    throw ArgumentError("PointCloud: non-finite coordinate");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace pmaug
