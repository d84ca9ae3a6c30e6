#include "pmaug/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pmaug/errors.hpp"
#include "pmaug/knn.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// NaN marks a degenerate configuration; the throwing wrapper is separate so
// this can run inside OpenMP regions.
double local_dim_or_nan(std::span<const double> t, std::size_t k) {
  if (t[k - 1] < kDistanceFloor) return kNaN;
  const double tk = t[k - 1];
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) s += std::log(tk / std::max(t[j], kDistanceFloor));
  if (!(s >= 1e-12 * static_cast<double>(k - 1))) return kNaN;
  return static_cast<double>(k - 1) / s;
}

void check_range(const PointCloud& points, std::size_t k1, std::size_t k2) {
  if (k1 < 2 || k1 > k2 || k2 + 1 > points.size())
    throw ArgumentError("intrinsic: need 2 <= k1 <= k2 <= n-1 (k1=" + std::to_string(k1) +
                        ", k2=" + std::to_string(k2) + ", n=" + std::to_string(points.size()) + ")");
}

}  // namespace

double local_dim_from_distances(std::span<const double> sorted_distances, std::size_t k) {
  if (k < 2) throw ArgumentError("local_dim: k must be >= 2");
  if (sorted_distances.size() < k) throw ArgumentError("local_dim: fewer than k distances");
  const double v = local_dim_or_nan(sorted_distances, k);
  if (std::isnan(v)) throw DegeneracyError("local_dim: coincident neighbours make the estimate infinite");
  return v;
}

double local_dim(std::size_t point_index, const PointCloud& points, std::size_t k) {
  if (k < 2) throw ArgumentError("local_dim: k must be >= 2");
  if (points.size() < k + 1) throw ArgumentError("local_dim: need at least k+1 points");
  std::vector<std::size_t> idx(k);
  std::vector<double> dist(k);
  knn_one(points, point_index, k, idx, dist);
  return local_dim_from_distances(dist, k);
}

nlohmann::json DimensionEstimate::to_json() const {
  return {{"aggregate", aggregate},
          {"k1", k1},
          {"k2", k2},
          {"n", per_point_local.size()},
          {"excluded_count", excluded.size()}};
}

DimensionEstimate class_dim(const PointCloud& points, std::size_t k1, std::size_t k2,
                            ExecPolicy exec) {
  check_range(points, k1, k2);
  const std::size_t n = points.size(), span = k2 - k1 + 1;
  const NeighborTable table = knn_all(points, k2, exec);
  DimensionEstimate est;
  est.k1 = k1;
  est.k2 = k2;
  est.per_point_local.assign(n, std::vector<double>(span));
  std::vector<char> bad(n, 0);
  auto row = [&](std::size_t i) {
    for (std::size_t k = k1; k <= k2; ++k) {
      const double v = local_dim_or_nan(table.distances(i), k);
      if (std::isnan(v)) bad[i] = 1;
      est.per_point_local[i][k - k1] = v;
    }
  };
  if (exec == ExecPolicy::kSerial) {
    for (std::size_t i = 0; i < n; ++i) row(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) row(i);
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i]) {
      est.excluded.push_back(i);
      est.per_point_local[i].clear();
      continue;
    }
    for (double v : est.per_point_local[i]) sum += v;
    ++used;
  }
  if (used == 0) throw DegeneracyError("class_dim: every point is degenerate");
  est.aggregate = sum / static_cast<double>(used * span);
  return est;
}

IntrinsicLossGrad intrinsic_loss_and_gradient(const PointCloud& latents, std::size_t k1,
                                              std::size_t k2, ExecPolicy exec) {
  check_range(latents, k1, k2);
  const std::size_t n = latents.size(), d = latents.dim(), span = k2 - k1 + 1;
  const NeighborTable table = knn_all(latents, k2, exec);

  // coef[i*k2 + r] = d(sum_k L_ik) / dT_{i,r}, before normalization.
  std::vector<double> coef(n * k2, 0.0);
  std::vector<double> local_sum(n, 0.0);
  std::vector<char> bad(n, 0);
  auto row = [&](std::size_t i) {
    const auto t = table.distances(i);
    double* c = coef.data() + i * k2;
    for (std::size_t k = k1; k <= k2; ++k) {
      const double l = local_dim_or_nan(t, k);
      if (std::isnan(l)) {
        bad[i] = 1;
        return;
      }
      local_sum[i] += l;
      const double km1 = static_cast<double>(k - 1);
      const double dl_ds = -l * l / km1;
      c[k - 1] += dl_ds * km1 / t[k - 1];
      for (std::size_t j = 0; j + 1 < k; ++j)
        if (t[j] >= kDistanceFloor) c[j] -= dl_ds / t[j];
    }
  };
  if (exec == ExecPolicy::kSerial) {
    for (std::size_t i = 0; i < n; ++i) row(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) row(i);
  }

  IntrinsicLossGrad out;
  out.gradient.assign(n * d, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) used += bad[i] ? 0 : 1;
  out.excluded = n - used;
  if (used == 0) throw DegeneracyError("intrinsic loss: every point is degenerate");
  const double scale = 1.0 / static_cast<double>(used * span);
  for (std::size_t i = 0; i < n; ++i) {
    if (bad[i]) continue;
    out.loss += local_sum[i];
    const auto zi = latents.point(i);
    for (std::size_t r = 0; r < k2; ++r) {
      const double c = coef[i * k2 + r];
      if (c == 0.0) continue;
      const std::size_t nb = table.neighbors(i)[r];
      const double t = table.distances(i)[r];
      const auto zn = latents.point(nb);
      for (std::size_t a = 0; a < d; ++a) {
        const double g = scale * c * (zi[a] - zn[a]) / t;
        out.gradient[i * d + a] += g;
        out.gradient[nb * d + a] -= g;
      }
    }
  }
  out.loss *= scale;
  return out;
}

bool TheoremCheck::agrees(double num_se) const {
  return std::abs(mean_local - predicted) <= num_se * std_error;
}

nlohmann::json TheoremCheck::to_json() const {
  return {{"m", m},
          {"n", n},
          {"k", k},
          {"trials", trials},
          {"mean_local", mean_local},
          {"std_error", std_error},
          {"predicted_gamma", predicted},
          {"predicted_alt", predicted_alt},
          {"z_gamma", std_error > 0 ? (mean_local - predicted) / std_error : 0.0},
          {"z_alt", std_error > 0 ? (mean_local - predicted_alt) / std_error : 0.0},
          {"agrees_gamma", agrees()}};
}

TheoremCheck mc_validate_theorem1(std::size_t m, std::size_t n, std::size_t k, std::size_t trials,
                                  std::uint64_t seed) {
  if (k <= 2) throw ArgumentError("validate-theorem1: k must be > 2 (E[1/Delta] undefined)");
  if (m == 0) throw ArgumentError("validate-theorem1: m must be >= 1");
  if (n < k) throw ArgumentError("validate-theorem1: need n >= k");
  if (trials < 2) throw ArgumentError("validate-theorem1: need at least 2 trials");
  Rng rng(derive_seed(seed, "theorem1"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> radius(n), dir(m);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < n; ++i) {
      double norm2 = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm2 += v * v;
      }
      const double r = std::pow(unit(rng), inv_m);
      const double scale = r / std::sqrt(norm2);
      double dist2 = 0.0;
      for (double v : dir) dist2 += (v * scale) * (v * scale);
      radius[i] = std::sqrt(dist2);
    }
    std::partial_sort(radius.begin(), radius.begin() + static_cast<std::ptrdiff_t>(k), radius.end());
    const double est = local_dim_from_distances(std::span<const double>(radius).first(k), k);
    sum += est;
    sum_sq += est * est;
  }
  TheoremCheck out;
  out.m = m;
  out.n = n;
  out.k = k;
  out.trials = trials;
  const double t = static_cast<double>(trials);
  out.mean_local = sum / t;
  const double var = std::max(0.0, (sum_sq - t * out.mean_local * out.mean_local) / (t - 1.0));
  out.std_error = std::sqrt(var / t);
  const double md = static_cast<double>(m), kd = static_cast<double>(k);
  out.predicted = md * (kd - 1.0) / (kd - 2.0);
  out.predicted_alt = md * (kd - 2.0) / (kd - 1.0);
  return out;
}

}  // namespace pmaug
