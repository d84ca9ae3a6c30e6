#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "pmaug/exec.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// Distances are floored here before taking logarithms.
inline constexpr double kDistanceFloor = 1e-12;

/// Local maximum-likelihood dimension from sorted neighbour distances
/// T_1 <= ... <= T_k:  [ (1/(k-1)) * sum_{j<k} log(T_k / T_j) ]^{-1}.
/// Throws ArgumentError for k < 2 and DegeneracyError when T_k is at the floor
/// or all T_j are equal (the estimate is infinite).
double local_dim_from_distances(std::span<const double> sorted_distances, std::size_t k);

/// Local estimate at member `point_index` using its k nearest neighbours.
double local_dim(std::size_t point_index, const PointCloud& points, std::size_t k);

struct DimensionEstimate {
  std::size_t k1 = 0, k2 = 0;
  /// per_point_local[i][k - k1]; empty for excluded points.
  std::vector<std::vector<double>> per_point_local;
  std::vector<std::size_t> excluded;
  double aggregate = 0.0;

  nlohmann::json to_json() const;
};

/// Mean of the local estimates over all points and all k in [k1, k2].
/// Points degenerate at any k are excluded and listed; throws
/// DegeneracyError if every point is excluded.
DimensionEstimate class_dim(const PointCloud& points, std::size_t k1, std::size_t k2,
                            ExecPolicy exec = ExecPolicy::kParallel);

struct IntrinsicLossGrad {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as the latent coordinates
  std::size_t excluded = 0;
};

/// class_dim of `latents` and its exact gradient with neighbour identities
/// held fixed. Each point contributes both as a query and as a neighbour;
/// floored distances contribute no gradient.
IntrinsicLossGrad intrinsic_loss_and_gradient(const PointCloud& latents, std::size_t k1,
                                              std::size_t k2,
                                              ExecPolicy exec = ExecPolicy::kParallel);

struct TheoremCheck {
  std::size_t m = 0, n = 0, k = 0, trials = 0;
  double mean_local = 0.0;
  double std_error = 0.0;
  /// m(k-1)/(k-2), from E[1/Delta] = 1/(k-2) for Delta ~ Gamma(k-1, 1).
  double predicted = 0.0;
  /// m(k-2)/(k-1), the constant obtained from E[1/Delta] = k-2.
  double predicted_alt = 0.0;

  bool agrees(double num_se = 3.0) const;
  nlohmann::json to_json() const;
};

/// Monte-Carlo check of the local estimator at the centre of the unit m-ball:
/// n points with radial density m t^{m-1} (uniform in the ball), local
/// estimate at the centre from its k nearest samples, averaged over `trials`.
/// Throws ArgumentError for k <= 2 or n < k.
TheoremCheck mc_validate_theorem1(std::size_t m, std::size_t n, std::size_t k, std::size_t trials,
                                  std::uint64_t seed);

}  // namespace pmaug
