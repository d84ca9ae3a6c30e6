#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmaug/exec.hpp"
#include "pmaug/point_cloud.hpp"
#include "pmaug/spline.hpp"

namespace pmaug {

/// One-dimensional curve in R^d built from per-coordinate splines over a raw
/// parameter t. The public parameter is arc length s in [0, length()],
/// measured along a dense grid of the raw parameter.
class PrincipalCurve {
 public:
  static constexpr std::size_t kDefaultGridSize = 512;

  PrincipalCurve() = default;
  /// Grid spans [t_lo, t_hi]. Throws DegeneracyError for a zero-length curve.
  PrincipalCurve(std::vector<SmoothingSpline> splines, double t_lo, double t_hi,
                 std::size_t grid_size = kDefaultGridSize);

  std::size_t dim() const { return splines_.size(); }
  double length() const { return arc_.back(); }
  std::size_t grid_size() const { return grid_t_.size(); }

  /// Point at arc length s (linear continuation of the raw parameter outside [0, length()]).
  void evaluate(double s, std::span<double> out) const;
  std::vector<double> evaluate(double s) const;
  /// Point at raw parameter t.
  void evaluate_raw(double t, std::span<double> out) const;
  /// Raw parameter for arc length s.
  double raw_parameter(double s) const;

  std::span<const SmoothingSpline> splines() const { return splines_; }
  /// Raw-parameter grid (increasing).
  std::span<const double> lambda_grid() const { return grid_t_; }
  /// Cumulative chord length over the grid, starting at 0.
  std::span<const double> arc_length_table() const { return arc_; }
  /// Curve points at the grid, row-major grid_size() x dim().
  std::span<const double> grid_points() const { return grid_pts_; }

  nlohmann::json to_json() const;
  static PrincipalCurve from_json(const nlohmann::json& j);

 private:
  std::vector<SmoothingSpline> splines_;
  std::vector<double> grid_t_;
  std::vector<double> arc_;
  std::vector<double> grid_pts_;
};

/// Per-point output of a projection: the projected point, its projection
/// index (arc length along the curve) and its 1-based rank among all indices.
struct ProjectionRecord {
  std::vector<double> projected;
  double lambda = 0.0;
  std::size_t order = 0;
  double distance = 0.0;
};

/// Degrees of freedom used by the expectation step.
struct DfPolicy {
  enum class Kind { kAdaptive, kInterpolate, kFixed };
  Kind kind = Kind::kAdaptive;
  double df = 0.0;

  /// min(n, max(4, ceil(n/2))).
  static DfPolicy adaptive() { return {Kind::kAdaptive, 0.0}; }
  /// df equal to the number of distinct knots: the curve passes through every point.
  static DfPolicy interpolate() { return {Kind::kInterpolate, 0.0}; }
  static DfPolicy fixed(double df) { return {Kind::kFixed, df}; }

  double resolve(std::size_t num_points, std::size_t num_knots) const;
};

enum class CurveInit {
  kAuto,              ///< currently the same as kGraphGeodesic
  kPrincipalComponent,
  kGraphGeodesic,
};

struct FitOptions {
  DfPolicy df = DfPolicy::adaptive();
  std::size_t max_iter = 50;
  double tol = 1e-4;
  CurveInit init = CurveInit::kAuto;
  std::size_t grid_size = PrincipalCurve::kDefaultGridSize;
  ExecPolicy exec = ExecPolicy::kParallel;
};

struct FitReport {
  std::size_t iterations = 0;
  std::vector<double> reconstruction_errors;  // one per iteration
  bool converged = false;
  std::size_t best_iteration = 0;             // 1-based
  std::string init_used;

  nlohmann::json to_json() const;
};

struct CurveFit {
  PrincipalCurve curve;
  std::vector<ProjectionRecord> records;
  FitReport report;
};

/// Expectation step: one smoothing spline per coordinate against `lambda`;
/// the grid spans the knot range widened by 5% on each side.
/// Throws DegeneracyError when all lambda values coincide.
PrincipalCurve expectation_step(std::span<const double> lambda, const PointCloud& points,
                                const DfPolicy& df,
                                std::size_t grid_size = PrincipalCurve::kDefaultGridSize);

/// Projection step: for each point the arc length minimizing the distance to
/// the curve. Every local minimum of the grid distance profile that could beat
/// the best grid point is refined by golden-section search over its two
/// neighbouring cells; exact ties go to the larger index.
std::vector<ProjectionRecord> projection_step(const PrincipalCurve& curve, const PointCloud& points,
                                              ExecPolicy exec = ExecPolicy::kParallel);

/// Assigns 1-based ranks by ascending lambda, ties broken by input index.
void assign_order(std::vector<ProjectionRecord>& records);

/// Initial projection indices.
std::vector<double> principal_component_scores(const PointCloud& points);
/// Geodesic distances from an extremal point over the symmetric kNN graph.
/// k is the smallest value <= max_k that merges as many components as max_k
/// would; components still apart are joined by their shortest bridging edges.
std::vector<double> graph_geodesic_scores(const PointCloud& points, std::size_t max_k = 10,
                                          ExecPolicy exec = ExecPolicy::kParallel);

/// Alternates expectation and projection steps from the chosen initialization
/// and returns the iterate with the lowest reconstruction error
/// sum_i ||x_i - P(lambda_i)||^2. Stops on relative change < tol, after two
/// consecutive increases, or at max_iter.
/// Requires n >= 4 and d >= 2; throws DegeneracyError if all points coincide.
CurveFit fit_principal_curve(const PointCloud& points, const FitOptions& options = {});

/// Same iteration from caller-supplied initial indices; only needs two
/// distinct values in `initial_lambda`.
CurveFit fit_principal_curve_from(const PointCloud& points, std::span<const double> initial_lambda,
                                  const FitOptions& options);

}  // namespace pmaug
