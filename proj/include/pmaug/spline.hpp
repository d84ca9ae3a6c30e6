#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace pmaug {

/// Natural cubic spline stored as per-interval polynomials
/// a + b*s + c*s^2 + d*s^3 with s = t - knot[i].
///
/// Outside [first knot, last knot] the spline continues linearly with the end
/// slope, so the second derivative is zero there as at the boundary knots.
class SmoothingSpline {
 public:
  SmoothingSpline() = default;

  /// From fitted knot values and knot second derivatives (zero at both ends).
  static SmoothingSpline from_knot_values(std::vector<double> knots, std::span<const double> values,
                                          std::span<const double> second_derivs, double smoothing,
                                          bool infinite_smoothing, double dof);
  static SmoothingSpline constant(std::vector<double> knots, double value);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  std::span<const double> knots() const { return knots_; }
  /// (a, b, c, d) for each of the knots().size() - 1 intervals.
  std::span<const std::array<double, 4>> coefficients() const { return coeffs_; }
  double smoothing() const { return smoothing_; }
  bool infinite_smoothing() const { return infinite_; }
  /// Trace of the smoother matrix used for the fit.
  double degrees_of_freedom() const { return dof_; }

  nlohmann::json to_json() const;
  static SmoothingSpline from_json(const nlohmann::json& j);

 private:
  std::size_t interval(double t) const;

  std::vector<double> knots_;
  std::vector<std::array<double, 4>> coeffs_;
  double smoothing_ = 0.0;
  bool infinite_ = false;
  double dof_ = 0.0;
};

/// Either a fixed penalty weight, a degrees-of-freedom target, or an infinite
/// penalty (weighted least-squares line).
struct SplineTarget {
  enum class Kind { kSmoothing, kDegreesOfFreedom, kInfinite };
  Kind kind = Kind::kDegreesOfFreedom;
  double value = 0.0;

  static SplineTarget smoothing(double lambda) { return {Kind::kSmoothing, lambda}; }
  static SplineTarget dof(double df) { return {Kind::kDegreesOfFreedom, df}; }
  static SplineTarget infinite() { return {Kind::kInfinite, 0.0}; }
};

/// Penalized regression over a fixed set of abscissae.
///
/// Abscissae closer than 1e-10 of their range are merged into one knot whose
/// response is the mean of the merged responses, weighted by multiplicity.
/// Everything that depends only on the knots (penalty bands, the smoothing
/// weight for a df target) is computed once and reused for every response.
class SplineSmoother {
 public:
  explicit SplineSmoother(std::span<const double> lambda);

  std::size_t num_knots() const { return knots_.size(); }
  std::span<const double> knots() const { return knots_; }
  std::span<const double> weights() const { return weights_; }

  /// Trace of the hat matrix for penalty weight `smoothing` (n at 0, -> 2 as it grows).
  double degrees_of_freedom(double smoothing) const;
  /// Penalty weight whose df is within 0.01 of `df`; 0 for df >= n, +inf for df <= 2.
  double smoothing_for_dof(double df) const;

  /// Minimizes sum_i (y_i - f(lambda_i))^2 + smoothing * int f''^2 over natural
  /// cubic splines (Reinsch); `y` is indexed like the constructor's `lambda`.
  SmoothingSpline fit(std::span<const double> y, double smoothing) const;

 private:
  struct Factor {
    std::vector<double> d, l1, l2;
  };
  void penalty_bands(double smoothing, std::vector<double>& b0, std::vector<double>& b1,
                     std::vector<double>& b2) const;
  Factor factor(double smoothing) const;
  std::vector<double> knot_means(std::span<const double> y) const;
  SmoothingSpline fit_line(std::span<const double> ybar) const;

  std::vector<double> knots_;
  std::vector<double> weights_;
  std::vector<std::size_t> group_;  // input index -> knot index
  std::vector<double> h_;
  // Bands of Q^T W^{-1} Q.
  std::vector<double> m0_, m1_, m2_;
};

/// Fits a smoothing spline; duplicated lambda values are averaged first.
/// Throws ArgumentError for mismatched or non-finite input or fewer than two
/// distinct lambda values.
SmoothingSpline fit_spline(std::span<const double> lambda, std::span<const double> y,
                           SplineTarget target);

inline double eval_spline(const SmoothingSpline& s, double lambda) { return s(lambda); }

}  // namespace pmaug
