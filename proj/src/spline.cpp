#include "pmaug/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmaug/errors.hpp"

namespace pmaug {

// ---------------------------------------------------------------------------
// SmoothingSpline

SmoothingSpline SmoothingSpline::from_knot_values(std::vector<double> knots,
                                                  std::span<const double> values,
                                                  std::span<const double> second_derivs,
                                                  double smoothing, bool infinite_smoothing,
                                                  double dof) {
  SmoothingSpline s;
  s.knots_ = std::move(knots);
  s.smoothing_ = smoothing;
  s.infinite_ = infinite_smoothing;
  s.dof_ = dof;
  const std::size_t n = s.knots_.size();
  s.coeffs_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = s.knots_[i + 1] - s.knots_[i];
    const double g0 = values[i], g1 = values[i + 1];
    const double c0 = second_derivs[i], c1 = second_derivs[i + 1];
    s.coeffs_[i] = {g0, (g1 - g0) / h - h * (2.0 * c0 + c1) / 6.0, c0 / 2.0, (c1 - c0) / (6.0 * h)};
  }
  return s;
}

SmoothingSpline SmoothingSpline::constant(std::vector<double> knots, double value) {
  std::vector<double> values(knots.size(), value), zeros(knots.size(), 0.0);
  return from_knot_values(std::move(knots), values, zeros, 0.0, false, 1.0);
}

std::size_t SmoothingSpline::interval(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, coeffs_.size() - 1);
}

double SmoothingSpline::operator()(double t) const {
  if (t < knots_.front()) {
    const auto& c = coeffs_.front();
    return c[0] + c[1] * (t - knots_.front());
  }
  if (t > knots_.back()) {
    const auto& c = coeffs_.back();
    const double h = knots_.back() - knots_[knots_.size() - 2];
    const double end = c[0] + h * (c[1] + h * (c[2] + h * c[3]));
    const double slope = c[1] + h * (2.0 * c[2] + 3.0 * h * c[3]);
    return end + slope * (t - knots_.back());
  }
  const std::size_t i = interval(t);
  const auto& c = coeffs_[i];
  const double s = t - knots_[i];
  return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
}

double SmoothingSpline::derivative(double t) const {
  if (t <= knots_.front()) return coeffs_.front()[1];
  if (t >= knots_.back()) {
    const auto& c = coeffs_.back();
    const double h = knots_.back() - knots_[knots_.size() - 2];
    return c[1] + h * (2.0 * c[2] + 3.0 * h * c[3]);
  }
  const std::size_t i = interval(t);
  const auto& c = coeffs_[i];
  const double s = t - knots_[i];
  return c[1] + s * (2.0 * c[2] + 3.0 * s * c[3]);
}

double SmoothingSpline::second_derivative(double t) const {
  if (t < knots_.front() || t > knots_.back()) return 0.0;
  const std::size_t i = interval(t);
  const auto& c = coeffs_[i];
  return 2.0 * c[2] + 6.0 * (t - knots_[i]) * c[3];
}

nlohmann::json SmoothingSpline::to_json() const {
  nlohmann::json j;
  j["knots"] = knots_;
  j["coefficients"] = coeffs_;
  j["infinite_smoothing"] = infinite_;
  if (!infinite_) j["smoothing"] = smoothing_;
  j["dof"] = dof_;
  return j;
}

SmoothingSpline SmoothingSpline::from_json(const nlohmann::json& j) {
  SmoothingSpline s;
  s.knots_ = j.at("knots").get<std::vector<double>>();
  s.coeffs_ = j.at("coefficients").get<std::vector<std::array<double, 4>>>();
  s.infinite_ = j.value("infinite_smoothing", false);
  s.smoothing_ = s.infinite_ ? std::numeric_limits<double>::infinity() : j.value("smoothing", 0.0);
  s.dof_ = j.value("dof", 0.0);
  if (s.knots_.size() < 2 || s.coeffs_.size() + 1 != s.knots_.size())
    throw FormatError("spline JSON: inconsistent knots/coefficients");
  return s;
}

// ---------------------------------------------------------------------------
// SplineSmoother

SplineSmoother::SplineSmoother(std::span<const double> lambda) {
  const std::size_t n = lambda.size();
  for (double v : lambda)
    if (!std::isfinite(v)) throw ArgumentError("spline: non-finite lambda");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambda[a] < lambda[b]; });
  group_.assign(n, 0);
  if (n == 0) throw ArgumentError("spline: need at least two distinct lambda values");
  const double range = lambda[order.back()] - lambda[order.front()];
  const double merge_tol = 1e-10 * range;
  double sum = 0.0;
  double count = 0.0;
  double group_start = lambda[order.front()];
  for (std::size_t r = 0; r < n; ++r) {
    const double v = lambda[order[r]];
    if (count > 0.0 && v - group_start > merge_tol) {
      knots_.push_back(sum / count);
      weights_.push_back(count);
      sum = count = 0.0;
      group_start = v;
    }
    sum += v;
    count += 1.0;
    group_[order[r]] = knots_.size();
  }
  knots_.push_back(sum / count);
  weights_.push_back(count);
  if (knots_.size() < 2) throw ArgumentError("spline: need at least two distinct lambda values");

  const std::size_t k = knots_.size();
  h_.resize(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) h_[i] = knots_[i + 1] - knots_[i];

  const std::size_t m = k - 2;
  m0_.assign(m, 0.0);
  m1_.assign(m, 0.0);
  m2_.assign(m, 0.0);
  auto qa = [&](std::size_t j) { return 1.0 / h_[j]; };
  auto qb = [&](std::size_t j) { return -1.0 / h_[j] - 1.0 / h_[j + 1]; };
  auto qc = [&](std::size_t j) { return 1.0 / h_[j + 1]; };
  const auto& w = weights_;
  for (std::size_t j = 0; j < m; ++j) {
    m0_[j] = qa(j) * qa(j) / w[j] + qb(j) * qb(j) / w[j + 1] + qc(j) * qc(j) / w[j + 2];
    if (j + 1 < m) m1_[j] = qb(j) * qa(j + 1) / w[j + 1] + qc(j) * qb(j + 1) / w[j + 2];
    if (j + 2 < m) m2_[j] = qc(j) * qa(j + 2) / w[j + 2];
  }
}

void SplineSmoother::penalty_bands(double smoothing, std::vector<double>& b0,
                                   std::vector<double>& b1, std::vector<double>& b2) const {
  const std::size_t m = m0_.size();
  b0.resize(m);
  b1.resize(m);
  b2.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    b0[j] = (h_[j] + h_[j + 1]) / 3.0 + smoothing * m0_[j];
    b1[j] = (j + 1 < m ? h_[j + 1] / 6.0 : 0.0) + smoothing * m1_[j];
    b2[j] = smoothing * m2_[j];
  }
}

// LDL^T of the symmetric pentadiagonal R + smoothing * Q^T W^{-1} Q.
SplineSmoother::Factor SplineSmoother::factor(double smoothing) const {
  std::vector<double> b0, b1, b2;
  penalty_bands(smoothing, b0, b1, b2);
  const std::size_t m = b0.size();
  Factor f{std::vector<double>(m), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    double d = b0[i];
    if (i >= 1) d -= f.l1[i - 1] * f.l1[i - 1] * f.d[i - 1];
    if (i >= 2) d -= f.l2[i - 2] * f.l2[i - 2] * f.d[i - 2];
    f.d[i] = d;
    double e = b1[i];
    if (i >= 1) e -= f.l2[i - 1] * f.l1[i - 1] * f.d[i - 1];
    f.l1[i] = e / d;
    f.l2[i] = b2[i] / d;
  }
  return f;
}

double SplineSmoother::degrees_of_freedom(double smoothing) const {
  const double n = static_cast<double>(knots_.size());
  if (knots_.size() == 2 || smoothing == 0.0) return n;
  if (std::isinf(smoothing)) return 2.0;
  const Factor f = factor(smoothing);
  const std::size_t m = f.d.size();
  // Central band of B^{-1} by the backward recursion
  // S = D^{-1} L^{-1} + (I - L^T) S, restricted to |i - j| <= 2.
  std::vector<double> s0(m), s1(m, 0.0), s2(m, 0.0);
  for (std::size_t ii = m; ii-- > 0;) {
    const double a = f.l1[ii], b = f.l2[ii];
    const double s11 = ii + 1 < m ? s0[ii + 1] : 0.0;
    const double s22 = ii + 2 < m ? s0[ii + 2] : 0.0;
    const double s12 = ii + 1 < m ? s1[ii + 1] : 0.0;
    if (ii + 2 < m) s2[ii] = -a * s12 - b * s22;
    if (ii + 1 < m) s1[ii] = -a * s11 - b * s12;
    s0[ii] = 1.0 / f.d[ii] - a * s1[ii] - b * s2[ii];
  }
  double tr = 0.0;
  for (std::size_t j = 0; j < m; ++j) tr += s0[j] * m0_[j] + 2.0 * (s1[j] * m1_[j] + s2[j] * m2_[j]);
  return n - smoothing * tr;
}

double SplineSmoother::smoothing_for_dof(double df) const {
  const double n = static_cast<double>(knots_.size());
  if (!(df > 0.0)) throw ArgumentError("spline: df target must be positive");
  if (df >= n - 1e-12) return 0.0;
  if (df <= 2.0 + 1e-12) return std::numeric_limits<double>::infinity();
  const double hbar = (knots_.back() - knots_.front()) / (n - 1.0);
  const double wbar = std::accumulate(weights_.begin(), weights_.end(), 0.0) / n;
  const double centre = std::log(hbar * hbar * hbar * wbar);
  double lo = centre - 60.0, hi = centre + 60.0;
  while (degrees_of_freedom(std::exp(lo)) < df) lo -= 20.0;
  while (degrees_of_freedom(std::exp(hi)) > df && hi < 700.0) hi += 20.0;
  double best = std::exp(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = degrees_of_freedom(std::exp(mid));
    best = std::exp(mid);
    if (std::abs(val - df) < 1e-3) break;
    if (val > df)
      lo = mid;
    else
      hi = mid;
  }
  return best;
}

std::vector<double> SplineSmoother::knot_means(std::span<const double> y) const {
  if (y.size() != group_.size()) throw ArgumentError("spline: lambda and y lengths differ");
  std::vector<double> ybar(knots_.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw ArgumentError("spline: non-finite response");
    ybar[group_[i]] += y[i];
  }
  for (std::size_t k = 0; k < ybar.size(); ++k) ybar[k] /= weights_[k];
  return ybar;
}

SmoothingSpline SplineSmoother::fit_line(std::span<const double> ybar) const {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    sw += weights_[i];
    sx += weights_[i] * knots_[i];
    sy += weights_[i] * ybar[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    sxx += weights_[i] * (knots_[i] - mx) * (knots_[i] - mx);
    sxy += weights_[i] * (knots_[i] - mx) * (ybar[i] - my);
  }
  const double slope = sxy / sxx;
  std::vector<double> g(knots_.size()), zeros(knots_.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = my + slope * (knots_[i] - mx);
  return SmoothingSpline::from_knot_values(knots_, g, zeros,
                                           std::numeric_limits<double>::infinity(), true, 2.0);
}

SmoothingSpline SplineSmoother::fit(std::span<const double> y, double smoothing) const {
  if (!(smoothing >= 0.0)) throw ArgumentError("spline: smoothing must be >= 0");
  const auto ybar = knot_means(y);
  if (std::isinf(smoothing)) return fit_line(ybar);

  const std::size_t n = knots_.size();
  std::vector<double> gamma(n, 0.0);
  std::vector<double> g = ybar;
  if (n > 2) {
    const std::size_t m = n - 2;
    std::vector<double> rhs(m);
    for (std::size_t j = 0; j < m; ++j)
      rhs[j] = (ybar[j] - ybar[j + 1]) / h_[j] + (ybar[j + 2] - ybar[j + 1]) / h_[j + 1];
    const Factor f = factor(smoothing);
    for (std::size_t i = 0; i < m; ++i) {
      if (i >= 1) rhs[i] -= f.l1[i - 1] * rhs[i - 1];
      if (i >= 2) rhs[i] -= f.l2[i - 2] * rhs[i - 2];
    }
    for (std::size_t i = 0; i < m; ++i) rhs[i] /= f.d[i];
    for (std::size_t ii = m; ii-- > 0;) {
      if (ii + 1 < m) rhs[ii] -= f.l1[ii] * rhs[ii + 1];
      if (ii + 2 < m) rhs[ii] -= f.l2[ii] * rhs[ii + 2];
    }
    for (std::size_t j = 0; j < m; ++j) gamma[j + 1] = rhs[j];
    if (smoothing > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        double qg = 0.0;
        if (i < m) qg += rhs[i] / h_[i];
        if (i >= 1 && i - 1 < m) qg += (-1.0 / h_[i - 1] - 1.0 / h_[i]) * rhs[i - 1];
        if (i >= 2) qg += rhs[i - 2] / h_[i - 1];
        g[i] = ybar[i] - smoothing * qg / weights_[i];
      }
    }
  }
  return SmoothingSpline::from_knot_values(knots_, g, gamma, smoothing, false,
                                           degrees_of_freedom(smoothing));
}

SmoothingSpline fit_spline(std::span<const double> lambda, std::span<const double> y,
                           SplineTarget target) {
  if (lambda.size() != y.size()) throw ArgumentError("fit_spline: lambda and y lengths differ");
  SplineSmoother smoother(lambda);
  switch (target.kind) {
    case SplineTarget::Kind::kInfinite:
      return smoother.fit(y, std::numeric_limits<double>::infinity());
    case SplineTarget::Kind::kSmoothing:
      return smoother.fit(y, target.value);
    case SplineTarget::Kind::kDegreesOfFreedom:
      return smoother.fit(y, smoother.smoothing_for_dof(target.value));
  }
  return {};
}

}  // namespace pmaug
