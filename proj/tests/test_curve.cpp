#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pmaug/curve.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/errors.hpp"

using namespace pmaug;

namespace {

PointCloud curve_points(const std::vector<double>& t, double (*fx)(double), double (*fy)(double)) {
  PointCloud c(2);
  for (double v : t) c.push_back(std::vector<double>{fx(v), fy(v)});
  return c;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Interpolating curve through 40 samples of a spiral arm.
PrincipalCurve curled_curve() {
  const auto t = linspace(0.0, 1.0, 40);
  PointCloud pts(2);
  for (double v : t) pts.push_back(spiral_arm_point(v, 0, 3));
  return expectation_step(t, pts, DfPolicy::interpolate());
}

struct Brute {
  double lambda, dist;
};

// Dense scan of arc length with ties going to the larger value.
class BruteProjector {
 public:
  BruteProjector(const PrincipalCurve& c, std::size_t n) : s_(n), pts_(2 * n) {
    for (std::size_t i = 0; i < n; ++i) {
      s_[i] = c.length() * static_cast<double>(i) / static_cast<double>(n - 1);
      c.evaluate(s_[i], std::span<double>(pts_.data() + 2 * i, 2));
    }
  }
  Brute operator()(std::span<const double> x) const {
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double dx = x[0] - pts_[2 * i], dy = x[1] - pts_[2 * i + 1];
      const double d = dx * dx + dy * dy;
      if (d <= bd) {
        bd = d;
        best = i;
      }
    }
    return {s_[best], std::sqrt(bd)};
  }

 private:
  std::vector<double> s_, pts_;
};

void check_record_invariants(const PrincipalCurve& curve, const PointCloud& pts,
                             const std::vector<ProjectionRecord>& recs) {
  REQUIRE(recs.size() == pts.size());
  std::vector<std::size_t> idx(recs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return recs[a].lambda < recs[b].lambda; });
  for (std::size_t r = 0; r < idx.size(); ++r) CHECK(recs[idx[r]].order == r + 1);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto p = curve.evaluate(recs[i].lambda);
    for (std::size_t d = 0; d < p.size(); ++d) CHECK(std::abs(p[d] - recs[i].projected[d]) < 1e-9);
    CHECK(std::abs(distance(pts.point(i), recs[i].projected) - recs[i].distance) < 1e-12);
  }
}

}  // namespace

TEST_CASE("line data is its own principal curve") {
  PointCloud line(2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double t = u(rng);
    line.push_back(std::vector<double>{1.0 + 0.6 * t, -2.0 + 0.8 * t});
  }
  for (auto init : {CurveInit::kPrincipalComponent, CurveInit::kAuto}) {
    FitOptions o;
    o.init = init;
    const auto fit = fit_principal_curve(line, o);
    const auto& e = fit.report.reconstruction_errors;
    CHECK(e[fit.report.best_iteration - 1] < 1e-10);
    for (const auto& r : fit.records) CHECK(r.distance < 1e-6);
    check_record_invariants(fit.curve, line, fit.records);
  }
}

TEST_CASE("zero-noise spiral arm is recovered") {
  const auto s = generate_spiral_sample({3, 300, 0.0, 7});
  const auto arm = s.cloud.class_subset(0).unlabeled();
  const auto fit = fit_principal_curve(arm);
  double worst = 0.0;
  for (const auto& r : fit.records) worst = std::max(worst, spiral_arm_distance(r.projected, 0, 3));
  CHECK(worst < 0.02 * spiral_arm_length());
  CHECK(fit.curve.length() == doctest::Approx(spiral_arm_length()).epsilon(0.1));
  check_record_invariants(fit.curve, arm, fit.records);
}

namespace {

// Ranks of `recs` by lambda must follow t, in one direction or the other.
bool follows(const std::vector<ProjectionRecord>& recs, const std::vector<double>& t) {
  const std::size_t n = recs.size();
  std::vector<std::size_t> by_t(n), by_order(n);
  std::iota(by_t.begin(), by_t.end(), 0);
  std::sort(by_t.begin(), by_t.end(), [&](auto a, auto b) { return t[a] < t[b]; });
  for (std::size_t i = 0; i < n; ++i) by_order[recs[i].order - 1] = i;
  auto reversed = by_order;
  std::reverse(reversed.begin(), reversed.end());
  return by_order == by_t || reversed == by_t;
}

}  // namespace

TEST_CASE("representative spiral shots are ordered by the arm parameter") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto s = generate_spiral_sample({3, 300, 0.05, seed});
    for (int c = 0; c < 3; ++c) {
      const auto cls = s.cloud.indices_of(c);
      const auto fit = fit_principal_curve(s.cloud.subset(cls).unlabeled());
      const auto sel = select_shots(s.cloud, c, 7, ShotMode::kRepresentative, seed);
      const auto shots = s.cloud.subset(sel.indices).unlabeled();
      std::vector<double> t;
      for (auto i : sel.indices) t.push_back(s.t[i]);
      CAPTURE(seed);
      CAPTURE(c);
      CHECK(follows(projection_step(fit.curve, shots), t));
    }
  }
}

TEST_CASE("shots on an open arc are ordered from the shots alone") {
  for (std::uint64_t seed : {1, 2, 3}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.6, 1.0);
    std::normal_distribution<double> g(0.0, 0.02);
    PointCloud shots(2);
    std::vector<double> t(7);
    for (auto& v : t) {
      v = u(rng);
      auto p = spiral_arm_point(v, 0, 3);
      p[0] += g(rng);
      p[1] += g(rng);
      shots.push_back(p);
    }
    FitOptions o;
    o.df = DfPolicy::interpolate();
    const auto fit = fit_principal_curve(shots, o);
    CHECK(follows(fit.records, t));
    for (const auto& r : fit.records) CHECK(r.distance < 1e-6);
  }
}

TEST_CASE("expectation step") {
  SUBCASE("K shots with df = K are interpolated") {
    const auto t = linspace(0.0, 1.0, 7);
    PointCloud shots(2);
    std::vector<double> lam;
    for (double v : t) {
      shots.push_back(spiral_arm_point(v, 1, 3));
      lam.push_back(3.0 * v + 0.1 * v * v);
    }
    const auto curve = expectation_step(lam, shots, DfPolicy::fixed(7.0));
    for (std::size_t i = 0; i < 7; ++i) {
      double p[2];
      curve.evaluate_raw(lam[i], p);
      CHECK(std::abs(p[0] - shots.point(i)[0]) < 1e-9);
      CHECK(std::abs(p[1] - shots.point(i)[1]) < 1e-9);
    }
  }
  SUBCASE("y = x with lambda = x reproduces the identity") {
    PointCloud pts(2);
    std::vector<double> lam;
    for (double x : linspace(-1.0, 2.0, 20)) {
      pts.push_back(std::vector<double>{x, x});
      lam.push_back(x);
    }
    const auto curve = expectation_step(lam, pts, DfPolicy::adaptive());
    for (double x = -1.5; x < 2.5; x += 0.1) {
      double p[2];
      curve.evaluate_raw(x, p);
      CHECK(std::abs(p[0] - x) < 1e-9);
      CHECK(std::abs(p[1] - x) < 1e-9);
    }
    const auto grid = curve.lambda_grid();
    CHECK(grid.front() == doctest::Approx(-1.15));
    CHECK(grid.back() == doctest::Approx(2.15));
    const auto arc = curve.arc_length_table();
    CHECK(std::is_sorted(arc.begin(), arc.end()));
  }
  SUBCASE("constant coordinate stays constant") {
    PointCloud pts(2);
    std::vector<double> lam;
    for (double x : linspace(0.0, 1.0, 10)) {
      pts.push_back(std::vector<double>{std::sin(3 * x), 4.0});
      lam.push_back(x);
    }
    const auto curve = expectation_step(lam, pts, DfPolicy::adaptive());
    for (double x = 0.0; x <= 1.0; x += 0.05) {
      double p[2];
      curve.evaluate_raw(x, p);
      CHECK(p[1] == 4.0);
    }
  }
  SUBCASE("identical lambdas are degenerate") {
    PointCloud pts(2, {0, 0, 1, 1, 2, 2});
    const std::vector<double> lam{1.0, 1.0, 1.0};
    CHECK_THROWS_AS(expectation_step(lam, pts, DfPolicy::adaptive()), DegeneracyError);
  }
}

TEST_CASE("projection matches a dense brute-force oracle") {
  SUBCASE("circle arc") {
    const auto th = linspace(0.0, 1.5 * std::numbers::pi, 30);
    PointCloud pts(2);
    for (double v : th) pts.push_back(std::vector<double>{2.0 * std::cos(v), 2.0 * std::sin(v)});
    const auto curve = expectation_step(th, pts, DfPolicy::interpolate());
    const BruteProjector brute(curve, 1000000);
    PointCloud q(2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.5, 3.5);
    for (int i = 0; i < 40; ++i) q.push_back(std::vector<double>{u(rng), u(rng)});
    const auto recs = projection_step(curve, q);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto b = brute(q.point(i));
      CHECK(std::abs(recs[i].lambda - b.lambda) < 1e-4);
      CHECK(recs[i].distance <= b.dist + 1e-12);
      CHECK(std::abs(recs[i].distance - b.dist) < 1e-6);
    }
    check_record_invariants(curve, q, recs);
  }
  SUBCASE("curled curve and optimality against random probes") {
    const auto curve = curled_curve();
    const BruteProjector brute(curve, 1000000);
    PointCloud q(2);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 30; ++i) q.push_back(std::vector<double>{u(rng), u(rng)});
    const auto recs = projection_step(curve, q);
    std::uniform_real_distribution<double> probe(0.0, curve.length());
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto b = brute(q.point(i));
      CHECK(std::abs(recs[i].lambda - b.lambda) < 1e-4);
      CHECK(std::abs(recs[i].distance - b.dist) < 1e-6);
      for (int p = 0; p < 1000; ++p)
        CHECK(recs[i].distance <= distance(q.point(i), curve.evaluate(probe(rng))) + 1e-8);
    }
  }
  SUBCASE("point on the curve") {
    const auto curve = curled_curve();
    PointCloud q(2);
    const double s = 0.37 * curve.length();
    q.push_back(curve.evaluate(s));
    const auto r = projection_step(curve, q);
    CHECK(std::abs(r[0].lambda - s) < 1e-6);
    CHECK(r[0].distance < 1e-9);
  }
}

TEST_CASE("exact ties go to the larger projection index") {
  PointCloud pts(2);
  std::vector<double> lam;
  for (double x : linspace(-1.0, 1.0, 9)) {
    pts.push_back(std::vector<double>{x, x * x});
    lam.push_back(x);
  }
  const auto curve = expectation_step(lam, pts, DfPolicy::interpolate());
  PointCloud q(2, {0.0, 2.0});
  const auto r = projection_step(curve, q);
  CHECK(r[0].lambda > 0.5 * curve.length());
}

TEST_CASE("ordering breaks lambda ties by input index") {
  std::vector<ProjectionRecord> recs(5);
  const double lam[] = {2.0, 1.0, 2.0, 0.5, 1.0};
  for (int i = 0; i < 5; ++i) recs[i].lambda = lam[i];
  assign_order(recs);
  const std::size_t expect[] = {4, 2, 5, 1, 3};
  for (int i = 0; i < 5; ++i) CHECK(recs[i].order == expect[i]);
}

TEST_CASE("rigid motion equivariance") {
  const auto s = generate_spiral_sample({3, 150, 0.03, 4});
  const auto arm = s.cloud.class_subset(2).unlabeled();
  const double a = 0.7, ca = std::cos(a), sa = std::sin(a);
  PointCloud moved(2);
  for (std::size_t i = 0; i < arm.size(); ++i) {
    const auto p = arm.point(i);
    moved.push_back(std::vector<double>{ca * p[0] - sa * p[1] + 3.0, sa * p[0] + ca * p[1] - 1.5});
  }
  const auto f0 = fit_principal_curve(arm);
  const auto f1 = fit_principal_curve(moved);
  const std::size_t n = arm.size();
  bool same = true, flipped = true;
  for (std::size_t i = 0; i < n; ++i) {
    same = same && f0.records[i].order == f1.records[i].order;
    flipped = flipped && f0.records[i].order == n + 1 - f1.records[i].order;
  }
  CHECK((same || flipped));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = f0.records[i].projected;
    const double x = ca * p[0] - sa * p[1] + 3.0, y = sa * p[0] + ca * p[1] - 1.5;
    CHECK(std::abs(x - f1.records[i].projected[0]) < 1e-6);
    CHECK(std::abs(y - f1.records[i].projected[1]) < 1e-6);
  }
}

TEST_CASE("Gaussian data: the curve follows the first principal axis") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const std::size_t n = 2000;
  const double sd_major = 3.0, sd_minor = 0.5, a = 0.4;
  PointCloud pts(2);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sd_major * g(rng), v = sd_minor * g(rng);
    pts.push_back(std::vector<double>{std::cos(a) * u - std::sin(a) * v, std::sin(a) * u + std::cos(a) * v});
  }
  FitOptions o;
  o.init = CurveInit::kPrincipalComponent;
  o.df = DfPolicy::fixed(5.0);
  const auto fit = fit_principal_curve(pts, o);

  // Sample PC1 line through the mean.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += pts.point(i)[0];
    my += pts.point(i)[1];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = pts.point(i)[0] - mx, dy = pts.point(i)[1] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double ang = 0.5 * std::atan2(2 * sxy, sxx - syy);
  const double nx = -std::sin(ang), ny = std::cos(ang);

  // Pointwise standard error of a df-parameter smoother of the minor-axis noise.
  const double se = sd_minor * std::sqrt(5.0 / static_cast<double>(n));
  const double len = fit.curve.length();
  for (double s = 0.1 * len; s <= 0.9 * len; s += 0.01 * len) {
    const auto p = fit.curve.evaluate(s);
    CHECK(std::abs((p[0] - mx) * nx + (p[1] - my) * ny) < 3.0 * se);
  }
}

TEST_CASE("fit report and best iterate") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto arm = generate_spiral(3, 300, 0.05, seed).class_subset(1).unlabeled();
    for (auto init : {CurveInit::kPrincipalComponent, CurveInit::kAuto}) {
      FitOptions o;
      o.init = init;
      const auto fit = fit_principal_curve(arm, o);
      const auto& e = fit.report.reconstruction_errors;
      REQUIRE(e.size() == fit.report.iterations);
      for (double v : e) CHECK(v >= 0.0);
      CHECK(e[fit.report.best_iteration - 1] <= e[0]);
      CHECK(e[fit.report.best_iteration - 1] == *std::min_element(e.begin(), e.end()));
      double sum = 0.0;
      for (const auto& r : fit.records) sum += r.distance * r.distance;
      CHECK(sum == doctest::Approx(e[fit.report.best_iteration - 1]).epsilon(1e-9));
    }
  }
}

TEST_CASE("serial and parallel fits are bitwise identical") {
  const auto arm = generate_spiral(3, 300, 0.05, 9).class_subset(0).unlabeled();
  FitOptions a, b;
  a.exec = ExecPolicy::kSerial;
  b.exec = ExecPolicy::kParallel;
  const auto fa = fit_principal_curve(arm, a);
  const auto fb = fit_principal_curve(arm, b);
  CHECK(fa.report.reconstruction_errors == fb.report.reconstruction_errors);
  for (std::size_t i = 0; i < arm.size(); ++i) {
    CHECK(fa.records[i].lambda == fb.records[i].lambda);
    CHECK(fa.records[i].projected == fb.records[i].projected);
  }
  CHECK(graph_geodesic_scores(arm, 10, ExecPolicy::kSerial) == graph_geodesic_scores(arm, 10, ExecPolicy::kParallel));
}

TEST_CASE("curve json round trip") {
  const auto curve = curled_curve();
  const auto back = PrincipalCurve::from_json(curve.to_json());
  CHECK(back.length() == curve.length());
  for (double s = 0.0; s < curve.length(); s += 0.3) CHECK(back.evaluate(s) == curve.evaluate(s));
}

TEST_CASE("fit preconditions") {
  PointCloud three(2, {0, 0, 1, 1, 2, 0});
  CHECK_THROWS_AS(fit_principal_curve(three), ArgumentError);
  PointCloud one_d(1, {0, 1, 2, 3, 4});
  CHECK_THROWS_AS(fit_principal_curve(one_d), ArgumentError);
  PointCloud same(2, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  CHECK_THROWS_AS(fit_principal_curve(same), DegeneracyError);
}
