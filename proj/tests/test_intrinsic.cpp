#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "pmaug/errors.hpp"
#include "pmaug/intrinsic.hpp"
#include "pmaug/seed.hpp"

using namespace pmaug;

namespace {

PointCloud uniform_cube(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(m * n);
  for (auto& v : c) v = u(rng);
  return PointCloud(m, std::move(c));
}

PointCloud random_gaussian(std::size_t d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> c(d * n);
  for (auto& v : c) v = g(rng);
  return PointCloud(d, std::move(c));
}

double max_rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST_CASE("local estimate formula") {
  const std::size_t k = 11;
  std::vector<double> t(k);
  for (std::size_t j = 1; j <= k; ++j) t[j - 1] = std::sqrt(static_cast<double>(j) / k);
  double sum = 0.0;
  for (std::size_t j = 1; j < k; ++j) sum += std::log(t[k - 1] / t[j - 1]);
  const double expected = 1.0 / (sum / static_cast<double>(k - 1));
  CHECK(local_dim_from_distances(t, k) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(2.0).epsilon(0.25));

  const std::vector<double> equal(5, 0.7);
  CHECK_THROWS_AS(local_dim_from_distances(equal, 5), DegeneracyError);
  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS_AS(local_dim_from_distances(zeros, 5), DegeneracyError);
  CHECK_THROWS_AS(local_dim_from_distances(t, 1), ArgumentError);
}

TEST_CASE("local_dim uses the k nearest neighbours") {
  PointCloud pts(1, {0.0, 1.0, -2.0, 3.0, 10.0});
  const std::vector<double> d{1.0, 2.0, 3.0};
  CHECK(local_dim(0, pts, 3) == doctest::Approx(local_dim_from_distances(d, 3)).epsilon(1e-15));
  PointCloud dup(1, {0.0, 0.0, 0.0, 0.0, 1.0});
  CHECK_THROWS_AS(local_dim(0, dup, 3), DegeneracyError);
}

TEST_CASE("segment estimates are close to one") {
  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pts = uniform_cube(1, 100, seed);
    double mean = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) mean += local_dim(i, pts, 10);
    total += mean / static_cast<double>(pts.size());
  }
  total /= 20.0;
  CHECK(total >= 0.85);
  CHECK(total <= 1.15);
}

TEST_CASE("class_dim on cubes") {
  double square = 0.0, five = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) square += class_dim(uniform_cube(2, 2000, seed), 5, 15).aggregate;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) five += class_dim(uniform_cube(5, 2000, seed), 5, 15).aggregate;
  square /= 20.0;
  five /= 5.0;
  // Interior mean of the estimator is m(k-1)/(k-2); edges pull it down a little.
  double bias = 0.0;
  for (double k = 5; k <= 15; ++k) bias += (k - 1) / (k - 2) / 11.0;
  CHECK(square >= 1.8);
  CHECK(square <= 2.0 * bias);
  CHECK(square > 2.0);
  CHECK(five >= 4.2);
  CHECK(five <= 5.4);
}

TEST_CASE("class_dim aggregate and range") {
  const auto pts = uniform_cube(3, 300, 4);
  const auto est = class_dim(pts, 4, 9);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    REQUIRE(est.per_point_local[i].size() == 6);
    for (std::size_t k = 4; k <= 9; ++k) {
      const double v = est.per_point_local[i][k - 4];
      CHECK(v > 0.0);
      CHECK(v == doctest::Approx(local_dim(i, pts, k)).epsilon(1e-14));
      sum += v;
      ++count;
    }
  }
  CHECK(std::abs(est.aggregate - sum / static_cast<double>(count)) < 1e-12);

  const auto single = class_dim(pts, 6, 6);
  double mean6 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) mean6 += local_dim(i, pts, 6);
  CHECK(std::abs(single.aggregate - mean6 / static_cast<double>(pts.size())) < 1e-12);

  CHECK_THROWS_AS(class_dim(pts, 1, 5), ArgumentError);
  CHECK_THROWS_AS(class_dim(pts, 6, 5), ArgumentError);
  CHECK_THROWS_AS(class_dim(pts, 5, 300), ArgumentError);
}

TEST_CASE("duplicates are excluded, not fatal") {
  auto pts = uniform_cube(2, 50, 2);
  std::vector<double> c = pts.coords();
  for (int r = 0; r < 4; ++r) c.insert(c.end(), {5.0, 5.0});
  PointCloud with_dups(2, c);
  const auto est = class_dim(with_dups, 3, 3);
  CHECK(est.excluded.size() == 4);
  for (auto i : est.excluded) CHECK(i >= 50);
  CHECK(est.per_point_local[50].empty());
  PointCloud all_same(2, std::vector<double>(20, 1.0));
  CHECK_THROWS_AS(class_dim(all_same, 2, 3), DegeneracyError);
}

TEST_CASE("similarity invariance") {
  const auto pts = random_gaussian(3, 200, 6);
  const double c = std::cos(0.9), s = std::sin(0.9);
  std::vector<double> moved;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto p = pts.point(i);
    moved.push_back(7.5 * (c * p[0] - s * p[1]) + 1.0);
    moved.push_back(7.5 * (s * p[0] + c * p[1]) - 3.0);
    moved.push_back(7.5 * p[2] + 0.25);
  }
  const PointCloud q(3, moved);
  CHECK(std::abs(class_dim(pts, 5, 15).aggregate - class_dim(q, 5, 15).aggregate) < 1e-9);
  for (std::size_t i = 0; i < 200; i += 13) CHECK(std::abs(local_dim(i, pts, 8) - local_dim(i, q, 8)) < 1e-9);
}

TEST_CASE("analytic gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pts = random_gaussian(3, 30, seed);
    const auto lg = intrinsic_loss_and_gradient(pts, 3, 5);
    CHECK(lg.loss == doctest::Approx(class_dim(pts, 3, 5).aggregate).epsilon(1e-13));
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.coords().size(); ++i) {
      auto c = pts.coords();
      c[i] += h;
      const double up = class_dim(PointCloud(3, c), 3, 5).aggregate;
      c[i] -= 2 * h;
      const double dn = class_dim(PointCloud(3, c), 3, 5).aggregate;
      worst = std::max(worst, max_rel_error(lg.gradient[i], (up - dn) / (2 * h)));
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("loss and gradient scale correctly") {
  const auto pts = random_gaussian(2, 60, 3);
  auto c = pts.coords();
  for (auto& v : c) v *= 10.0;
  const auto a = intrinsic_loss_and_gradient(pts, 3, 8);
  const auto b = intrinsic_loss_and_gradient(PointCloud(2, c), 3, 8);
  CHECK(std::abs(a.loss - b.loss) < 1e-9);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(b.gradient[i] - a.gradient[i] / 10.0) < 1e-12);
}

TEST_CASE("points on a line: loss near one and off-line motion raises it") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> c;
  for (int i = 0; i < 200; ++i) {
    const double t = u(rng);
    c.insert(c.end(), {t, 0.5 * t});
  }
  const PointCloud line(2, c);
  const auto lg = intrinsic_loss_and_gradient(line, 5, 15);
  CHECK(lg.loss == doctest::Approx(1.0).epsilon(0.1));
  std::normal_distribution<double> g(0.0, 0.05);
  auto off = c;
  for (std::size_t i = 0; i < off.size(); i += 2) {
    const double e = g(rng);
    off[i] += -0.5 * e;
    off[i + 1] += e;
  }
  CHECK(class_dim(PointCloud(2, off), 5, 15).aggregate > lg.loss);
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  const auto pts = random_gaussian(4, 500, 9);
  const auto a = class_dim(pts, 5, 15, ExecPolicy::kSerial);
  const auto b = class_dim(pts, 5, 15, ExecPolicy::kParallel);
  CHECK(a.aggregate == b.aggregate);
  CHECK(a.per_point_local == b.per_point_local);
  const auto ga = intrinsic_loss_and_gradient(pts, 3, 8, ExecPolicy::kSerial);
  const auto gb = intrinsic_loss_and_gradient(pts, 3, 8, ExecPolicy::kParallel);
  CHECK(ga.loss == gb.loss);
  CHECK(ga.gradient == gb.gradient);
}

TEST_CASE("estimator bias shrinks with k") {
  const auto pts = uniform_cube(2, 3000, 21);
  CHECK(class_dim(pts, 5, 5).aggregate > class_dim(pts, 50, 50).aggregate);
}

TEST_CASE("Monte-Carlo check at the ball centre") {
  const auto r = mc_validate_theorem1(2, 10000, 20, 500, 1);
  CHECK(r.predicted == doctest::Approx(2.0 * 19.0 / 18.0));
  CHECK(r.predicted_alt == doctest::Approx(2.0 * 18.0 / 19.0));
  CHECK(std::abs(r.mean_local - r.predicted) < 3.0 * r.std_error);
  CHECK(r.agrees());

  const auto one = mc_validate_theorem1(1, 10000, 50, 300, 2);
  CHECK(std::abs(one.mean_local - 1.0) < 0.05);

  const auto small = mc_validate_theorem1(2, 1000, 3, 10, 3);
  CHECK(small.predicted == doctest::Approx(4.0));
  CHECK(small.predicted_alt == doctest::Approx(1.0));

  CHECK_THROWS_AS(mc_validate_theorem1(2, 1000, 2, 10, 1), ArgumentError);
  CHECK(mc_validate_theorem1(3, 2000, 10, 50, 7).mean_local == mc_validate_theorem1(3, 2000, 10, 50, 7).mean_local);
}
