#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pmaug/autoencoder.hpp"
#include "pmaug/curve.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/errors.hpp"
#include "pmaug/sampler.hpp"

using namespace pmaug;

namespace {

PointCloud line_shots(std::initializer_list<double> xs) {
  PointCloud c(2);
  for (double x : xs) c.push_back(std::vector<double>{x, 0.5 * x});
  return c;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("largest-remainder apportionment") {
  CHECK(apportion(std::vector<double>{1.0, 3.0}, 8) == std::vector<std::size_t>{2, 6});
  CHECK(apportion(std::vector<double>{1.0, 2.0}, 4) == std::vector<std::size_t>{1, 3});
  CHECK(apportion(std::vector<double>{1.0, 5.0, 2.0}, 1) == std::vector<std::size_t>{0, 1, 0});
  CHECK(apportion(std::vector<double>{1.0, 1.0}, 1) == std::vector<std::size_t>{1, 0});
  CHECK(apportion(std::vector<double>{1.0, 2.0}, 0) == std::vector<std::size_t>{0, 0});
  CHECK_THROWS_AS(apportion(std::vector<double>{}, 3), ArgumentError);
  CHECK_THROWS_AS(apportion(std::vector<double>{0.0, 0.0}, 3), ArgumentError);
  CHECK_THROWS_AS(apportion(std::vector<double>{1.0, -1.0}, 3), ArgumentError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> w(1 + rng() % 12);
    for (auto& v : w) v = u(rng) < 0.1 ? 0.0 : u(rng);
    if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
    const std::size_t n = rng() % 1000;
    const auto c = apportion(w, n);
    CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == n);
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(static_cast<double>(c[i]) - n * w[i] / sum) < 1.0);
  }
}

TEST_CASE("plan apportions by projection-index gaps") {
  PlanOptions o;
  o.mode = GenerationMode::kLinearOrdered;
  o.total = 8;
  // The curve may run either way; counts follow the gaps in curve order.
  const auto plan = plan_generation(line_shots({0.0, 1.0, 4.0}), o);
  REQUIRE(plan.ordered_shot_lambdas.size() == 3);
  const bool forward = plan.shot_indices.front() == 0;
  const double g1 = plan.ordered_shot_lambdas[1] - plan.ordered_shot_lambdas[0];
  const double g2 = plan.ordered_shot_lambdas[2] - plan.ordered_shot_lambdas[1];
  CHECK((forward ? g2 / g1 : g1 / g2) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(plan.counts == (forward ? std::vector<std::size_t>{2, 6} : std::vector<std::size_t>{6, 2}));

  o.total = 4;
  const auto p2 = plan_generation(line_shots({0.0, 1.0, 3.0}), o);
  CHECK(p2.counts == (p2.shot_indices.front() == 0 ? std::vector<std::size_t>{1, 3} : std::vector<std::size_t>{3, 1}));

  o.total = 1;
  const auto p3 = plan_generation(line_shots({5.0, 0.0, 1.0}), o);
  CHECK(p3.counts == (p3.shot_indices.front() == 1 ? std::vector<std::size_t>{0, 1} : std::vector<std::size_t>{1, 0}));
  // Shots come back sorted along the curve.
  CHECK((p3.shot_indices == std::vector<std::size_t>{1, 2, 0} || p3.shot_indices == std::vector<std::size_t>{0, 2, 1}));

  o.total = 0;
  CHECK_THROWS_AS(plan_generation(line_shots({0.0, 1.0, 3.0}), o), ArgumentError);
}

TEST_CASE("plan preconditions") {
  PlanOptions o;
  o.mode = GenerationMode::kSplineOrdered;
  CHECK_THROWS_AS(plan_generation(line_shots({0.0, 1.0}), o), ArgumentError);
  o.mode = GenerationMode::kLinearOrdered;
  CHECK_NOTHROW(plan_generation(line_shots({0.0, 1.0}), o));
  CHECK_THROWS_AS(plan_generation(line_shots({1.0}), o), ArgumentError);
  CHECK_THROWS_AS(plan_generation(line_shots({2.0, 2.0, 2.0}), o), DegeneracyError);
  o.tau = -1.0;
  CHECK_THROWS_AS(plan_generation(line_shots({0.0, 1.0}), o), ArgumentError);
}

TEST_CASE("noise-free samples lie on the backbone") {
  const auto s = generate_spiral_sample({3, 300, 0.05, 2});
  const auto sel = select_shots(s.cloud, 0, 7, ShotMode::kRandom, 2);
  const auto shots = s.cloud.subset(sel.indices).unlabeled();
  for (auto mode : {GenerationMode::kSplineOrdered, GenerationMode::kLinearOrdered, GenerationMode::kLinearRandom}) {
    PlanOptions o;
    o.mode = mode;
    o.tau = 0.0;
    o.total = 120;
    o.seed = 5;
    const auto plan = plan_generation(shots, o);
    const auto set = generate(plan);
    REQUIRE(set.samples.size() == 120);
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
      CHECK(max_abs_diff(set.samples.point(i), set.backbone.point(i)) == 0.0);
      if (mode == GenerationMode::kSplineOrdered)
        CHECK(max_abs_diff(set.samples.point(i), plan.curve.evaluate(set.lambdas[i])) < 1e-12);
    }
  }
}

TEST_CASE("uniform noise stays within tau") {
  const auto s = generate_spiral_sample({3, 300, 0.05, 3});
  const auto shots = s.cloud.subset(select_shots(s.cloud, 1, 7, ShotMode::kRandom, 3).indices).unlabeled();
  for (double tau : {0.1, 1e-3, 0.37}) {
    for (auto mode : {GenerationMode::kSplineOrdered, GenerationMode::kLinearOrdered, GenerationMode::kLinearRandom}) {
      PlanOptions o;
      o.mode = mode;
      o.tau = tau;
      o.total = 2000;
      const auto set = generate(plan_generation(shots, o));
      double worst = 0.0;
      for (std::size_t i = 0; i < set.samples.size(); ++i)
        worst = std::max(worst, max_abs_diff(set.samples.point(i), set.backbone.point(i)));
      CHECK(worst <= tau);
      CHECK(worst > 0.9 * tau);
    }
  }
}

TEST_CASE("gaussian noise is variance matched") {
  const auto shots = line_shots({0.0, 1.0, 2.0, 4.0});
  PlanOptions o;
  o.mode = GenerationMode::kLinearOrdered;
  o.noise = NoiseKind::kGaussian;
  o.tau = 0.3;
  o.total = 40000;
  const auto set = generate(plan_generation(shots, o));
  double ss = 0.0;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const double e = set.samples.point(i)[0] - set.backbone.point(i)[0];
    ss += e * e;
  }
  CHECK(std::sqrt(ss / 40000.0) == doctest::Approx(0.3 / std::sqrt(3.0)).epsilon(0.02));
}

TEST_CASE("ordered modes generate in ascending lambda") {
  const auto s = generate_spiral_sample({3, 300, 0.05, 4});
  const auto shots = s.cloud.subset(select_shots(s.cloud, 2, 7, ShotMode::kRandom, 4).indices).unlabeled();
  for (auto mode : {GenerationMode::kSplineOrdered, GenerationMode::kLinearOrdered}) {
    PlanOptions o;
    o.mode = mode;
    o.total = 77;
    const auto plan = plan_generation(shots, o);
    CHECK(std::is_sorted(plan.ordered_shot_lambdas.begin(), plan.ordered_shot_lambdas.end()));
    const auto set = generate(plan);
    CHECK(std::is_sorted(set.lambdas.begin(), set.lambdas.end()));
    std::vector<std::size_t> id(77);
    std::iota(id.begin(), id.end(), 0);
    CHECK(set.order == id);
    // Interior points only.
    for (double l : set.lambdas)
      CHECK(std::find(plan.ordered_shot_lambdas.begin(), plan.ordered_shot_lambdas.end(), l) == plan.ordered_shot_lambdas.end());
  }
  PlanOptions o;
  o.mode = GenerationMode::kLinearRandom;
  const auto set = generate(plan_generation(shots, o));
  const auto ord = set.ordered_samples();
  for (std::size_t r = 1; r < set.order.size(); ++r) CHECK(set.lambdas[set.order[r - 1]] <= set.lambdas[set.order[r]]);
  CHECK(ord.size() == set.samples.size());
}

TEST_CASE("generated spiral samples follow the arm") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = generate_spiral_sample({3, 300, 0.05, seed});
    for (int c = 0; c < 3; ++c) {
      const auto cls = s.cloud.class_subset(c).unlabeled();
      const auto ref = fit_principal_curve(cls);
      const auto sel = select_shots(s.cloud, c, 7, ShotMode::kRepresentative, seed);
      const auto shots = s.cloud.subset(sel.indices).unlabeled();
      PlanOptions o;
      o.total = 300;
      o.tau = 0.05;
      o.seed = seed;
      o.reference = &ref.curve;
      const auto set = generate(plan_generation(shots, o));
      std::size_t near = 0;
      double ours = 0.0;
      for (std::size_t i = 0; i < 300; ++i) {
        const double d = spiral_arm_distance(set.samples.point(i), c, 3);
        near += d < 3 * 0.05;
        ours += d / 300.0;
      }
      CHECK(near >= 285);
      const auto gauss = gaussian_baseline(shots, 300, seed);
      double base = 0.0;
      for (std::size_t i = 0; i < 300; ++i) base += spiral_arm_distance(gauss.point(i), c, 3) / 300.0;
      CHECK(ours < base);
    }
  }
}

TEST_CASE("generation is deterministic") {
  const auto shots = generate_spiral(3, 50, 0.05, 1).class_subset(0).unlabeled().subset(std::vector<std::size_t>{0, 7, 14, 21, 28, 35, 42});
  PlanOptions o;
  o.seed = 99;
  const auto a = generate(plan_generation(shots, o));
  const auto b = generate(plan_generation(shots, o));
  CHECK(a.samples.coords() == b.samples.coords());
  o.seed = 100;
  CHECK(generate(plan_generation(shots, o)).samples.coords() != a.samples.coords());
}

TEST_CASE("decoding keeps lambda order") {
  AutoencoderModel id;
  id.encoder = Mlp({{2, 2, Activation::kLinear}});
  id.decoder = Mlp({{2, 2, Activation::kLinear}});
  id.latent_dim = 2;
  id.decoder.weights(0)[0] = id.decoder.weights(0)[3] = 1.0;
  id.encoder.weights(0)[0] = id.encoder.weights(0)[3] = 1.0;
  const auto shots = line_shots({0.0, 2.0, 1.0, 3.0});
  PlanOptions o;
  o.mode = GenerationMode::kLinearRandom;
  o.total = 50;
  const auto set = generate(plan_generation(shots, o));
  const auto dec = decode_generated(set, id);
  CHECK(dec.coords() == set.ordered_samples().coords());

  auto wrong = AutoencoderModel::make(3, 3, {4}, 1);
  CHECK_THROWS_AS(decode_generated(set, wrong), ArgumentError);

  const auto rec = decode_generated(set, AutoencoderModel::make(2, 2, {4}, 1));
  CHECK(rec.size() == 50);
}

TEST_CASE("gaussian baseline") {
  SUBCASE("identical shots collapse to one point") {
    const PointCloud same(2, {1.5, -2.0, 1.5, -2.0, 1.5, -2.0});
    const auto g = gaussian_baseline(same, 100, 1);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(std::abs(g.point(i)[0] - 1.5) < 1e-3);
      CHECK(std::abs(g.point(i)[1] + 2.0) < 1e-3);
    }
  }
  SUBCASE("moments match the shots") {
    const PointCloud shots(2, {0.0, 1.0, 1.0, 3.0, 2.0, 2.0, 5.0, 0.0});
    const double mean[2] = {2.0, 1.5};
    const double var[2] = {(4.0 + 1.0 + 0.0 + 9.0) / 3.0, (0.25 + 2.25 + 0.25 + 2.25) / 3.0};
    const std::size_t n = 100000;
    const auto g = gaussian_baseline(shots, n, 7);
    for (int j = 0; j < 2; ++j) {
      double m = 0.0, v = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += g.point(i)[j];
      m /= n;
      for (std::size_t i = 0; i < n; ++i) v += (g.point(i)[j] - m) * (g.point(i)[j] - m);
      v /= n - 1;
      CHECK(std::abs(m - mean[j]) < 3.0 * std::sqrt(var[j] / n));
      CHECK(v == doctest::Approx(var[j]).epsilon(0.1));
    }
  }
  CHECK_THROWS_AS(gaussian_baseline(PointCloud(2, {1.0, 1.0}), 5, 1), ArgumentError);
}
