// Serial vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.
#include <benchmark/benchmark.h>

#include <random>

#include "pmaug/curve.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/intrinsic.hpp"
#include "pmaug/knn.hpp"
#include "pmaug/seed.hpp"

using namespace pmaug;

namespace {

ExecPolicy policy(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::kSerial : ExecPolicy::kParallel;
}

PointCloud gaussian_cloud(std::size_t d, std::size_t n) {
  Rng rng(42);
  std::normal_distribution<double> g;
  std::vector<double> c(d * n);
  for (auto& v : c) v = g(rng);
  return PointCloud(d, std::move(c));
}

const PointCloud& cloud() {
  static const PointCloud c = gaussian_cloud(8, 2000);
  return c;
}

const PointCloud& arm() {
  static const PointCloud c = generate_spiral(2, 2000, 0.05, 7).class_subset(0);
  return c;
}

const PrincipalCurve& arm_curve() {
  static const PrincipalCurve c = fit_principal_curve(arm().unlabeled()).curve;
  return c;
}

void BM_KnnAll(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(knn_all(cloud(), 15, policy(state)));
}

void BM_ClassDim(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(class_dim(cloud(), 5, 15, policy(state)));
}

void BM_IntrinsicGradient(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(intrinsic_loss_and_gradient(cloud(), 5, 15, policy(state)));
}

void BM_ProjectionStep(benchmark::State& state) {
  const auto pts = arm().unlabeled();
  const auto& curve = arm_curve();
  for (auto _ : state) benchmark::DoNotOptimize(projection_step(curve, pts, policy(state)));
}

void BM_GeodesicScores(benchmark::State& state) {
  const auto pts = arm().unlabeled();
  for (auto _ : state) benchmark::DoNotOptimize(graph_geodesic_scores(pts, 10, policy(state)));
}

}  // namespace

BENCHMARK(BM_KnnAll)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassDim)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntrinsicGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectionStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GeodesicScores)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
