#include "pmaug/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "pmaug/errors.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

std::string to_string(GenerationMode m) {
  switch (m) {
    case GenerationMode::kLinearOrdered: return "linear-ordered";
    case GenerationMode::kSplineOrdered: return "spline-ordered";
    case GenerationMode::kLinearRandom: return "linear-random";
  }
  return "?";
}

GenerationMode generation_mode_from_string(const std::string& s) {
  if (s == "linear-ordered" || s == "linear_ordered") return GenerationMode::kLinearOrdered;
  if (s == "spline-ordered" || s == "spline_ordered") return GenerationMode::kSplineOrdered;
  if (s == "linear-random" || s == "linear_random") return GenerationMode::kLinearRandom;
  throw ArgumentError("unknown generation mode '" + s + "'");
}

std::string to_string(NoiseKind k) { return k == NoiseKind::kUniform ? "uniform" : "gaussian"; }

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "uniform") return NoiseKind::kUniform;
  if (s == "gaussian") return NoiseKind::kGaussian;
  throw ArgumentError("unknown noise kind '" + s + "'");
}

nlohmann::json GenerationPlan::to_json() const {
  return {{"mode", to_string(mode)}, {"noise", to_string(noise)},   {"tau", tau},
          {"total", total},          {"seed", seed},                {"counts", counts},
          {"shot_lambdas", ordered_shot_lambdas}, {"shot_indices", shot_indices},
          {"curve_length", curve.length()}};
}

PointCloud GeneratedSet::ordered_samples() const { return samples.subset(order); }

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
  if (weights.empty()) throw ArgumentError("apportion: no weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("apportion: invalid weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw ArgumentError("apportion: weights sum to zero");
  const std::size_t k = weights.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> rem(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    rem[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Floating-point quotas can overshoot by one in pathological cases.
  while (assigned > total) {
    const auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t r = 0; assigned < total; r = (r + 1) % k, ++assigned) ++counts[idx[r]];
  return counts;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

// Interpolating curve through the shots alone.
PrincipalCurve shot_skeleton(const PointCloud& shots) {
  std::vector<double> init;
  if (shots.size() >= 3) init = graph_geodesic_scores(shots, shots.size() - 1, ExecPolicy::kSerial);
  if (init.empty()) init = principal_component_scores(shots);
  FitOptions opts;
  opts.df = DfPolicy::interpolate();
  opts.max_iter = 3;
  opts.exec = ExecPolicy::kSerial;
  return fit_principal_curve_from(shots, init, opts).curve;
}

// x = b + e, nudged so that |x - b| <= tau holds after rounding.
double add_bounded(double b, double e, double tau) {
  double x = b + e;
  while (x - b > tau) x = std::nextafter(x, -std::numeric_limits<double>::infinity());
  while (b - x > tau) x = std::nextafter(x, std::numeric_limits<double>::infinity());
  return x;
}

void add_noise(std::span<const double> backbone, std::span<double> out, double tau, NoiseKind kind,
               Rng& rng) {
  if (kind == NoiseKind::kUniform) {
    std::uniform_real_distribution<double> u(-tau, tau);
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = tau > 0.0 ? add_bounded(backbone[j], u(rng), tau) : backbone[j];
  } else {
    std::normal_distribution<double> g(0.0, tau / std::sqrt(3.0));
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = tau > 0.0 ? backbone[j] + g(rng) : backbone[j];
  }
}

}  // namespace

GenerationPlan plan_generation(const PointCloud& shots, const PlanOptions& options) {
  if (options.total == 0) throw ArgumentError("plan_generation: total must be at least 1");
  const std::size_t min_shots = options.mode == GenerationMode::kSplineOrdered ? 3 : 2;
  if (shots.size() < min_shots)
    throw ArgumentError("plan_generation: " + to_string(options.mode) + " needs at least " +
                        std::to_string(min_shots) + " shots");
  if (options.tau && !(*options.tau >= 0.0)) throw ArgumentError("plan_generation: tau must be >= 0");

  GenerationPlan plan;
  plan.total = options.total;
  plan.mode = options.mode;
  plan.noise = options.noise;
  plan.seed = options.seed;
  if (options.reference != nullptr) {
    if (options.reference->dim() != shots.dim())
      throw ArgumentError("plan_generation: reference curve dimension mismatch");
    plan.curve = *options.reference;
  } else {
    plan.curve = shot_skeleton(shots.unlabeled());
  }

  const auto records = projection_step(plan.curve, shots.unlabeled(), ExecPolicy::kSerial);
  std::vector<std::size_t> by_lambda(records.size());
  std::iota(by_lambda.begin(), by_lambda.end(), 0);
  std::stable_sort(by_lambda.begin(), by_lambda.end(), [&](std::size_t a, std::size_t b) {
    return records[a].lambda < records[b].lambda;
  });
  plan.shots = PointCloud(shots.dim());
  for (std::size_t i : by_lambda) {
    if (!plan.ordered_shot_lambdas.empty() && records[i].lambda <= plan.ordered_shot_lambdas.back())
      continue;
    plan.ordered_shot_lambdas.push_back(records[i].lambda);
    plan.shot_indices.push_back(i);
    plan.shots.push_back(shots.point(i));
  }
  if (plan.ordered_shot_lambdas.size() < 2)
    throw DegeneracyError("plan_generation: shots collapse to a single projection index");

  std::vector<double> gaps, steps;
  for (std::size_t g = 0; g + 1 < plan.ordered_shot_lambdas.size(); ++g) {
    gaps.push_back(plan.ordered_shot_lambdas[g + 1] - plan.ordered_shot_lambdas[g]);
    steps.push_back(distance(plan.shots.point(g), plan.shots.point(g + 1)));
  }
  plan.counts = apportion(gaps, options.total);
  plan.tau = options.tau ? *options.tau : 0.05 * median(steps);
  return plan;
}

GeneratedSet generate(const GenerationPlan& plan) {
  const std::size_t d = plan.shots.dim();
  GeneratedSet out;
  out.samples = PointCloud(d);
  out.backbone = PointCloud(d);
  std::vector<double> b(d), x(d);

  if (plan.mode == GenerationMode::kLinearRandom) {
    Rng rng(derive_seed(plan.seed, "sampler.random"));
    const std::size_t k = plan.shots.size();
    std::uniform_int_distribution<std::size_t> pick(0, k - 1), pick_other(0, k - 2);
    std::uniform_real_distribution<double> mix(0.0, 1.0);
    for (std::size_t s = 0; s < plan.total; ++s) {
      const std::size_t i = pick(rng);
      std::size_t j = pick_other(rng);
      if (j >= i) ++j;
      const double u = mix(rng);
      const auto zi = plan.shots.point(i), zj = plan.shots.point(j);
      for (std::size_t c = 0; c < d; ++c) b[c] = u * zi[c] + (1.0 - u) * zj[c];
      add_noise(b, x, plan.tau, plan.noise, rng);
      out.backbone.push_back(b);
      out.samples.push_back(x);
      out.lambdas.push_back(u);
    }
  } else {
    const std::uint64_t gap_root = derive_seed(plan.seed, "sampler.gap");
    for (std::size_t g = 0; g < plan.counts.size(); ++g) {
      Rng rng(derive_seed(gap_root, static_cast<std::uint64_t>(g)));
      const double l0 = plan.ordered_shot_lambdas[g], l1 = plan.ordered_shot_lambdas[g + 1];
      const std::size_t m = plan.counts[g];
      const auto a = plan.shots.point(g), c = plan.shots.point(g + 1);
      for (std::size_t r = 1; r <= m; ++r) {
        const double frac = static_cast<double>(r) / static_cast<double>(m + 1);
        const double lambda = l0 + frac * (l1 - l0);
        if (plan.mode == GenerationMode::kSplineOrdered)
          plan.curve.evaluate(lambda, b);
        else
          for (std::size_t j = 0; j < d; ++j) b[j] = a[j] + frac * (c[j] - a[j]);
        add_noise(b, x, plan.tau, plan.noise, rng);
        out.backbone.push_back(b);
        out.samples.push_back(x);
        out.lambdas.push_back(lambda);
      }
    }
  }
  out.order.resize(out.lambdas.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t c) {
    return out.lambdas[a] < out.lambdas[c];
  });
  return out;
}

PointCloud decode_generated(const GeneratedSet& set, const AutoencoderModel& model) {
  if (set.samples.dim() != model.latent_dim)
    throw ArgumentError("decode_generated: samples are not in the model's latent space");
  return model.decode(set.ordered_samples());
}

PointCloud gaussian_baseline(const PointCloud& shots, std::size_t total, std::uint64_t seed) {
  if (shots.size() < 2) throw ArgumentError("gaussian_baseline: need at least 2 shots");
  const std::size_t k = shots.size(), d = shots.dim();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += shots.point(i)[j];
  for (double& m : mean) m /= static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double e = shots.point(i)[j] - mean[j];
      sd[j] += e * e;
    }
  for (double& s : sd) s = std::sqrt(std::max(s / static_cast<double>(k - 1), 1e-8));

  Rng rng(derive_seed(seed, "sampler.gaussian"));
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud out(d);
  std::vector<double> x(d);
  for (std::size_t s = 0; s < total; ++s) {
    for (std::size_t j = 0; j < d; ++j) x[j] = mean[j] + sd[j] * g(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace pmaug
