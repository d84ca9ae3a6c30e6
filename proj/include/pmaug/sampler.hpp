#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmaug/autoencoder.hpp"
#include "pmaug/curve.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

enum class GenerationMode { kLinearOrdered, kSplineOrdered, kLinearRandom };
enum class NoiseKind { kUniform, kGaussian };

std::string to_string(GenerationMode m);
GenerationMode generation_mode_from_string(const std::string& s);
std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

struct PlanOptions {
  std::size_t total = 300;
  /// Noise half-width; defaults to 0.05 x median consecutive-shot distance.
  std::optional<double> tau;
  GenerationMode mode = GenerationMode::kSplineOrdered;
  NoiseKind noise = NoiseKind::kUniform;
  std::uint64_t seed = 0;
  /// Curve the shots are ordered along. When null, an interpolating skeleton
  /// through the shots alone is fitted.
  const PrincipalCurve* reference = nullptr;
};

struct GenerationPlan {
  PrincipalCurve curve;
  PointCloud shots;                         ///< distinct shots in ascending lambda order
  std::vector<std::size_t> shot_indices;    ///< input row of each ordered shot
  std::vector<double> ordered_shot_lambdas; ///< strictly increasing
  std::vector<std::size_t> counts;          ///< samples per gap, sums to total
  std::size_t total = 0;
  double tau = 0.0;
  GenerationMode mode = GenerationMode::kSplineOrdered;
  NoiseKind noise = NoiseKind::kUniform;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct GeneratedSet {
  PointCloud samples;
  PointCloud backbone;           ///< noise-free point behind each sample
  std::vector<double> lambdas;   ///< generation parameter of each sample
  std::vector<std::size_t> order;///< sample indices by ascending lambda

  /// Samples rearranged into lambda order.
  PointCloud ordered_samples() const;
};

/// Largest-remainder apportionment of `total` proportionally to `weights`.
/// Remainder ties go to the earlier entry.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total);

/// Orders the shots along the reference (or a shots-only interpolating
/// skeleton), merges shots with equal lambda and apportions the total across
/// the gaps. Throws ArgumentError for total = 0 or too few shots and
/// DegeneracyError when the shots collapse to a single lambda.
GenerationPlan plan_generation(const PointCloud& shots, const PlanOptions& options);

/// Interior lambda points spaced uniformly within each gap, plus noise. Uniform
/// noise stays within tau of the backbone in every coordinate.
GeneratedSet generate(const GenerationPlan& plan);

/// Decoded samples in lambda order.
PointCloud decode_generated(const GeneratedSet& set, const AutoencoderModel& model);

/// Diagonal Gaussian fitted to the shots (variance floored at 1e-8).
PointCloud gaussian_baseline(const PointCloud& shots, std::size_t total, std::uint64_t seed);

}  // namespace pmaug
