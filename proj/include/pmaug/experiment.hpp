#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "pmaug/autoencoder.hpp"
#include "pmaug/curve.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/eval.hpp"
#include "pmaug/sampler.hpp"

namespace pmaug {

struct SpiralExperimentConfig {
  int num_classes = 3;
  std::size_t samples_per_class = 300;
  double noise_sd = 0.05;
  std::size_t shots = 7;
  ShotMode shot_mode = ShotMode::kRandom;
  std::size_t generated_per_class = 300;
  std::optional<double> tau;
  GenerationMode mode = GenerationMode::kSplineOrdered;
  NoiseKind noise = NoiseKind::kUniform;
  std::size_t smooth_samples = 50;
  std::size_t num_shuffles = 20;
  ClassifierConfig classifier;
  double min_real_to_generated = 0.95;
  double min_generated_to_real = 0.85;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  ///< no artifacts when empty

  nlohmann::json to_json() const;
};

struct SpiralExperimentResult {
  PointCloud data;
  PointCloud shots;
  PointCloud generated;
  std::vector<double> generated_lambda;
  std::vector<PrincipalCurve> curves;  ///< one per class
  std::vector<FitReport> fit_reports;
  double real_to_generated = 0.0;
  double generated_to_real = 0.0;
  std::vector<SmoothnessReport> smoothness;  ///< one per class
  bool smoothness_ok = false;
  bool passed = false;
  nlohmann::json report;
};

/// Spiral, shots per class, one principal curve per class, generation along
/// it, the two transfer classifiers and the smoothness comparison. Artifacts
/// (CSV, JSON, SVG) go to out_dir when set.
SpiralExperimentResult run_spiral_experiment(const SpiralExperimentConfig& config);

/// Training defaults for the 2-D spiral: batch 1024, beta 100, k 5..15, 1000 epochs.
TrainConfig spiral_train_config();

struct PipelineConfig {
  /// Labeled CSV; when empty and no IDX files are given a spiral is generated.
  std::filesystem::path data;
  std::filesystem::path idx_images;
  std::filesystem::path idx_labels;
  std::size_t downsample = 4;
  int num_classes = 3;
  std::size_t samples_per_class = 300;
  double noise_sd = 0.05;

  int target_class = 0;
  std::size_t shots = 7;
  ShotMode shot_mode = ShotMode::kRandom;
  std::size_t latent_dim = 2;
  std::vector<std::size_t> hidden{32, 32};
  /// Full-batch training so the per-batch intrinsic term sees every class
  /// member; beta = 100 puts it near 17% of the initial loss.
  TrainConfig train = spiral_train_config();
  std::size_t generated = 300;
  std::optional<double> tau;
  GenerationMode mode = GenerationMode::kSplineOrdered;
  std::size_t num_shuffles = 20;
  std::size_t estimate_k1 = 5;
  std::size_t estimate_k2 = 15;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;

  nlohmann::json to_json() const;
};

struct PipelineResult {
  AutoencoderModel model;
  std::vector<EpochRecord> history;
  std::map<int, double> latent_class_dim;  ///< per class, estimation (k1, k2)
  double mean_latent_class_dim = 0.0;      ///< over source classes
  PointCloud decoded;                      ///< in lambda order
  std::vector<double> lambdas;
  SmoothnessReport smoothness;
  nlohmann::json report;
};

/// Autoencoder on the source classes, target shots encoded, latent skeleton
/// and trajectory generation, decoding, smoothness comparison.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Per-class class_dim of the encoded data; classes that are too small or
/// degenerate are left out.
std::map<int, double> latent_class_dims(const AutoencoderModel& model, const PointCloud& data,
                                        std::size_t k1, std::size_t k2);

}  // namespace pmaug
