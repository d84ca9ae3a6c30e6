#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/mlp.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// Mean L2 distance between consecutive samples. Throws ArgumentError for N < 2.
double smoothness(const PointCloud& ordered);

struct SmoothnessReport {
  double ordered_value = 0.0;
  std::vector<double> random_values;
  std::size_t num_shuffles = 0;
  std::uint64_t seed = 0;

  double random_mean() const;
  /// Standard error of random_mean.
  double random_se() const;
  double random_min() const;
  /// ordered_value < random_mean - num_se * random_se.
  bool ordered_beats_random(double num_se = 2.0) const;
  nlohmann::json to_json() const;
};

/// d_smooth in the given order and under `num_shuffles` uniform permutations.
/// Throws ArgumentError for N < 3 or an order that is not a permutation.
SmoothnessReport smoothness_comparison(const PointCloud& samples, std::span<const std::size_t> order,
                                       std::size_t num_shuffles, std::uint64_t seed);

struct ClassifierConfig {
  std::vector<std::size_t> hidden{16, 16};
  double learning_rate = 1e-2;
  std::size_t steps = 3000;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Softmax classifier over standardized inputs.
struct ClassifierModel {
  Mlp net;
  std::vector<int> classes;  ///< label of each output unit
  std::vector<double> mean, scale;
  ClassifierConfig config;
  double train_accuracy = 0.0;

  std::vector<double> probabilities(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

/// Cross-entropy training with Adam on minibatches drawn from per-epoch
/// shuffles. Throws ArgumentError for unlabeled or single-class data.
ClassifierModel train_classifier(const PointCloud& data, const ClassifierConfig& config);

/// Fraction of points whose predicted label equals their label.
double transfer_eval(const ClassifierModel& classifier, const PointCloud& data);

enum class AugmentMethod { kOurs, kGaussian, kNone };
std::string to_string(AugmentMethod m);
AugmentMethod augment_method_from_string(const std::string& s);

struct SweepConfig {
  std::vector<std::size_t> shot_counts{7};
  std::vector<std::size_t> augment_counts{150};
  std::vector<AugmentMethod> methods{AugmentMethod::kOurs, AugmentMethod::kGaussian,
                                     AugmentMethod::kNone};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int num_classes = 3;
  std::size_t samples_per_class = 300;
  double noise_sd = 0.05;
  std::size_t test_per_class = 300;
  ShotMode shot_mode = ShotMode::kRandom;
  ClassifierConfig classifier;
};

struct SweepCell {
  std::size_t shots = 0;
  std::size_t augments = 0;  ///< per class
  AugmentMethod method = AugmentMethod::kNone;
  std::vector<double> accuracies;  ///< one per seed
  double mean = 0.0;
  double sd = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t shots, std::size_t augments, AugmentMethod method) const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Full factorial accuracy grid on the spiral. For every seed: a training
/// pool and an independent test set, shots drawn per class, the training set
/// (shots plus augments) fed to a classifier whose seed depends only on the
/// sweep seed. "ours" generates along the principal curve of the class pool.
SweepResult sweep(const SweepConfig& config);

}  // namespace pmaug
