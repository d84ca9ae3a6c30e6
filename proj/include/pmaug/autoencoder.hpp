#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "pmaug/mlp.hpp"
#include "pmaug/point_cloud.hpp"

namespace pmaug {

/// Encoder e: R^d -> R^latent and mirrored decoder d: R^latent -> R^d, with the
/// weight-decay and intrinsic-dimension weights used by its loss.
struct AutoencoderModel {
  Mlp encoder;
  Mlp decoder;
  std::size_t latent_dim = 0;
  double alpha = 1e-4;
  double beta = 10.0;

  /// Hidden layers are tanh, the latent and reconstruction layers linear.
  static AutoencoderModel make(std::size_t input_dim, std::size_t latent_dim,
                               std::vector<std::size_t> hidden, std::uint64_t seed,
                               double alpha = 1e-4, double beta = 10.0);

  std::size_t input_dim() const { return encoder.input_dim(); }
  void validate() const;

  struct Output {
    std::vector<double> z;
    std::vector<double> reconstruction;
  };
  Output forward(std::span<const double> x) const;

  /// Latent codes of every point, labels kept.
  PointCloud encode(const PointCloud& data) const;
  PointCloud decode(const PointCloud& latents) const;

  nlohmann::json to_json() const;
  static AutoencoderModel from_json(const nlohmann::json& j);
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  /// Puts the intrinsic term near 13% of the initial loss at batch 128 on the spiral.
  double beta = 10.0;
  double alpha = 1e-4;
  std::size_t k1 = 3;
  std::size_t k2 = 8;

  /// Throws ArgumentError on invalid settings.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct LossBreakdown {
  double total = 0.0;
  double recon = 0.0;       ///< sum of squared reconstruction errors
  double weight_reg = 0.0;  ///< alpha * sum of squared weights
  double intrinsic = 0.0;   ///< sum over classes of class_dim of the latents (unweighted)
  std::size_t classes_used = 0;
};

/// total = recon + weight_reg + beta * intrinsic. Classes with fewer than
/// k2 + 1 members in the batch, or whose latents are degenerate, contribute no
/// intrinsic term. Unlabeled batches are treated as one class.
LossBreakdown loss(const AutoencoderModel& model, const PointCloud& batch, std::size_t k1,
                   std::size_t k2);

/// Same value plus its gradient, accumulated into grad_encoder / grad_decoder
/// (sized to the respective parameter counts, overwritten).
LossBreakdown loss_and_gradient(const AutoencoderModel& model, const PointCloud& batch,
                                std::size_t k1, std::size_t k2, std::vector<double>& grad_encoder,
                                std::vector<double>& grad_decoder);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double recon = 0.0;      ///< summed over the whole epoch
  double weight_reg = 0.0; ///< at the end of the epoch
  double intrinsic = 0.0;  ///< mean per batch
  double total = 0.0;      ///< summed batch totals
};

struct TrainResult {
  AutoencoderModel model;
  std::vector<EpochRecord> history;
};

/// Minibatch Adam over a fresh shuffle each epoch. Takes alpha and beta from
/// the config. Throws TrainingError on a non-finite loss or parameter.
TrainResult train(AutoencoderModel model, const PointCloud& data, const TrainConfig& config);

nlohmann::json history_to_json(std::span<const EpochRecord> history);

void save_checkpoint(const AutoencoderModel& model, const TrainConfig& config,
                     std::span<const EpochRecord> history, const std::filesystem::path& path);
AutoencoderModel load_checkpoint(const std::filesystem::path& path);

}  // namespace pmaug
