#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pmaug/point_cloud.hpp"

namespace pmaug {

struct SpiralParams {
  int num_classes = 3;
  std::size_t samples_per_class = 300;
  double noise_sd = 0.05;
  std::uint64_t seed = 0;
};

/// Spiral cloud plus the generating arm parameter t of every point.
struct SpiralSample {
  PointCloud cloud;
  std::vector<double> t;
};

/// Point on arm `cls`: r(t) = 0.5 + 2t, theta(t) = 3*pi*t + 2*pi*cls/num_classes.
std::array<double, 2> spiral_arm_point(double t, int cls, int num_classes);

/// Euclidean distance from `p` to arm `cls` over t in [0, 1]; dense search
/// followed by golden-section refinement.
double spiral_arm_distance(std::span<const double> p, int cls, int num_classes);

/// Arc length of one arm (identical for all arms).
double spiral_arm_length();

/// Labeled 2-D spiral. The t values are drawn once and shared by every arm, so
/// arm c is exactly arm 0 rotated by 2*pi*c/num_classes before jitter.
SpiralSample generate_spiral_sample(const SpiralParams& params);
PointCloud generate_spiral(int num_classes, std::size_t samples_per_class, double noise_sd,
                           std::uint64_t seed);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801),
/// block-averages each image by `downsample` and scales pixels to [0, 1].
PointCloud load_idx_images(const std::filesystem::path& images_path,
                           const std::filesystem::path& labels_path, std::size_t downsample);

void write_idx_images(const std::filesystem::path& path, std::span<const std::uint8_t> pixels,
                      std::size_t count, std::size_t rows, std::size_t cols);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

enum class ShotMode { kRepresentative, kRandom };

struct ShotSelection {
  int class_id = 0;
  std::vector<std::size_t> indices;  // into the source cloud
  ShotMode mode = ShotMode::kRandom;
};

/// K distinct shots of one class.
///
/// Random mode samples uniformly without replacement. Representative mode
/// locates the class medoid, takes the member farthest from it, then keeps
/// adding the member farthest from everything already chosen (the medoid
/// itself only seeds the walk). Ties go to the lower index.
ShotSelection select_shots(const PointCloud& cloud, int class_id, std::size_t k, ShotMode mode,
                           std::uint64_t seed);

}  // namespace pmaug
