#include "pmaug/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "pmaug/errors.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("truncated IDX header in " + path.string());
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::array<double, 2> spiral_arm_point(double t, int cls, int num_classes) {
  const double r = 0.5 + 2.0 * t;
  const double theta = 3.0 * std::numbers::pi * t + 2.0 * std::numbers::pi * cls / num_classes;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double spiral_arm_distance(std::span<const double> p, int cls, int num_classes) {
  if (p.size() != 2) throw ArgumentError("spiral_arm_distance: point must be 2-D");
  auto dist2 = [&](double t) {
    const auto a = spiral_arm_point(t, cls, num_classes);
    const double dx = p[0] - a[0], dy = p[1] - a[1];
    return dx * dx + dy * dy;
  };
  constexpr int kSamples = 4000;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kSamples; ++i) {
    const double d = dist2(static_cast<double>(i) / kSamples);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kSamples);
  double hi = std::min(kSamples, best + 1) / static_cast<double>(kSamples);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = dist2(a), fb = dist2(b);
  for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
    if (fa < fb) {
      hi = b, b = a, fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = dist2(a);
    } else {
      lo = a, a = b, fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = dist2(b);
    }
  }
  return std::sqrt(std::min({best_d, fa, fb}));
}

double spiral_arm_length() {
  // Simpson's rule on |d/dt (r cos theta, r sin theta)| = sqrt(r'^2 + (r theta')^2).
  auto speed = [](double t) {
    const double r = 0.5 + 2.0 * t;
    const double w = 3.0 * std::numbers::pi;
    return std::sqrt(4.0 + r * r * w * w);
  };
  constexpr int n = 20000;
  double s = speed(0.0) + speed(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * speed(static_cast<double>(i) / n);
  return s / (3.0 * n);
}

SpiralSample generate_spiral_sample(const SpiralParams& params) {
  if (params.num_classes < 2) throw ArgumentError("generate_spiral: num_classes must be >= 2");
  if (params.samples_per_class < 1)
    throw ArgumentError("generate_spiral: samples_per_class must be >= 1");
  if (!(params.noise_sd >= 0.0) || !std::isfinite(params.noise_sd))
    throw ArgumentError("generate_spiral: noise_sd must be finite and >= 0");

  Rng param_rng(derive_seed(params.seed, "spiral.t"));
  Rng noise_rng(derive_seed(params.seed, "spiral.noise"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<double> t_shared(params.samples_per_class);
  for (double& t : t_shared) t = unit(param_rng);

  SpiralSample out{PointCloud(2), {}};
  out.t.reserve(params.samples_per_class * params.num_classes);
  for (int c = 0; c < params.num_classes; ++c) {
    for (double t : t_shared) {
      auto p = spiral_arm_point(t, c, params.num_classes);
      if (params.noise_sd > 0.0) {
        p[0] += params.noise_sd * jitter(noise_rng);
        p[1] += params.noise_sd * jitter(noise_rng);
      }
      out.cloud.push_back(p, c);
      out.t.push_back(t);
    }
  }
  return out;
}

PointCloud generate_spiral(int num_classes, std::size_t samples_per_class, double noise_sd,
                           std::uint64_t seed) {
  return generate_spiral_sample({num_classes, samples_per_class, noise_sd, seed}).cloud;
}

PointCloud load_idx_images(const std::filesystem::path& images_path,
                           const std::filesystem::path& labels_path, std::size_t downsample) {
  if (downsample == 0) throw ArgumentError("load_idx_images: downsample must be positive");

  auto img = open_binary(images_path);
  if (const auto magic = read_be32(img, images_path); magic != kIdxImagesMagic)
    throw FormatError("bad IDX image magic in " + images_path.string());
  const std::size_t count = read_be32(img, images_path);
  const std::size_t rows = read_be32(img, images_path);
  const std::size_t cols = read_be32(img, images_path);
  if (rows % downsample != 0 || cols % downsample != 0)
    throw ArgumentError("load_idx_images: downsample factor must divide the image size");

  auto lab = open_binary(labels_path);
  if (const auto magic = read_be32(lab, labels_path); magic != kIdxLabelsMagic)
    throw FormatError("bad IDX label magic in " + labels_path.string());
  const std::size_t label_count = read_be32(lab, labels_path);
  if (label_count != count)
    throw ConsistencyError("IDX image count " + std::to_string(count) +
                           " does not match label count " + std::to_string(label_count));

  const std::size_t out_rows = rows / downsample, out_cols = cols / downsample;
  const double denom = 255.0 * static_cast<double>(downsample * downsample);
  PointCloud cloud(out_rows * out_cols);
  std::vector<unsigned char> pixels(rows * cols);
  std::vector<double> feature(out_rows * out_cols);
  for (std::size_t n = 0; n < count; ++n) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size())))
      throw FormatError("truncated IDX image data in " + images_path.string());
    unsigned char label = 0;
    if (!lab.read(reinterpret_cast<char*>(&label), 1))
      throw FormatError("truncated IDX label data in " + labels_path.string());
    for (std::size_t r = 0; r < out_rows; ++r) {
      for (std::size_t c = 0; c < out_cols; ++c) {
        unsigned sum = 0;
        for (std::size_t dr = 0; dr < downsample; ++dr)
          for (std::size_t dc = 0; dc < downsample; ++dc)
            sum += pixels[(r * downsample + dr) * cols + c * downsample + dc];
        feature[r * out_cols + c] = static_cast<double>(sum) / denom;
      }
    }
    cloud.push_back(feature, label);
  }
  return cloud;
}

void write_idx_images(const std::filesystem::path& path, std::span<const std::uint8_t> pixels,
                      std::size_t count, std::size_t rows, std::size_t cols) {
  if (pixels.size() != count * rows * cols)
    throw ArgumentError("write_idx_images: pixel buffer size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(count));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

ShotSelection select_shots(const PointCloud& cloud, int class_id, std::size_t k, ShotMode mode,
                           std::uint64_t seed) {
  auto members = cloud.indices_of(class_id);
  if (k < 2) throw ArgumentError("select_shots: K must be >= 2");
  if (k > members.size())
    throw ArgumentError("select_shots: K=" + std::to_string(k) + " exceeds class size " +
                        std::to_string(members.size()));

  ShotSelection sel{class_id, {}, mode};
  if (mode == ShotMode::kRandom) {
    Rng rng(derive_seed(seed, "select_shots.random"));
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
    }
    sel.indices.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
    return sel;
  }

  const std::size_t m = members.size();
  auto d = [&](std::size_t a, std::size_t b) {
    return distance(cloud.point(members[a]), cloud.point(members[b]));
  };
  std::size_t medoid = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < m; ++b) s += d(a, b);
    if (s < best_sum) {
      best_sum = s;
      medoid = a;
    }
  }
  std::vector<double> nearest(m);
  for (std::size_t a = 0; a < m; ++a) nearest[a] = d(a, medoid);
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(m, false);
  while (chosen.size() < k) {
    std::size_t far = m;
    for (std::size_t a = 0; a < m; ++a)
      if (!taken[a] && (far == m || nearest[a] > nearest[far])) far = a;
    chosen.push_back(far);
    taken[far] = true;
    if (chosen.size() == 1) std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < m; ++a) nearest[a] = std::min(nearest[a], d(a, far));
  }
  for (std::size_t a : chosen) sel.indices.push_back(members[a]);
  return sel;
}

}  // namespace pmaug
