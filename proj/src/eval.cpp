#include "pmaug/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "pmaug/curve.hpp"
#include "pmaug/errors.hpp"
#include "pmaug/io.hpp"
#include "pmaug/sampler.hpp"
#include "pmaug/seed.hpp"

namespace pmaug {

double smoothness(const PointCloud& ordered) {
  if (ordered.size() < 2) throw ArgumentError("smoothness: need at least 2 samples");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < ordered.size(); ++i)
    s += distance(ordered.point(i), ordered.point(i + 1));
  return s / static_cast<double>(ordered.size() - 1);
}

double SmoothnessReport::random_mean() const {
  if (random_values.empty()) return 0.0;
  return std::accumulate(random_values.begin(), random_values.end(), 0.0) /
         static_cast<double>(random_values.size());
}

double SmoothnessReport::random_se() const {
  const std::size_t n = random_values.size();
  if (n < 2) return 0.0;
  const double mu = random_mean();
  double ss = 0.0;
  for (double v : random_values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double SmoothnessReport::random_min() const {
  return random_values.empty() ? 0.0 : *std::min_element(random_values.begin(), random_values.end());
}

bool SmoothnessReport::ordered_beats_random(double num_se) const {
  return ordered_value < random_mean() - num_se * random_se();
}

nlohmann::json SmoothnessReport::to_json() const {
  return {{"ordered", ordered_value},     {"random_mean", random_mean()},
          {"random_se", random_se()},     {"random_min", random_min()},
          {"num_shuffles", num_shuffles}, {"seed", seed},
          {"random", random_values}};
}

SmoothnessReport smoothness_comparison(const PointCloud& samples, std::span<const std::size_t> order,
                                       std::size_t num_shuffles, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 3) throw ArgumentError("smoothness_comparison: need at least 3 samples");
  if (order.size() != n) throw ArgumentError("smoothness_comparison: order length mismatch");
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    if (i >= n || seen[i]) throw ArgumentError("smoothness_comparison: order is not a permutation");
    seen[i] = true;
  }
  SmoothnessReport report;
  report.num_shuffles = num_shuffles;
  report.seed = seed;
  report.ordered_value = smoothness(samples.subset(order));
  Rng rng(derive_seed(seed, "smoothness.shuffle"));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t s = 0; s < num_shuffles; ++s) {
    std::shuffle(perm.begin(), perm.end(), rng);
    report.random_values.push_back(smoothness(samples.subset(perm)));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Classifier

nlohmann::json ClassifierConfig::to_json() const {
  return {{"hidden", hidden}, {"learning_rate", learning_rate}, {"steps", steps},
          {"batch_size", batch_size}, {"seed", seed}};
}

namespace {

void softmax(std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) sum += (x = std::exp(x - mx));
  for (double& x : v) x /= sum;
}

std::vector<double> standardize(const ClassifierModel& m, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - m.mean[j]) / m.scale[j];
  return out;
}

}  // namespace

std::vector<double> ClassifierModel::probabilities(std::span<const double> x) const {
  if (x.size() != mean.size()) throw ArgumentError("classifier: input dimension mismatch");
  auto logits = net.forward(standardize(*this, x));
  softmax(logits);
  return logits;
}

int ClassifierModel::predict(std::span<const double> x) const {
  const auto p = probabilities(x);
  return classes[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

ClassifierModel train_classifier(const PointCloud& data, const ClassifierConfig& config) {
  if (!data.has_labels()) throw ArgumentError("train_classifier: data has no labels");
  if (!(config.learning_rate > 0.0) || config.batch_size == 0)
    throw ArgumentError("train_classifier: invalid config");
  ClassifierModel model;
  model.classes = data.classes();
  if (model.classes.size() < 2) throw ArgumentError("train_classifier: need at least 2 classes");
  model.config = config;

  const std::size_t n = data.size(), d = data.dim();
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += data.point(i)[j];
  for (double& m : model.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double e = data.point(i)[j] - model.mean[j];
      model.scale[j] += e * e;
    }
  for (double& s : model.scale) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-8);

  std::map<int, std::size_t> slot;
  for (std::size_t c = 0; c < model.classes.size(); ++c) slot[model.classes[c]] = c;
  std::vector<LayerShape> layers;
  std::size_t prev = d;
  for (std::size_t h : config.hidden) {
    layers.push_back({prev, h, Activation::kTanh});
    prev = h;
  }
  layers.push_back({prev, model.classes.size(), Activation::kLinear});
  model.net = Mlp(layers);
  Rng rng(derive_seed(config.seed, "classifier.init"));
  model.net.init_glorot(rng);

  std::vector<std::vector<double>> inputs(n);
  std::vector<std::size_t> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    inputs[i] = standardize(model, data.point(i));
    targets[i] = slot[data.label(i)];
  }

  Adam opt;
  opt.learning_rate = config.learning_rate;
  std::vector<double> grad(model.net.num_params());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t batch = std::min(config.batch_size, n);
  std::size_t cursor = n;
  Mlp::Tape tape;
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == n) {
        std::shuffle(perm.begin(), perm.end(), rng);
        cursor = 0;
      }
      const std::size_t i = perm[cursor++];
      model.net.forward(inputs[i], tape);
      std::vector<double> p = tape.acts.back();
      softmax(p);
      p[targets[i]] -= 1.0;
      for (double& v : p) v /= static_cast<double>(batch);
      model.net.backward(tape, p, grad);
    }
    opt.step(model.net.params(), grad);
  }
  model.train_accuracy = transfer_eval(model, data);
  return model;
}

double transfer_eval(const ClassifierModel& classifier, const PointCloud& data) {
  if (data.empty()) return 0.0;
  if (!data.has_labels()) throw ArgumentError("transfer_eval: data has no labels");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (classifier.predict(data.point(i)) == data.label(i)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Sweep

std::string to_string(AugmentMethod m) {
  switch (m) {
    case AugmentMethod::kOurs: return "ours";
    case AugmentMethod::kGaussian: return "gaussian";
    case AugmentMethod::kNone: return "none";
  }
  return "?";
}

AugmentMethod augment_method_from_string(const std::string& s) {
  if (s == "ours") return AugmentMethod::kOurs;
  if (s == "gaussian") return AugmentMethod::kGaussian;
  if (s == "none") return AugmentMethod::kNone;
  throw ArgumentError("unknown augmentation method '" + s + "'");
}

const SweepCell& SweepResult::at(std::size_t shots, std::size_t augments,
                                 AugmentMethod method) const {
  for (const auto& c : cells)
    if (c.shots == shots && c.augments == augments && c.method == method) return c;
  throw ArgumentError("sweep: no such cell");
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << "shots,augments,method,mean,sd,n\n";
  for (const auto& c : cells)
    os << c.shots << ',' << c.augments << ',' << to_string(c.method) << ',' << format_double(c.mean)
       << ',' << format_double(c.sd) << ',' << c.accuracies.size() << '\n';
  return os.str();
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells)
    arr.push_back({{"shots", c.shots}, {"augments", c.augments}, {"method", to_string(c.method)},
                   {"mean", c.mean}, {"sd", c.sd}, {"accuracies", c.accuracies}});
  return arr;
}

namespace {

void append(PointCloud& dst, const PointCloud& src, int label) {
  for (std::size_t i = 0; i < src.size(); ++i) dst.push_back(src.point(i), label);
}

}  // namespace

SweepResult sweep(const SweepConfig& config) {
  if (config.shot_counts.empty() || config.augment_counts.empty() || config.methods.empty() ||
      config.seeds.empty())
    throw ArgumentError("sweep: empty grid");

  SweepResult result;
  for (std::size_t s : config.shot_counts)
    for (std::size_t a : config.augment_counts)
      for (AugmentMethod m : config.methods) result.cells.push_back({s, a, m, {}, 0.0, 0.0});

  for (std::uint64_t seed : config.seeds) {
    const PointCloud pool = generate_spiral(config.num_classes, config.samples_per_class,
                                            config.noise_sd, derive_seed(seed, "sweep.pool"));
    const PointCloud test = generate_spiral(config.num_classes, config.test_per_class,
                                            config.noise_sd, derive_seed(seed, "sweep.test"));
    const std::vector<int> classes = pool.classes();
    std::map<int, PrincipalCurve> curves;
    const bool need_curves = std::find(config.methods.begin(), config.methods.end(),
                                       AugmentMethod::kOurs) != config.methods.end();
    if (need_curves)
      for (int c : classes) curves[c] = fit_principal_curve(pool.class_subset(c).unlabeled()).curve;
    ClassifierConfig cc = config.classifier;
    cc.seed = derive_seed(seed, "sweep.classifier");

    for (auto& cell : result.cells) {
      const std::uint64_t cell_seed = derive_seed(derive_seed(seed, "sweep.shots"), cell.shots);
      PointCloud train(pool.dim());
      std::map<int, PointCloud> shots;
      for (int c : classes) {
        const auto sel = select_shots(pool, c, cell.shots, config.shot_mode,
                                      derive_seed(cell_seed, static_cast<std::uint64_t>(c)));
        shots[c] = pool.subset(sel.indices).unlabeled();
        append(train, shots[c], c);
      }
      if (cell.augments > 0 && cell.method != AugmentMethod::kNone) {
        for (int c : classes) {
          const std::uint64_t aug_seed =
              derive_seed(derive_seed(cell_seed, "sweep.augment"), static_cast<std::uint64_t>(c));
          if (cell.method == AugmentMethod::kOurs) {
            PlanOptions po;
            po.total = cell.augments;
            po.seed = aug_seed;
            po.reference = &curves.at(c);
            append(train, generate(plan_generation(shots[c], po)).samples, c);
          } else {
            append(train, gaussian_baseline(shots[c], cell.augments, aug_seed), c);
          }
        }
      }
      cell.accuracies.push_back(transfer_eval(train_classifier(train, cc), test));
    }
  }

  for (auto& cell : result.cells) {
    const double n = static_cast<double>(cell.accuracies.size());
    cell.mean = std::accumulate(cell.accuracies.begin(), cell.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : cell.accuracies) ss += (a - cell.mean) * (a - cell.mean);
    cell.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  return result;
}

}  // namespace pmaug
