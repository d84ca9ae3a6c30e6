#include "pmaug/experiment.hpp"

#include <algorithm>
#include <sstream>

#include "pmaug/errors.hpp"
#include "pmaug/intrinsic.hpp"
#include "pmaug/io.hpp"
#include "pmaug/seed.hpp"
#include "pmaug/svg.hpp"

namespace pmaug {

namespace {

std::string shot_mode_name(ShotMode m) { return m == ShotMode::kRandom ? "random" : "representative"; }

PointCloud with_label(const PointCloud& cloud, int label) {
  return PointCloud(cloud.dim(), cloud.coords(), std::vector<int>(cloud.size(), label));
}

void append(PointCloud& dst, const PointCloud& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst.push_back(src.point(i), src.label(i));
}

PointCloud curve_path(const PrincipalCurve& curve, std::size_t samples = 400) {
  PointCloud path(curve.dim());
  std::vector<double> p(curve.dim());
  for (std::size_t i = 0; i < samples; ++i) {
    curve.evaluate(curve.length() * static_cast<double>(i) / static_cast<double>(samples - 1), p);
    path.push_back(p);
  }
  return path;
}

void write_figures(const SpiralExperimentResult& r, const ClassifierModel& real_clf,
                   const ClassifierModel& gen_clf, const std::filesystem::path& dir) {
  auto canvas = [&] { return SvgCanvas::fit(r.data); };
  {
    auto c = canvas();
    c.title("ground truth");
    c.scatter(r.data);
    c.save(dir / "ground_truth.svg");
  }
  {
    auto c = canvas();
    c.title("principal curves");
    c.scatter(r.data, 1.5, "#bbbbbb", 0.6);
    for (std::size_t k = 0; k < r.curves.size(); ++k)
      c.polyline(curve_path(r.curves[k]), SvgCanvas::class_color(static_cast<int>(k)), 2.0);
    c.save(dir / "manifold.svg");
  }
  {
    auto c = canvas();
    c.title("shots");
    c.scatter(r.data, 1.5, "#dddddd", 0.6);
    c.scatter(r.shots, 5.0, "", 1.0);
    c.save(dir / "shots.svg");
  }
  {
    auto c = canvas();
    c.title("generated");
    c.scatter(r.generated, 2.0);
    c.scatter(r.shots, 5.0, "#000000", 1.0);
    c.save(dir / "reconstruction.svg");
  }
  const std::pair<const ClassifierModel*, const char*> boards[] = {
      {&real_clf, "boundary_real.svg"}, {&gen_clf, "boundary_generated.svg"}};
  for (const auto& [clf, name] : boards) {
    auto c = canvas();
    c.heat_grid(96, 96, [&](double x, double y) {
      const double p[2] = {x, y};
      return clf->predict(p);
    });
    c.scatter(clf == &real_clf ? r.data : r.generated, 1.5);
    c.title(clf == &real_clf ? "trained on real" : "trained on generated");
    c.save(dir / name);
  }
}

}  // namespace

nlohmann::json SpiralExperimentConfig::to_json() const {
  return {{"classes", num_classes},
          {"samples_per_class", samples_per_class},
          {"noise_sd", noise_sd},
          {"shots", shots},
          {"shot_mode", shot_mode_name(shot_mode)},
          {"generated_per_class", generated_per_class},
          {"tau", tau ? nlohmann::json(*tau) : nlohmann::json("auto")},
          {"mode", to_string(mode)},
          {"noise", to_string(noise)},
          {"smooth_samples", smooth_samples},
          {"num_shuffles", num_shuffles},
          {"classifier", classifier.to_json()},
          {"min_real_to_generated", min_real_to_generated},
          {"min_generated_to_real", min_generated_to_real},
          {"seed", seed}};
}

SpiralExperimentResult run_spiral_experiment(const SpiralExperimentConfig& config) {
  if (config.num_classes < 2) throw ArgumentError("spiral experiment: need at least 2 classes");
  if (config.generated_per_class == 0) throw ArgumentError("spiral experiment: nothing to generate");
  SpiralExperimentResult r;
  r.data = generate_spiral(config.num_classes, config.samples_per_class, config.noise_sd,
                           derive_seed(config.seed, "experiment.spiral"));
  r.shots = PointCloud(2);
  r.generated = PointCloud(2);
  PointCloud smooth_backbone(2);
  const std::uint64_t shot_root = derive_seed(config.seed, "experiment.shots");
  const std::uint64_t gen_root = derive_seed(config.seed, "experiment.generate");
  const std::uint64_t smooth_root = derive_seed(config.seed, "experiment.smoothness");

  for (int c : r.data.classes()) {
    const auto uc = static_cast<std::uint64_t>(c);
    const PointCloud pool = r.data.class_subset(c).unlabeled();
    CurveFit fit = fit_principal_curve(pool);
    r.fit_reports.push_back(fit.report);
    r.curves.push_back(fit.curve);

    const auto sel = select_shots(r.data, c, config.shots, config.shot_mode, derive_seed(shot_root, uc));
    const PointCloud shots = r.data.subset(sel.indices).unlabeled();
    append(r.shots, with_label(shots, c));

    PlanOptions po;
    po.total = config.generated_per_class;
    po.tau = config.tau;
    po.mode = config.mode;
    po.noise = config.noise;
    po.seed = derive_seed(gen_root, uc);
    po.reference = &r.curves.back();
    const GeneratedSet set = generate(plan_generation(shots, po));
    append(r.generated, with_label(set.samples, c));
    r.generated_lambda.insert(r.generated_lambda.end(), set.lambdas.begin(), set.lambdas.end());

    po.total = config.smooth_samples;
    po.seed = derive_seed(derive_seed(smooth_root, "generate"), uc);
    const GeneratedSet small = generate(plan_generation(shots, po));
    r.smoothness.push_back(smoothness_comparison(small.samples, small.order, config.num_shuffles,
                                                 derive_seed(smooth_root, uc)));
  }

  ClassifierConfig cc = config.classifier;
  cc.seed = derive_seed(config.seed, "experiment.classifier.real");
  const ClassifierModel real_clf = train_classifier(r.data, cc);
  cc.seed = derive_seed(config.seed, "experiment.classifier.generated");
  const ClassifierModel gen_clf = train_classifier(r.generated, cc);
  r.real_to_generated = transfer_eval(real_clf, r.generated);
  r.generated_to_real = transfer_eval(gen_clf, r.data);
  r.smoothness_ok = std::all_of(r.smoothness.begin(), r.smoothness.end(),
                                [](const SmoothnessReport& s) { return s.ordered_beats_random(2.0); });
  r.passed = r.real_to_generated >= config.min_real_to_generated &&
             r.generated_to_real >= config.min_generated_to_real && r.smoothness_ok;

  nlohmann::json smooth = nlohmann::json::array();
  for (const auto& s : r.smoothness) smooth.push_back(s.to_json());
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : r.fit_reports) fits.push_back(f.to_json());
  r.report = {{"config", config.to_json()},
              {"real_to_generated", r.real_to_generated},
              {"generated_to_real", r.generated_to_real},
              {"train_accuracy_real", real_clf.train_accuracy},
              {"train_accuracy_generated", gen_clf.train_accuracy},
              {"smoothness", smooth},
              {"smoothness_ok", r.smoothness_ok},
              {"curve_fits", fits},
              {"passed", r.passed}};

  if (!config.out_dir.empty()) {
    const auto& dir = config.out_dir;
    write_csv(r.data, dir / "data.csv");
    write_csv(r.shots, dir / "shots.csv");
    write_csv_with_lambda(r.generated, r.generated_lambda, dir / "generated.csv");
    std::ostringstream acc;
    acc << "direction,accuracy,threshold\n"
        << "real_to_generated," << format_double(r.real_to_generated) << ','
        << format_double(config.min_real_to_generated) << '\n'
        << "generated_to_real," << format_double(r.generated_to_real) << ','
        << format_double(config.min_generated_to_real) << '\n';
    write_text(acc.str(), dir / "accuracy.csv");
    std::ostringstream sm;
    sm << "class,ordered,random_mean,random_se,random_min\n";
    for (std::size_t k = 0; k < r.smoothness.size(); ++k) {
      const auto& s = r.smoothness[k];
      sm << k << ',' << format_double(s.ordered_value) << ',' << format_double(s.random_mean()) << ','
         << format_double(s.random_se()) << ',' << format_double(s.random_min()) << '\n';
    }
    write_text(sm.str(), dir / "smoothness.csv");
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : r.curves) curves.push_back(c.to_json());
    write_json(curves, dir / "curves.json");
    write_json(r.report, dir / "report.json");
    write_figures(r, real_clf, gen_clf, dir);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pipeline

TrainConfig spiral_train_config() {
  TrainConfig tc;
  tc.batch_size = 1024;
  tc.beta = 100.0;
  tc.k1 = 5;
  tc.k2 = 15;
  tc.epochs = 1000;
  return tc;
}

nlohmann::json PipelineConfig::to_json() const {
  return {{"data", data.string()},
          {"idx_images", idx_images.string()},
          {"idx_labels", idx_labels.string()},
          {"downsample", downsample},
          {"classes", num_classes},
          {"samples_per_class", samples_per_class},
          {"noise_sd", noise_sd},
          {"target_class", target_class},
          {"shots", shots},
          {"shot_mode", shot_mode_name(shot_mode)},
          {"latent_dim", latent_dim},
          {"hidden", hidden},
          {"train", train.to_json()},
          {"generated", generated},
          {"tau", tau ? nlohmann::json(*tau) : nlohmann::json("auto")},
          {"mode", to_string(mode)},
          {"num_shuffles", num_shuffles},
          {"estimate_k1", estimate_k1},
          {"estimate_k2", estimate_k2},
          {"seed", seed}};
}

std::map<int, double> latent_class_dims(const AutoencoderModel& model, const PointCloud& data,
                                        std::size_t k1, std::size_t k2) {
  const PointCloud z = model.encode(data);
  std::map<int, double> out;
  for (int c : z.classes()) {
    const PointCloud zc = z.class_subset(c).unlabeled();
    if (zc.size() <= k2) continue;
    try {
      out[c] = class_dim(zc, k1, k2).aggregate;
    } catch (const DegeneracyError&) {
    }
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PointCloud data;
  if (!config.idx_images.empty() || !config.idx_labels.empty()) {
    data = load_idx_images(config.idx_images, config.idx_labels, config.downsample);
  } else if (!config.data.empty()) {
    if (!std::filesystem::exists(config.data))
      throw IoError("data file not found: " + config.data.string());
    data = read_csv(config.data);
  } else {
    data = generate_spiral(config.num_classes, config.samples_per_class, config.noise_sd,
                           derive_seed(config.seed, "pipeline.spiral"));
  }
  if (!data.has_labels()) throw ArgumentError("pipeline: data must be labeled");
  const auto classes = data.classes();
  if (std::find(classes.begin(), classes.end(), config.target_class) == classes.end())
    throw ArgumentError("pipeline: target class " + std::to_string(config.target_class) +
                        " not present in the data");
  if (classes.size() < 2) throw ArgumentError("pipeline: need at least one source class");

  PointCloud source(data.dim());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.label(i) != config.target_class) source.push_back(data.point(i), data.label(i));

  PipelineResult r;
  TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, "pipeline.train");
  AutoencoderModel init = AutoencoderModel::make(data.dim(), config.latent_dim, config.hidden,
                                                 derive_seed(config.seed, "pipeline.model"),
                                                 tc.alpha, tc.beta);
  TrainResult trained = train(std::move(init), source, tc);
  r.model = std::move(trained.model);
  r.history = std::move(trained.history);

  r.latent_class_dim = latent_class_dims(r.model, data, config.estimate_k1, config.estimate_k2);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [c, v] : r.latent_class_dim)
    if (c != config.target_class) {
      sum += v;
      ++count;
    }
  r.mean_latent_class_dim = count ? sum / static_cast<double>(count) : 0.0;

  const auto sel = select_shots(data, config.target_class, config.shots, config.shot_mode,
                                derive_seed(config.seed, "pipeline.shots"));
  const PointCloud shots = data.subset(sel.indices).unlabeled();
  const PointCloud latent_shots = r.model.encode(shots);
  PlanOptions po;
  po.total = config.generated;
  po.tau = config.tau;
  po.mode = config.mode;
  po.seed = derive_seed(config.seed, "pipeline.generate");
  const GenerationPlan plan = plan_generation(latent_shots, po);
  const GeneratedSet set = generate(plan);
  r.decoded = decode_generated(set, r.model);
  for (std::size_t i : set.order) r.lambdas.push_back(set.lambdas[i]);
  std::vector<std::size_t> identity(r.decoded.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  r.smoothness = smoothness_comparison(r.decoded, identity, config.num_shuffles,
                                       derive_seed(config.seed, "pipeline.smoothness"));

  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [c, v] : r.latent_class_dim) dims[std::to_string(c)] = v;
  r.report = {{"config", config.to_json()},
              {"latent_class_dim", dims},
              {"mean_latent_class_dim_source", r.mean_latent_class_dim},
              {"final_epoch", r.history.empty() ? nlohmann::json() : history_to_json(r.history).back()},
              {"plan", plan.to_json()},
              {"smoothness", r.smoothness.to_json()},
              {"smoothness_ok", r.smoothness.ordered_beats_random(2.0)}};

  if (!config.out_dir.empty()) {
    const auto& dir = config.out_dir;
    write_csv_with_lambda(with_label(r.decoded, config.target_class), r.lambdas,
                          dir / "generated_decoded.csv");
    write_csv(with_label(shots, config.target_class), dir / "shots.csv");
    save_checkpoint(r.model, tc, r.history, dir / "autoencoder.json");
    write_json(r.report, dir / "report.json");
    if (data.dim() == 2) {
      auto c = SvgCanvas::fit(data);
      c.title("decoded trajectory");
      c.scatter(data, 1.5, "#cccccc", 0.6);
      c.polyline(r.decoded, SvgCanvas::class_color(config.target_class), 1.0);
      c.scatter(with_label(shots, config.target_class), 5.0, "#000000", 1.0);
      c.save(dir / "pipeline.svg");
    }
  }
  return r;
}

}  // namespace pmaug
