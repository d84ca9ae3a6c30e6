// pmaug: principal-manifold augmentation command line.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmaug/autoencoder.hpp"
#include "pmaug/curve.hpp"
#include "pmaug/dataset.hpp"
#include "pmaug/errors.hpp"
#include "pmaug/eval.hpp"
#include "pmaug/experiment.hpp"
#include "pmaug/intrinsic.hpp"
#include "pmaug/io.hpp"
#include "pmaug/sampler.hpp"
#include "pmaug/seed.hpp"

namespace fs = std::filesystem;
using namespace pmaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

// Filled by the subcommand before it runs; failure reports land here.
fs::path g_failure_dir;

void emit(const nlohmann::json& j, const fs::path& out) {
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    write_json(j, out);
}

ShotMode parse_shot_mode(const std::string& s) {
  if (s == "random") return ShotMode::kRandom;
  if (s == "representative") return ShotMode::kRepresentative;
  throw ArgumentError("unknown shot mode '" + s + "'");
}

DfPolicy parse_df(const std::string& s) {
  if (s == "adaptive") return DfPolicy::adaptive();
  if (s == "interpolate") return DfPolicy::interpolate();
  double v = 0.0;
  std::istringstream is(s);
  if (!(is >> v) || !is.eof() || !(v > 0.0)) throw ArgumentError("--df: expected adaptive, interpolate or a positive number");
  return DfPolicy::fixed(v);
}

CurveInit parse_init(const std::string& s) {
  if (s == "auto") return CurveInit::kAuto;
  if (s == "pc1") return CurveInit::kPrincipalComponent;
  if (s == "geodesic") return CurveInit::kGraphGeodesic;
  throw ArgumentError("unknown --init '" + s + "'");
}

// Every subcommand gets --seed; the environment wins over the flag.
std::uint64_t effective_seed(std::uint64_t flag) {
  if (const char* env = std::getenv("MANIFOLD_AUG_SEED")) {
    std::uint64_t v = 0;
    std::istringstream is(env);
    if (!(is >> v) || !is.eof()) throw ArgumentError("MANIFOLD_AUG_SEED is not an unsigned integer");
    return v;
  }
  return flag;
}

// Reads key=value lines ('#' comments, optional [section] headers ignored) and
// turns them into arguments for `sub`. Unknown keys are usage errors.
std::vector<std::string> config_args(const fs::path& path, CLI::App* sub) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    for (char& c : key)
      if (c == '_') c = '-';
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key +
                          "' for " + sub->get_name());
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

struct Common {
  std::uint64_t seed = 0;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "root seed (MANIFOLD_AUG_SEED overrides)");
  sub->add_option("--config", c.config, "key=value file with option defaults");
}

// ---------------------------------------------------------------------------

struct SpiralGenArgs {
  Common common;
  int classes = 3;
  std::size_t samples = 300;
  double noise = 0.05;
  std::string out;
};

int run_spiral_gen(const SpiralGenArgs& a) {
  const std::uint64_t seed = effective_seed(a.common.seed);
  const SpiralSample s = generate_spiral_sample({a.classes, a.samples, a.noise, seed});
  write_csv(s.cloud, a.out);
  nlohmann::json manifest = cloud_manifest(s.cloud, seed);
  manifest["noise_sd"] = a.noise;
  manifest["samples_per_class"] = a.samples;
  write_json(manifest, fs::path(a.out).replace_extension(".json"));
  return kExitOk;
}

struct FitCurveArgs {
  Common common;
  std::string data, df = "adaptive", init = "auto", out;
  std::size_t max_iter = 50;
  double tol = 1e-4;
  std::optional<int> cls;
};

int run_fit_curve(const FitCurveArgs& a) {
  effective_seed(a.common.seed);
  const PointCloud cloud = read_csv(a.data);
  FitOptions opts;
  opts.df = parse_df(a.df);
  opts.init = parse_init(a.init);
  opts.max_iter = a.max_iter;
  opts.tol = a.tol;

  std::vector<std::pair<std::string, PointCloud>> groups;
  if (a.cls) {
    if (!cloud.has_labels()) throw ArgumentError("--class given but the data has no labels");
    groups.emplace_back("class" + std::to_string(*a.cls), cloud.class_subset(*a.cls));
  } else if (cloud.has_labels()) {
    for (int c : cloud.classes()) groups.emplace_back("class" + std::to_string(c), cloud.class_subset(c));
  } else {
    groups.emplace_back("all", cloud);
  }

  const fs::path dir = a.out;
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [name, pts] : groups) {
    if (pts.empty()) throw ArgumentError("no points for " + name);
    const CurveFit fit = fit_principal_curve(pts.unlabeled(), opts);
    write_json(fit.curve.to_json(), dir / (name + "_curve.json"));
    std::ostringstream csv;
    const std::size_t d = pts.dim();
    for (std::size_t j = 0; j < d; ++j) csv << 'x' << j << ',';
    for (std::size_t j = 0; j < d; ++j) csv << 'p' << j << ',';
    csv << "lambda,order,distance\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (double v : pts.point(i)) csv << format_double(v) << ',';
      for (double v : fit.records[i].projected) csv << format_double(v) << ',';
      csv << format_double(fit.records[i].lambda) << ',' << fit.records[i].order << ','
          << format_double(fit.records[i].distance) << '\n';
    }
    write_text(csv.str(), dir / (name + "_projections.csv"));
    nlohmann::json rep = fit.report.to_json();
    rep["length"] = fit.curve.length();
    rep["n"] = pts.size();
    summary[name] = rep;
  }
  write_json({{"data", a.data}, {"df", a.df}, {"init", a.init}, {"max_iter", a.max_iter},
              {"tol", a.tol}, {"fits", summary}},
             dir / "fit_report.json");
  return kExitOk;
}

struct EstimateDimArgs {
  Common common;
  std::string data, out;
  std::size_t k1 = 5, k2 = 15;
};

int run_estimate_dim(const EstimateDimArgs& a) {
  effective_seed(a.common.seed);
  const PointCloud cloud = read_csv(a.data);
  nlohmann::json classes = nlohmann::json::object();
  if (cloud.has_labels()) {
    for (int c : cloud.classes())
      classes[std::to_string(c)] = class_dim(cloud.class_subset(c).unlabeled(), a.k1, a.k2).to_json();
  } else {
    classes["all"] = class_dim(cloud, a.k1, a.k2).to_json();
  }
  emit({{"data", a.data}, {"k1", a.k1}, {"k2", a.k2}, {"classes", classes}}, a.out);
  return kExitOk;
}

struct TrainAeArgs {
  Common common;
  std::string data, out;
  std::size_t latent_dim = 2;
  std::vector<std::size_t> hidden{32, 32};
  TrainConfig train;
};

int run_train_ae(TrainAeArgs a) {
  a.train.seed = effective_seed(a.common.seed);
  const PointCloud cloud = read_csv(a.data);
  AutoencoderModel model = AutoencoderModel::make(cloud.dim(), a.latent_dim, a.hidden,
                                                  derive_seed(a.train.seed, "train-ae.model"),
                                                  a.train.alpha, a.train.beta);
  const TrainResult r = train(std::move(model), cloud, a.train);
  save_checkpoint(r.model, a.train, r.history, a.out);
  const auto& last = r.history.back();
  std::cout << "epochs " << r.history.size() << "  recon " << last.recon << "  weight_reg "
            << last.weight_reg << "  intrinsic " << last.intrinsic << '\n';
  return kExitOk;
}

struct AugmentArgs {
  Common common;
  std::string shots, out, curve, mode = "spline-ordered", noise = "uniform";
  std::size_t n = 300;
  std::optional<double> tau;
};

int run_augment(const AugmentArgs& a) {
  const std::uint64_t seed = effective_seed(a.common.seed);
  const PointCloud shots = read_csv(a.shots);
  if (a.mode == "gaussian") {
    const PointCloud g = gaussian_baseline(shots.unlabeled(), a.n, seed);
    write_csv_with_lambda(g, std::vector<double>(g.size(), 0.0), a.out);
    return kExitOk;
  }
  PlanOptions po;
  po.total = a.n;
  po.tau = a.tau;
  po.mode = generation_mode_from_string(a.mode);
  po.noise = noise_kind_from_string(a.noise);
  po.seed = seed;
  PrincipalCurve reference;
  if (!a.curve.empty()) {
    reference = PrincipalCurve::from_json(read_json(a.curve));
    po.reference = &reference;
  }
  const GenerationPlan plan = plan_generation(shots.unlabeled(), po);
  const GeneratedSet set = generate(plan);
  std::vector<double> lambdas;
  for (std::size_t i : set.order) lambdas.push_back(set.lambdas[i]);
  PointCloud ordered = set.ordered_samples();
  if (shots.has_labels() && shots.classes().size() == 1)
    ordered = PointCloud(ordered.dim(), ordered.coords(),
                         std::vector<int>(ordered.size(), shots.label(0)));
  write_csv_with_lambda(ordered, lambdas, a.out);
  nlohmann::json j = plan.to_json();
  j["shots_file"] = a.shots;
  write_json(j, fs::path(a.out).replace_extension(".json"));
  return kExitOk;
}

struct EvalSmoothArgs {
  Common common;
  std::string samples, out;
  std::size_t shuffles = 20;
};

int run_eval_smooth(const EvalSmoothArgs& a) {
  const std::uint64_t seed = effective_seed(a.common.seed);
  const LambdaCloud in = read_csv_with_lambda(a.samples);
  std::vector<std::size_t> order(in.cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (!in.lambda.empty())
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return in.lambda[x] < in.lambda[y]; });
  const SmoothnessReport r = smoothness_comparison(in.cloud.unlabeled(), order, a.shuffles, seed);
  nlohmann::json j = r.to_json();
  j["samples"] = a.samples;
  j["order_source"] = in.lambda.empty() ? "file" : "lambda";
  j["ordered_beats_random"] = r.ordered_beats_random(2.0);
  emit(j, a.out);
  return kExitOk;
}

struct SpiralExperimentArgs {
  Common common;
  SpiralExperimentConfig cfg;
  std::string shot_mode = "random", mode = "spline-ordered", noise = "uniform", out = "spiral_out";
  std::optional<double> tau;
};

int run_spiral_experiment_cmd(SpiralExperimentArgs a) {
  a.cfg.seed = effective_seed(a.common.seed);
  a.cfg.shot_mode = parse_shot_mode(a.shot_mode);
  a.cfg.mode = generation_mode_from_string(a.mode);
  a.cfg.noise = noise_kind_from_string(a.noise);
  a.cfg.tau = a.tau;
  a.cfg.out_dir = a.out;
  const SpiralExperimentResult r = run_spiral_experiment(a.cfg);
  std::cout << "real->generated " << r.real_to_generated << "  generated->real "
            << r.generated_to_real << "  smoothness " << (r.smoothness_ok ? "ok" : "FAIL") << '\n';
  if (!r.passed) {
    write_json({{"status", "acceptance_failure"}, {"report", r.report}}, fs::path(a.out) / "failure.json");
    return kExitFail;
  }
  return kExitOk;
}

struct PipelineArgs {
  Common common;
  PipelineConfig cfg;
  std::string data, idx_images, idx_labels, shot_mode = "random", mode = "spline-ordered",
      out = "pipeline_out";
  std::optional<double> tau;
};

int run_pipeline_cmd(PipelineArgs a) {
  a.cfg.seed = effective_seed(a.common.seed);
  a.cfg.data = a.data;
  a.cfg.idx_images = a.idx_images;
  a.cfg.idx_labels = a.idx_labels;
  a.cfg.shot_mode = parse_shot_mode(a.shot_mode);
  a.cfg.mode = generation_mode_from_string(a.mode);
  a.cfg.tau = a.tau;
  a.cfg.out_dir = a.out;
  const PipelineResult r = run_pipeline(a.cfg);
  const bool ok = r.smoothness.ordered_beats_random(2.0);
  std::cout << "latent class_dim (source mean) " << r.mean_latent_class_dim << "  smoothness ordered "
            << r.smoothness.ordered_value << " vs random " << r.smoothness.random_mean() << '\n';
  if (!ok) {
    write_json({{"status", "acceptance_failure"}, {"report", r.report}}, fs::path(a.out) / "failure.json");
    return kExitFail;
  }
  return kExitOk;
}

struct TheoremArgs {
  Common common;
  std::vector<std::size_t> m{1, 2, 3};
  std::size_t n = 2000, k = 10, trials = 2000;
  std::string out;
};

int run_validate_theorem(const TheoremArgs& a) {
  const std::uint64_t seed = effective_seed(a.common.seed);
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (std::size_t m : a.m) {
    const TheoremCheck c = mc_validate_theorem1(m, a.n, a.k, a.trials, derive_seed(seed, m));
    checks.push_back(c.to_json());
    all = all && c.agrees(3.0);
    std::cout << "m=" << m << "  mean " << c.mean_local << " +- " << c.std_error << "  gamma form "
              << c.predicted << "  alternative " << c.predicted_alt << "  "
              << (c.agrees(3.0) ? "agree" : "DISAGREE") << '\n';
  }
  emit({{"seed", seed}, {"checks", checks}, {"pass", all}}, a.out);
  return all ? kExitOk : kExitFail;
}

struct SweepArgs {
  Common common;
  SweepConfig cfg;
  std::vector<std::string> methods{"ours", "gaussian", "none"};
  std::string out;
};

int run_sweep_cmd(SweepArgs a) {
  if (std::getenv("MANIFOLD_AUG_SEED") != nullptr || a.common.seed != 0) {
    const std::uint64_t root = effective_seed(a.common.seed);
    for (auto& s : a.cfg.seeds) s = derive_seed(root, s);
  }
  a.cfg.methods.clear();
  for (const auto& m : a.methods) a.cfg.methods.push_back(augment_method_from_string(m));
  const SweepResult r = sweep(a.cfg);
  if (a.out.empty())
    std::cout << r.to_csv();
  else
    write_text(r.to_csv(), a.out);
  return kExitOk;
}

int report_failure(int code, const std::string& kind, const std::string& message) {
  std::cerr << "pmaug: " << message << '\n';
  if (!g_failure_dir.empty()) {
    try {
      write_json({{"status", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}},
                 g_failure_dir / "failure.json");
    } catch (const std::exception&) {
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal-manifold data augmentation"};
  app.require_subcommand(1);

  SpiralGenArgs sg;
  auto* c_sg = app.add_subcommand("spiral-gen", "write a labeled spiral point cloud");
  add_common(c_sg, sg.common);
  c_sg->add_option("--classes", sg.classes)->check(CLI::PositiveNumber);
  c_sg->add_option("--samples", sg.samples, "points per class")->check(CLI::PositiveNumber);
  c_sg->add_option("--noise", sg.noise)->check(CLI::NonNegativeNumber);
  c_sg->add_option("--out", sg.out)->required();

  FitCurveArgs fc;
  auto* c_fc = app.add_subcommand("fit-curve", "fit a principal curve per class");
  add_common(c_fc, fc.common);
  c_fc->add_option("--data", fc.data)->required();
  c_fc->add_option("--df", fc.df, "adaptive | interpolate | number");
  c_fc->add_option("--init", fc.init, "auto | pc1 | geodesic");
  c_fc->add_option("--max-iter", fc.max_iter)->check(CLI::PositiveNumber);
  c_fc->add_option("--tol", fc.tol)->check(CLI::PositiveNumber);
  c_fc->add_option("--class", fc.cls);
  c_fc->add_option("--out", fc.out, "output directory")->required();

  EstimateDimArgs ed;
  auto* c_ed = app.add_subcommand("estimate-dim", "MLE intrinsic dimension per class");
  add_common(c_ed, ed.common);
  c_ed->add_option("--data", ed.data)->required();
  c_ed->add_option("--k1", ed.k1);
  c_ed->add_option("--k2", ed.k2);
  c_ed->add_option("--out", ed.out, "JSON report (stdout when omitted)");

  TrainAeArgs ta;
  auto* c_ta = app.add_subcommand("train-ae", "train the regularized autoencoder");
  add_common(c_ta, ta.common);
  c_ta->add_option("--data", ta.data)->required();
  c_ta->add_option("--latent-dim", ta.latent_dim)->check(CLI::PositiveNumber);
  c_ta->add_option("--hidden", ta.hidden)->delimiter(',');
  c_ta->add_option("--beta", ta.train.beta);
  c_ta->add_option("--alpha", ta.train.alpha);
  c_ta->add_option("--k1", ta.train.k1);
  c_ta->add_option("--k2", ta.train.k2);
  c_ta->add_option("--epochs", ta.train.epochs);
  c_ta->add_option("--lr", ta.train.learning_rate);
  c_ta->add_option("--batch-size", ta.train.batch_size);
  c_ta->add_option("--out", ta.out, "checkpoint JSON")->required();

  AugmentArgs au;
  auto* c_au = app.add_subcommand("augment", "generate samples along the shot trajectory");
  add_common(c_au, au.common);
  c_au->add_option("--shots", au.shots)->required();
  c_au->add_option("--n", au.n)->check(CLI::PositiveNumber);
  c_au->add_option("--tau", au.tau)->check(CLI::NonNegativeNumber);
  c_au->add_option("--mode", au.mode)
      ->check(CLI::IsMember({"linear-ordered", "spline-ordered", "linear-random", "gaussian"}));
  c_au->add_option("--noise", au.noise)->check(CLI::IsMember({"uniform", "gaussian"}));
  c_au->add_option("--curve", au.curve, "reference curve JSON from fit-curve");
  c_au->add_option("--out", au.out)->required();

  EvalSmoothArgs es;
  auto* c_es = app.add_subcommand("eval-smooth", "ordered vs shuffled smoothness");
  add_common(c_es, es.common);
  c_es->add_option("--samples", es.samples)->required();
  c_es->add_option("--shuffles", es.shuffles);
  c_es->add_option("--out", es.out);

  SpiralExperimentArgs sx;
  auto* c_sx = app.add_subcommand("spiral-experiment", "spiral generation and transfer experiment");
  add_common(c_sx, sx.common);
  c_sx->add_option("--classes", sx.cfg.num_classes)->check(CLI::PositiveNumber);
  c_sx->add_option("--samples", sx.cfg.samples_per_class)->check(CLI::PositiveNumber);
  c_sx->add_option("--noise", sx.cfg.noise_sd)->check(CLI::NonNegativeNumber);
  c_sx->add_option("--shots", sx.cfg.shots);
  c_sx->add_option("--shot-mode", sx.shot_mode)->check(CLI::IsMember({"random", "representative"}));
  c_sx->add_option("--generated", sx.cfg.generated_per_class);
  c_sx->add_option("--tau", sx.tau)->check(CLI::NonNegativeNumber);
  c_sx->add_option("--mode", sx.mode)
      ->check(CLI::IsMember({"linear-ordered", "spline-ordered", "linear-random"}));
  c_sx->add_option("--noise-kind", sx.noise)->check(CLI::IsMember({"uniform", "gaussian"}));
  c_sx->add_option("--smooth-n", sx.cfg.smooth_samples);
  c_sx->add_option("--shuffles", sx.cfg.num_shuffles);
  c_sx->add_option("--clf-steps", sx.cfg.classifier.steps);
  c_sx->add_option("--out", sx.out, "artifact directory");

  PipelineArgs pl;
  auto* c_pl = app.add_subcommand("pipeline", "autoencoder + latent trajectory generation");
  add_common(c_pl, pl.common);
  c_pl->add_option("--data", pl.data, "labeled CSV (a spiral is generated when omitted)");
  c_pl->add_option("--idx-images", pl.idx_images);
  c_pl->add_option("--idx-labels", pl.idx_labels);
  c_pl->add_option("--downsample", pl.cfg.downsample)->check(CLI::PositiveNumber);
  c_pl->add_option("--target", pl.cfg.target_class);
  c_pl->add_option("--shots", pl.cfg.shots);
  c_pl->add_option("--shot-mode", pl.shot_mode)->check(CLI::IsMember({"random", "representative"}));
  c_pl->add_option("--latent-dim", pl.cfg.latent_dim)->check(CLI::PositiveNumber);
  c_pl->add_option("--beta", pl.cfg.train.beta);
  c_pl->add_option("--alpha", pl.cfg.train.alpha);
  c_pl->add_option("--k1", pl.cfg.train.k1);
  c_pl->add_option("--k2", pl.cfg.train.k2);
  c_pl->add_option("--epochs", pl.cfg.train.epochs);
  c_pl->add_option("--n", pl.cfg.generated)->check(CLI::PositiveNumber);
  c_pl->add_option("--tau", pl.tau)->check(CLI::NonNegativeNumber);
  c_pl->add_option("--mode", pl.mode)
      ->check(CLI::IsMember({"linear-ordered", "spline-ordered", "linear-random"}));
  c_pl->add_option("--shuffles", pl.cfg.num_shuffles);
  c_pl->add_option("--out", pl.out, "artifact directory");

  TheoremArgs th;
  auto* c_th = app.add_subcommand("validate-theorem1", "Monte-Carlo check of the local estimator mean");
  add_common(c_th, th.common);
  c_th->add_option("--m", th.m, "manifold dimensions")->delimiter(',');
  c_th->add_option("--n", th.n);
  c_th->add_option("--k", th.k);
  c_th->add_option("--trials", th.trials);
  c_th->add_option("--out", th.out);

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "accuracy over shot and augmentation counts");
  add_common(c_sw, sw.common);
  c_sw->add_option("--shots", sw.cfg.shot_counts)->delimiter(',');
  c_sw->add_option("--augments", sw.cfg.augment_counts)->delimiter(',');
  c_sw->add_option("--methods", sw.methods)->delimiter(',');
  c_sw->add_option("--seeds", sw.cfg.seeds)->delimiter(',');
  c_sw->add_option("--out", sw.out, "CSV (stdout when omitted)");

  for (auto* sub : app.get_subcommands({}))
    for (auto* opt : sub->get_options())
      opt->multi_option_policy(opt->get_expected_max() > 1 ? CLI::MultiOptionPolicy::TakeAll
                                                           : CLI::MultiOptionPolicy::TakeLast);

  // Config files are expanded into arguments placed before the explicit ones,
  // so flags on the command line take precedence.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty()) {
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands({}))
        if (s->get_name() == args[0]) sub = s;
      for (std::size_t i = 1; sub != nullptr && i < args.size(); ++i) {
        std::string file;
        if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
        if (file.empty()) continue;
        auto extra = config_args(file, sub);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
  } catch (const ArgumentError& e) {
    return report_failure(kExitUsage, "usage", e.what());
  } catch (const IoError& e) {
    return report_failure(kExitIo, "io", e.what());
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_sg->parsed()) return run_spiral_gen(sg);
    if (c_fc->parsed()) {
      g_failure_dir = fc.out;
      return run_fit_curve(fc);
    }
    if (c_ed->parsed()) return run_estimate_dim(ed);
    if (c_ta->parsed()) return run_train_ae(ta);
    if (c_au->parsed()) return run_augment(au);
    if (c_es->parsed()) return run_eval_smooth(es);
    if (c_sx->parsed()) {
      g_failure_dir = sx.out;
      return run_spiral_experiment_cmd(sx);
    }
    if (c_pl->parsed()) {
      g_failure_dir = pl.out;
      return run_pipeline_cmd(pl);
    }
    if (c_th->parsed()) return run_validate_theorem(th);
    if (c_sw->parsed()) return run_sweep_cmd(sw);
  } catch (const ArgumentError& e) {
    return report_failure(kExitUsage, "argument", e.what());
  } catch (const IoError& e) {
    return report_failure(kExitIo, "io", e.what());
  } catch (const FormatError& e) {
    return report_failure(kExitIo, "format", e.what());
  } catch (const DegeneracyError& e) {
    return report_failure(kExitFail, "degeneracy", e.what());
  } catch (const TrainingError& e) {
    return report_failure(kExitFail, "training", e.what());
  } catch (const std::exception& e) {
    return report_failure(kExitFail, "error", e.what());
  }
  return kExitUsage;
}
