#include "pmaug/curve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "pmaug/errors.hpp"
#include "pmaug/knn.hpp"

namespace pmaug {

// ---------------------------------------------------------------------------
// PrincipalCurve

PrincipalCurve::PrincipalCurve(std::vector<SmoothingSpline> splines, double t_lo, double t_hi,
                               std::size_t grid_size)
    : splines_(std::move(splines)) {
  if (splines_.empty()) throw ArgumentError("PrincipalCurve: no coordinate splines");
  if (grid_size < 2) throw ArgumentError("PrincipalCurve: grid needs at least two points");
  if (!(t_hi > t_lo)) throw DegeneracyError("PrincipalCurve: empty parameter range");
  const std::size_t d = splines_.size();
  grid_t_.resize(grid_size);
  grid_pts_.resize(grid_size * d);
  arc_.assign(grid_size, 0.0);
  for (std::size_t k = 0; k < grid_size; ++k) {
    grid_t_[k] = t_lo + (t_hi - t_lo) * static_cast<double>(k) / static_cast<double>(grid_size - 1);
    evaluate_raw(grid_t_[k], {grid_pts_.data() + k * d, d});
    if (k > 0) {
      arc_[k] = arc_[k - 1] + distance({grid_pts_.data() + (k - 1) * d, d},
                                       {grid_pts_.data() + k * d, d});
    }
  }
  if (!(arc_.back() > 0.0)) throw DegeneracyError("PrincipalCurve: curve has zero length");
}

void PrincipalCurve::evaluate_raw(double t, std::span<double> out) const {
  for (std::size_t j = 0; j < splines_.size(); ++j) out[j] = splines_[j](t);
}

double PrincipalCurve::raw_parameter(double s) const {
  const std::size_t g = arc_.size();
  std::size_t k;
  if (s <= 0.0) {
    k = 0;
  } else if (s >= arc_.back()) {
    k = g - 2;
  } else {
    auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
    k = std::min<std::size_t>(static_cast<std::size_t>(it - arc_.begin()) - 1, g - 2);
  }
  const double ds = arc_[k + 1] - arc_[k];
  if (ds <= 0.0) return grid_t_[k];
  return grid_t_[k] + (s - arc_[k]) / ds * (grid_t_[k + 1] - grid_t_[k]);
}

void PrincipalCurve::evaluate(double s, std::span<double> out) const {
  evaluate_raw(raw_parameter(s), out);
}

std::vector<double> PrincipalCurve::evaluate(double s) const {
  std::vector<double> out(dim());
  evaluate(s, out);
  return out;
}

nlohmann::json PrincipalCurve::to_json() const {
  nlohmann::json j;
  j["dim"] = dim();
  j["t_lo"] = grid_t_.front();
  j["t_hi"] = grid_t_.back();
  j["grid_size"] = grid_t_.size();
  j["length"] = length();
  auto& sp = j["splines"] = nlohmann::json::array();
  for (const auto& s : splines_) sp.push_back(s.to_json());
  j["lambda_grid"] = grid_t_;
  j["arc_length"] = arc_;
  return j;
}

PrincipalCurve PrincipalCurve::from_json(const nlohmann::json& j) {
  try {
    std::vector<SmoothingSpline> splines;
    for (const auto& s : j.at("splines")) splines.push_back(SmoothingSpline::from_json(s));
    return PrincipalCurve(std::move(splines), j.at("t_lo").get<double>(), j.at("t_hi").get<double>(),
                          j.at("grid_size").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("curve JSON: ") + e.what());
  }
}

nlohmann::json FitReport::to_json() const {
  return {{"iterations", iterations},
          {"reconstruction_errors", reconstruction_errors},
          {"converged", converged},
          {"best_iteration", best_iteration},
          {"init", init_used}};
}

double DfPolicy::resolve(std::size_t num_points, std::size_t num_knots) const {
  const double knots = static_cast<double>(num_knots);
  switch (kind) {
    case Kind::kInterpolate:
      return knots;
    case Kind::kFixed:
      return std::min(df, knots);
    case Kind::kAdaptive: {
      const double n = static_cast<double>(num_points);
      return std::min({n, std::max(4.0, std::ceil(n / 2.0)), knots});
    }
  }
  return knots;
}

// ---------------------------------------------------------------------------
// Expectation / projection

PrincipalCurve expectation_step(std::span<const double> lambda, const PointCloud& points,
                                const DfPolicy& df, std::size_t grid_size) {
  if (lambda.size() != points.size())
    throw ArgumentError("expectation_step: lambda and point counts differ");
  for (double v : lambda)
    if (!std::isfinite(v)) throw ArgumentError("expectation_step: non-finite lambda");
  const auto [mn, mx] = std::minmax_element(lambda.begin(), lambda.end());
  if (lambda.empty() || !(*mx > *mn))
    throw DegeneracyError("expectation_step: all projection indices coincide");

  const SplineSmoother smoother(lambda);
  const double smoothing =
      smoother.smoothing_for_dof(df.resolve(points.size(), smoother.num_knots()));
  const std::size_t n = points.size(), d = points.dim();
  std::vector<double> column(n);
  std::vector<SmoothingSpline> splines;
  splines.reserve(d);
  const std::vector<double> knots(smoother.knots().begin(), smoother.knots().end());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = points.point(i)[j];
    const bool constant = std::all_of(column.begin(), column.end(),
                                      [&](double v) { return v == column.front(); });
    splines.push_back(constant ? SmoothingSpline::constant(knots, column.front())
                               : smoother.fit(column, smoothing));
  }
  const double lo = knots.front(), hi = knots.back();
  const double pad = 0.05 * (hi - lo);
  return PrincipalCurve(std::move(splines), lo - pad, hi + pad, grid_size);
}

namespace {

struct Candidate {
  double f;  // squared distance
  double s;  // arc length
};

// Smaller distance wins; distances equal to 1e-12 relative count as a tie and
// the larger arc length wins.
bool better(const Candidate& a, const Candidate& b) {
  const double tol = 1e-12 * std::max(a.f, b.f);
  if (a.f < b.f - tol) return true;
  if (b.f < a.f - tol) return false;
  return a.s > b.s;
}

Candidate golden_section(const std::function<double(double)>& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
  double fa = f(a), fb = f(b);
  const double stop = 1e-13 * std::max(1.0, std::abs(hi));
  for (int it = 0; it < 100 && hi - lo > stop; ++it) {
    if (fa < fb) {
      hi = b, b = a, fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = f(a);
    } else {
      lo = a, a = b, fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = f(b);
    }
  }
  return fa < fb ? Candidate{fa, a} : Candidate{fb, b};
}

ProjectionRecord project_point(const PrincipalCurve& curve, std::span<const double> x,
                               double max_chord, std::vector<double>& dist2,
                               std::vector<double>& buf) {
  const std::size_t g = curve.grid_size(), d = curve.dim();
  const auto pts = curve.grid_points();
  const auto arc = curve.arc_length_table();
  std::size_t best = 0;
  for (std::size_t k = 0; k < g; ++k) {
    dist2[k] = squared_distance(x, pts.subspan(k * d, d));
    if (dist2[k] <= dist2[best]) best = k;
  }
  const double reach = std::sqrt(dist2[best]) + 2.0 * max_chord;
  const double reach2 = reach * reach;

  auto objective = [&](double s) {
    curve.evaluate(s, buf);
    return squared_distance(x, buf);
  };
  Candidate winner{dist2[best], arc[best]};
  for (std::size_t k = 0; k < g; ++k) {
    const bool left_ok = k == 0 || dist2[k] <= dist2[k - 1];
    const bool right_ok = k + 1 == g || dist2[k] <= dist2[k + 1];
    if (!left_ok || !right_ok || dist2[k] > reach2) continue;
    const double lo = arc[k == 0 ? 0 : k - 1];
    const double hi = arc[k + 1 == g ? k : k + 1];
    Candidate local{dist2[k], arc[k]};
    if (hi > lo) {
      const Candidate refined = golden_section(objective, lo, hi);
      if (refined.f <= local.f) local = refined;
    }
    if (better(local, winner)) winner = local;
  }
  ProjectionRecord rec;
  rec.lambda = winner.s;
  rec.projected = curve.evaluate(winner.s);
  rec.distance = distance(x, rec.projected);
  return rec;
}

}  // namespace

void assign_order(std::vector<ProjectionRecord>& records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return records[a].lambda < records[b].lambda;
  });
  for (std::size_t r = 0; r < idx.size(); ++r) records[idx[r]].order = r + 1;
}

std::vector<ProjectionRecord> projection_step(const PrincipalCurve& curve, const PointCloud& points,
                                              ExecPolicy exec) {
  if (points.dim() != curve.dim()) throw ArgumentError("projection_step: dimension mismatch");
  const std::size_t n = points.size(), g = curve.grid_size();
  const auto arc = curve.arc_length_table();
  double max_chord = 0.0;
  for (std::size_t k = 1; k < g; ++k) max_chord = std::max(max_chord, arc[k] - arc[k - 1]);

  std::vector<ProjectionRecord> records(n);
  if (exec == ExecPolicy::kSerial) {
    std::vector<double> dist2(g), buf(curve.dim());
    for (std::size_t i = 0; i < n; ++i)
      records[i] = project_point(curve, points.point(i), max_chord, dist2, buf);
  } else {
#pragma omp parallel
    {
      std::vector<double> dist2(g), buf(curve.dim());
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n; ++i)
        records[i] = project_point(curve, points.point(i), max_chord, dist2, buf);
    }
  }
  assign_order(records);
  return records;
}

// ---------------------------------------------------------------------------
// Initialization

std::vector<double> principal_component_scores(const PointCloud& points) {
  const std::size_t n = points.size(), d = points.dim();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      points.coords().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd v = eig.eigenvectors().col(static_cast<Eigen::Index>(d) - 1);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
  const Eigen::VectorXd scores = centered * v;
  return {scores.data(), scores.data() + scores.size()};
}

namespace {

std::vector<double> dijkstra(const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                             std::size_t source) {
  std::vector<double> dist(adj.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    for (auto [v, w] : adj[u]) {
      if (du + w < dist[v]) {
        dist[v] = du + w;
        heap.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

}  // namespace

std::vector<double> graph_geodesic_scores(const PointCloud& points, std::size_t max_k,
                                          ExecPolicy exec) {
  const std::size_t n = points.size();
  if (n < 2) return {};
  const NeighborTable table = knn_all(points, std::min(std::max<std::size_t>(max_k, 1), n - 1), exec);

  // Smallest k after which larger k merges no further components.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::size_t> components_at(table.k + 1, n);
  {
    std::size_t components = n;
    for (std::size_t r = 0; r < table.k; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = find(i), b = find(table.neighbors(i)[r]);
        if (a != b) {
          parent[a] = b;
          --components;
        }
      }
      components_at[r + 1] = components;
    }
  }
  std::size_t k = 1;
  while (components_at[k] != components_at[table.k]) ++k;

  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  auto link = [&](std::size_t i, std::size_t j, double w) {
    adj[i].emplace_back(j, w);
    adj[j].emplace_back(i, w);
    parent[find(i)] = find(j);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < k; ++r) link(i, table.neighbors(i)[r], table.distances(i)[r]);

  // Bridge what is left with the shortest edge out of each component.
  for (std::size_t left = components_at[table.k]; left > 1;) {
    const std::size_t none = n;
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = find(i);
    std::vector<std::size_t> from(n, none), to(n, none);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (root[i] == root[j]) continue;
        const double d2 = squared_distance(points.point(i), points.point(j));
        if (d2 < best[root[i]]) {
          best[root[i]] = d2;
          from[root[i]] = i;
          to[root[i]] = j;
        }
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (from[c] == none || find(from[c]) == find(to[c])) continue;
      link(from[c], to[c], std::sqrt(best[c]));
      --left;
    }
  }

  const auto from_first = dijkstra(adj, 0);
  const std::size_t far =
      static_cast<std::size_t>(std::max_element(from_first.begin(), from_first.end()) - from_first.begin());
  return dijkstra(adj, far);
}

// ---------------------------------------------------------------------------
// Fitting

CurveFit fit_principal_curve_from(const PointCloud& points, std::span<const double> initial_lambda,
                                  const FitOptions& options) {
  if (options.max_iter == 0) throw ArgumentError("fit_principal_curve: max_iter must be positive");
  if (!(options.tol > 0.0)) throw ArgumentError("fit_principal_curve: tol must be positive");
  std::vector<double> lambda(initial_lambda.begin(), initial_lambda.end());
  CurveFit best;
  double best_err = std::numeric_limits<double>::infinity();
  double prev = 0.0;
  int increases = 0;
  FitReport report;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    PrincipalCurve curve;
    try {
      curve = expectation_step(lambda, points, options.df, options.grid_size);
    } catch (const DegeneracyError&) {
      if (it == 1) throw;
      break;  // projections collapsed; keep the best iterate so far
    }
    auto records = projection_step(curve, points, options.exec);
    double err = 0.0;
    for (const auto& r : records) err += r.distance * r.distance;
    report.iterations = it;
    report.reconstruction_errors.push_back(err);
    for (std::size_t i = 0; i < records.size(); ++i) lambda[i] = records[i].lambda;
    if (err < best_err) {
      best_err = err;
      best.curve = std::move(curve);
      best.records = std::move(records);
      report.best_iteration = it;
    }
    if (it > 1) {
      const double rel = std::abs(prev - err) / std::max(prev, std::numeric_limits<double>::min());
      if (rel < options.tol) {
        report.converged = true;
        break;
      }
      increases = err > prev ? increases + 1 : 0;
      if (increases >= 2) break;
    }
    prev = err;
  }
  best.report = std::move(report);
  return best;
}

CurveFit fit_principal_curve(const PointCloud& points, const FitOptions& options) {
  if (points.size() < 4) throw ArgumentError("fit_principal_curve: need at least 4 points");
  if (points.dim() < 2) throw ArgumentError("fit_principal_curve: need dimension >= 2");
  bool all_same = true;
  for (std::size_t i = 1; i < points.size() && all_same; ++i)
    all_same = squared_distance(points.point(0), points.point(i)) == 0.0;
  if (all_same) throw DegeneracyError("fit_principal_curve: all points are identical");

  std::vector<double> init;
  std::string used = "pc1";
  if (options.init != CurveInit::kPrincipalComponent) {
    init = graph_geodesic_scores(points, 10, options.exec);
    if (!init.empty()) used = "geodesic";
  }
  if (init.empty()) init = principal_component_scores(points);
  CurveFit fit = fit_principal_curve_from(points, init, options);
  fit.report.init_used = used;
  return fit;
}

}  // namespace pmaug
