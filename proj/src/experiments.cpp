#include "nclab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <thread>

#include "nclab/errors.hpp"
#include "nclab/final_layer.hpp"
#include "nclab/io.hpp"
#include "nclab/mean_field.hpp"
#include "nclab/metrics.hpp"
#include "nclab/penultimate.hpp"
#include "nclab/simplex.hpp"
#include "nclab/three_neuron.hpp"

namespace nclab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

double get_number(const json& params, const std::string& key) {
  const auto& v = params.at(key);
  if (!v.is_number()) fail("key \"" + key + "\" must be a number");
  return v.get<double>();
}

long get_integer(const json& params, const std::string& key) {
  const auto& v = params.at(key);
  if (!v.is_number_integer()) fail("key \"" + key + "\" must be an integer");
  return v.get<long>();
}

void check_keys(const json& params, const std::set<std::string>& allowed,
                const std::set<std::string>& required, const std::string& kind) {
  for (const auto& [key, value] : params.items())
    if (!allowed.count(key)) fail("unknown key \"" + key + "\" for experiment kind " + kind);
  for (const auto& key : required)
    if (!params.contains(key)) fail("missing required key \"" + key + "\" for " + kind);
}

void default_to(json& params, const std::string& key, const json& value) {
  if (!params.contains(key)) params[key] = value;
}

// ---- per-kind validation; fills defaults in place -------------------------

void validate_final_layer(json& p) {
  check_keys(p, {"k", "R", "p", "class_index", "tol", "max_iters", "step", "seed"},
             {"k", "R"}, "final-layer");
  default_to(p, "p", 2.0);
  default_to(p, "class_index", 0);
  default_to(p, "tol", 1e-8);
  default_to(p, "max_iters", 100000);
  default_to(p, "step", 1.0);
  default_to(p, "seed", 0);
  const long k = get_integer(p, "k");
  if (k < 2) fail("k must be >= 2");
  if (!(get_number(p, "R") > 0.0)) fail("R must be positive");
  const double pn = get_number(p, "p");
  if (!(pn > 1.0) || std::isinf(pn)) fail("p must lie in (1, inf)");
  const long j = get_integer(p, "class_index");
  if (j < 0 || j >= k) fail("class_index must lie in [0, k)");
  if (!(get_number(p, "tol") > 0.0)) fail("tol must be positive");
  if (get_integer(p, "max_iters") < 1) fail("max_iters must be >= 1");
  if (!(get_number(p, "step") > 0.0)) fail("step must be positive");
}

void validate_penultimate(json& p) {
  check_keys(p, {"k", "m", "R", "tol", "max_iters", "seed"}, {"k", "m", "R"}, "penultimate");
  default_to(p, "tol", 1e-10);
  default_to(p, "max_iters", 100000);
  default_to(p, "seed", 0);
  const long k = get_integer(p, "k");
  const long m = get_integer(p, "m");
  if (k < 2) fail("k must be >= 2");
  if (m < k - 1) fail("m must be >= k-1");
  if (!(get_number(p, "R") > 0.0)) fail("R must be positive");
  if (!(get_number(p, "tol") > 0.0)) fail("tol must be positive");
  if (get_integer(p, "max_iters") < 1) fail("max_iters must be >= 1");
}

void validate_ode(json& p) {
  check_keys(p, {"weights", "T", "dt", "a0", "seed"}, {"weights"}, "ode");
  default_to(p, "T", 1e6);
  default_to(p, "dt", 1e-2);
  default_to(p, "a0", json::array({0.0, 0.0, 0.0}));
  default_to(p, "seed", 0);
  const auto& w = p.at("weights");
  if (!w.is_array() || w.size() != 3) fail("weights must be an array of three numbers");
  double total = 0.0;
  for (const auto& v : w) {
    if (!v.is_number()) fail("weights must be numbers");
    total += v.get<double>();
  }
  if (std::abs(total - 1.0) > 1e-12) fail("weights must sum to 1");
  if (!(w[0].get<double>() > 0.0) || !(w[2].get<double>() > 0.0))
    fail("p1 and p3 must be strictly positive");
  if (w[1].get<double>() < 0.0) fail("p2 must be nonnegative");
  const auto& a0 = p.at("a0");
  if (!a0.is_array() || a0.size() != 3) fail("a0 must be an array of three numbers");
  for (const auto& v : a0)
    if (!v.is_number()) fail("a0 entries must be numbers");
  if (!(get_number(p, "T") > 0.0) || !(get_number(p, "dt") > 0.0))
    fail("T and dt must be positive");
}

void validate_margin(json& p) {
  check_keys(p, {"particles", "T", "dt", "seed"}, {"particles"}, "margin");
  default_to(p, "T", 1e300);  // effectively: run to the risk floor
  default_to(p, "dt", 0.05);
  default_to(p, "seed", 0);
  if (get_integer(p, "particles") < 100) fail("particles must be >= 100");
  if (!(get_number(p, "T") > 0.0) || !(get_number(p, "dt") > 0.0))
    fail("T and dt must be positive");
}

void validate_metrics(json& p) {
  check_keys(p, {"features", "labels", "A", "seed"}, {"features", "labels"}, "metrics");
  default_to(p, "seed", 0);
  const auto& feats = p.at("features");
  const auto& labels = p.at("labels");
  if (!feats.is_array() || feats.empty()) fail("features must be a non-empty array of arrays");
  if (!labels.is_array() || labels.size() != feats.size())
    fail("labels must align with features");
  const size_t dim = feats[0].is_array() ? feats[0].size() : 0;
  if (dim == 0) fail("feature vectors must be non-empty arrays");
  int k = 0;
  for (const auto& f : feats) {
    if (!f.is_array() || f.size() != dim) fail("feature vectors must share one dimension");
    for (const auto& v : f)
      if (!v.is_number()) fail("feature entries must be numbers");
  }
  std::vector<long> counts;
  for (const auto& l : labels) {
    if (!l.is_number_integer() || l.get<long>() < 0) fail("labels must be nonnegative integers");
    k = std::max<long>(k, l.get<long>() + 1);
  }
  if (k < 2) fail("need at least two classes");
  counts.assign(static_cast<size_t>(k), 0);
  for (const auto& l : labels) ++counts[l.get<size_t>()];
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<size_t>(c)] == 0) fail("class " + std::to_string(c) + " is empty");
  if (p.contains("A")) {
    const auto& A = p.at("A");
    if (!A.is_array() || static_cast<int>(A.size()) != k) fail("A must have k rows");
    for (const auto& row : A)
      if (!row.is_array() || row.size() != dim) fail("A rows must match the feature dimension");
  }
}

// ---- experiment cells ------------------------------------------------------

struct CellOutput {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  json report;
  std::string plot_title, plot_x, plot_y;
  std::vector<double> plot_xs, plot_ys;
};

CellOutput run_final_layer(const json& p) {
  SolverSettings settings;
  settings.radius = get_number(p, "R");
  settings.p = get_number(p, "p");
  settings.tol = get_number(p, "tol");
  settings.max_iters = get_integer(p, "max_iters");
  settings.step = get_number(p, "step");
  settings.seed = static_cast<unsigned>(get_integer(p, "seed"));
  const int k = static_cast<int>(get_integer(p, "k"));
  const int j = static_cast<int>(get_integer(p, "class_index"));

  std::vector<IterationRecord> trace;
  const Vec z = minimize_phi_on_ball(k, j, settings, &trace);
  const SimplexConfig closed = simplex_lp(k, settings.radius, settings.p);

  CellOutput out;
  out.header = {"iter", "phi", "residual", "step"};
  for (const auto& r : trace)
    out.rows.push_back({static_cast<double>(r.iter), r.value, r.residual, r.step});
  const double alpha = z[j];
  const double beta = (z.sum() - alpha) / (k - 1.0);
  out.report = {{"seed", get_integer(p, "seed")},
                {"k", k},
                {"R", settings.radius},
                {"p", settings.p},
                {"class_index", j},
                {"iterations", trace.empty() ? 0.0 : static_cast<double>(trace.back().iter)},
                {"phi_value", phi(j, z)},
                {"residual", trace.empty() ? 0.0 : trace.back().residual},
                {"alpha", alpha},
                {"beta", beta},
                {"alpha_closed_form", closed.alpha},
                {"beta_closed_form", closed.beta}};
  out.plot_title = "final-layer solve, k=" + std::to_string(k);
  out.plot_x = "iteration";
  out.plot_y = "phi";
  for (const auto& r : trace) {
    out.plot_xs.push_back(static_cast<double>(r.iter));
    out.plot_ys.push_back(r.value);
  }
  return out;
}

CellOutput run_penultimate(const json& p) {
  PenultimateSettings settings;
  settings.tol = get_number(p, "tol");
  settings.max_iters = get_integer(p, "max_iters");
  settings.seed = static_cast<unsigned>(get_integer(p, "seed"));
  const int k = static_cast<int>(get_integer(p, "k"));
  const int m = static_cast<int>(get_integer(p, "m"));
  const double R = get_number(p, "R");

  std::vector<LabeledPoint> pts;
  for (int i = 0; i < k; ++i) pts.push_back({i, i, 1.0 / k});
  const LabeledPointSet data(pts, k);

  std::vector<PenultimateRecord> trace;
  const PenultimateState state = optimize_penultimate(data, m, R, settings, &trace);
  const IsometryReport iso = check_isometry(state);

  const SimplexConfig oracle = simplex_l2(k, R);
  double oracle_risk = 0.0;
  for (int i = 0; i < k; ++i) oracle_risk += phi(i, vertex(oracle, i)) / k;
  std::map<int, Vec> outputs;
  for (int i = 0; i < k; ++i) outputs[i] = state.A * state.Y.col(i);
  const double final_risk = risk(data, outputs);

  const double target_dist_sq = pairwise_distance_sq(oracle);
  double dist_err = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j2 = i + 1; j2 < k; ++j2)
      dist_err = std::max(dist_err, std::abs((state.Y.col(i) - state.Y.col(j2)).squaredNorm() -
                                             target_dist_sq));

  CellOutput out;
  out.header = {"iter", "risk", "gram_deviation", "isometry_residual"};
  for (const auto& r : trace)
    out.rows.push_back(
        {static_cast<double>(r.iter), r.risk, r.gram_deviation, r.isometry_residual});
  out.report = {{"seed", get_integer(p, "seed")},
                {"k", k},
                {"m", m},
                {"R", R},
                {"iterations", static_cast<double>(trace.size())},
                {"risk_final", final_risk},
                {"oracle_risk", oracle_risk},
                {"risk_gap", final_risk - oracle_risk},
                {"center_norm", center_of_mass(state).norm() * k},
                {"max_radius_deviation", iso.max_radius_deviation},
                {"max_gram_deviation", iso.max_gram_deviation},
                {"max_pairwise_distance_error", dist_err},
                {"min_singular_value", iso.singular_values.minCoeff()},
                {"max_singular_value", iso.singular_values.maxCoeff()}};
  out.plot_title = "penultimate optimization, k=" + std::to_string(k);
  out.plot_x = "iteration";
  out.plot_y = "risk";
  for (const auto& r : trace) {
    out.plot_xs.push_back(static_cast<double>(r.iter));
    out.plot_ys.push_back(r.risk);
  }
  return out;
}

CellOutput run_ode(const json& p) {
  const auto& w = p.at("weights");
  const auto& a0 = p.at("a0");
  const ThreeNeuronState s0 =
      make_three_neuron_state(a0[0].get<double>(), a0[1].get<double>(), a0[2].get<double>(),
                              w[0].get<double>(), w[1].get<double>(), w[2].get<double>());
  const double T = get_number(p, "T");
  const double dt = get_number(p, "dt");
  const auto trajectory = integrate_three_neuron(s0, T, dt);
  const auto gaps = class_gap(trajectory);

  CellOutput out;
  out.header = {"t", "a1", "a2", "a3", "gap"};
  for (size_t i = 0; i < trajectory.size(); ++i) {
    const auto& s = trajectory[i];
    out.rows.push_back({s.t, s.a1, s.a2, s.a3, gaps[i]});
  }
  const auto& last = trajectory.back();
  out.report = {{"seed", get_integer(p, "seed")},
                {"p1", s0.p1},
                {"p2", s0.p2},
                {"p3", s0.p3},
                {"T", T},
                {"dt", dt},
                {"a1_0", s0.a1},
                {"a2_0", s0.a2},
                {"a3_0", s0.a3},
                {"steps", static_cast<double>(trajectory.size() - 1)},
                {"a1_final", last.a1},
                {"a2_final", last.a2},
                {"a3_final", last.a3},
                {"gap_final", gaps.back()},
                {"gap_limit", std::log(s0.p3 / (2.0 * s0.p1))},
                {"a1_closed_form", std::log(std::exp(s0.a1) + s0.p1 * last.t)}};
  out.plot_title = "three-neuron class gap";
  out.plot_x = "log10(1+t)";
  out.plot_y = "h(t,1) - h(t,-1)";
  for (size_t i = 0; i < trajectory.size(); ++i) {
    out.plot_xs.push_back(std::log10(1.0 + trajectory[i].t));
    out.plot_ys.push_back(gaps[i]);
  }
  return out;
}

CellOutput run_margin(const json& p) {
  const int particles = static_cast<int>(get_integer(p, "particles"));
  const double T = get_number(p, "T");
  const double dt = get_number(p, "dt");
  const auto seed = static_cast<unsigned>(get_integer(p, "seed"));
  const BinaryPointSet data = margin_dataset();

  std::vector<MarginRecord> trace;
  const ParticleEnsemble ens = train_mean_field_relu(data, particles, T, dt, seed, &trace);
  const MarginReport report = margin_report(ens, data);

  CellOutput out;
  out.header = {"t", "risk", "margin", "path_norm", "spread_pos", "spread_neg"};
  for (const auto& r : trace)
    out.rows.push_back({r.t, r.risk, r.normalized_margin, r.path_norm, r.spread_positive,
                        r.spread_negative});
  out.report = {{"seed", get_integer(p, "seed")},
                {"particles", particles},
                {"T", T},
                {"dt", dt},
                {"steps", static_cast<double>(trace.size())},
                {"risk_final", trace.empty() ? binary_risk(ens, data) : trace.back().risk},
                {"margin_final", report.normalized_margin},
                {"path_norm", report.path_norm},
                {"spread_positive", report.spread_positive},
                {"spread_negative", report.spread_negative},
                {"fitted_b", fit_margin_family_b(ens)}};
  out.plot_title = "normalized margin, m=" + std::to_string(particles);
  out.plot_x = "log10(1+t)";
  out.plot_y = "margin";
  for (const auto& r : trace) {
    out.plot_xs.push_back(std::log10(1.0 + r.t));
    out.plot_ys.push_back(r.normalized_margin);
  }
  return out;
}

CellOutput run_metrics(const json& p) {
  const auto& feats = p.at("features");
  const auto& labels = p.at("labels");
  std::vector<Vec> features;
  std::vector<int> classes;
  for (size_t i = 0; i < feats.size(); ++i) {
    Vec v(feats[i].size());
    for (size_t d = 0; d < feats[i].size(); ++d) v[static_cast<Eigen::Index>(d)] = feats[i][d];
    features.push_back(std::move(v));
    classes.push_back(labels[i].get<int>());
  }
  std::optional<Mat> A;
  if (p.contains("A")) {
    const auto& rows = p.at("A");
    Mat mat(rows.size(), feats[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t d = 0; d < feats[0].size(); ++d)
        mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    A = std::move(mat);
  }
  const CollapseReport report = collapse_report(features, classes, A);
  const int k = *std::max_element(classes.begin(), classes.end()) + 1;

  CellOutput out;
  out.header = {"within_class_variance", "equinorm_deviation", "equiangular_deviation",
                "self_duality_deviation"};
  out.rows.push_back({report.within_class_variance, report.equinorm_deviation,
                      report.equiangular_deviation,
                      report.self_duality_deviation.value_or(
                          std::numeric_limits<double>::quiet_NaN())});
  out.report = {{"seed", get_integer(p, "seed")},
                {"n_points", static_cast<double>(features.size())},
                {"k", k},
                {"within_class_variance", report.within_class_variance},
                {"equinorm_deviation", report.equinorm_deviation},
                {"equiangular_deviation", report.equiangular_deviation},
                {"center_norm", report.center.norm()}};
  if (report.self_duality_deviation)
    out.report["self_duality_deviation"] = *report.self_duality_deviation;
  out.plot_title = "centered class-mean norms";
  out.plot_x = "class";
  out.plot_y = "||mean_i - M||";
  // Primary trace for a snapshot: the per-class centered norms.
  {
    std::vector<Vec> mean(static_cast<size_t>(k), Vec::Zero(features[0].size()));
    std::vector<int> count(static_cast<size_t>(k), 0);
    for (size_t i = 0; i < features.size(); ++i) {
      mean[static_cast<size_t>(classes[i])] += features[i];
      ++count[static_cast<size_t>(classes[i])];
    }
    for (int c = 0; c < k; ++c) mean[static_cast<size_t>(c)] /= count[static_cast<size_t>(c)];
    for (int c = 0; c < k; ++c) {
      out.plot_xs.push_back(c);
      out.plot_ys.push_back((mean[static_cast<size_t>(c)] - report.center).norm());
    }
  }
  return out;
}

// Validates and fills defaults; used both at parse time (early errors) and
// just before running a cell.
json normalized_params(const std::string& kind, json params) {
  if (kind == "final-layer")
    validate_final_layer(params);
  else if (kind == "penultimate")
    validate_penultimate(params);
  else if (kind == "ode")
    validate_ode(params);
  else if (kind == "margin")
    validate_margin(params);
  else if (kind == "metrics")
    validate_metrics(params);
  else
    fail("unknown experiment kind \"" + kind + "\"");
  return params;
}

CellOutput run_cell(const ExperimentConfig& config) {
  const json params = normalized_params(config.kind, config.params);
  if (config.kind == "final-layer") return run_final_layer(params);
  if (config.kind == "penultimate") return run_penultimate(params);
  if (config.kind == "ode") return run_ode(params);
  if (config.kind == "margin") return run_margin(params);
  return run_metrics(params);
}

int thread_budget() {
  if (const char* env = std::getenv("COLLAPSE_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string cell_name(const std::vector<std::pair<std::string, json>>& assignment) {
  std::string name;
  for (const auto& [key, value] : assignment) {
    if (!name.empty()) name += '_';
    name += key + '=';
    name += value.is_number() ? format_double(value.get<double>()) : value.dump();
  }
  return name;
}

}  // namespace

ExperimentConfig parse_config(const json& config) {
  if (!config.is_object()) fail("config must be a JSON object");
  if (!config.contains("kind") || !config.at("kind").is_string())
    fail("config requires a string key \"kind\"");

  ExperimentConfig parsed;
  parsed.kind = config.at("kind").get<std::string>();
  if (config.contains("out")) {
    if (!config.at("out").is_string()) fail("key \"out\" must be a string");
    parsed.out = config.at("out").get<std::string>();
  }
  parsed.params = config;
  parsed.params.erase("kind");
  parsed.params.erase("grid");
  parsed.params.erase("out");

  if (config.contains("grid")) {
    const auto& grid = config.at("grid");
    if (!grid.is_object() || grid.empty()) fail("grid must be a non-empty object of arrays");
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty())
        fail("grid values for \"" + key + "\" must be a non-empty array");
      parsed.grid[key] = std::vector<json>(values.begin(), values.end());
    }
  }

  if (parsed.grid.empty()) {
    normalized_params(parsed.kind, parsed.params);
  } else {
    // Validate every cell up front; nothing is written if any cell is bad.
    std::vector<std::vector<std::pair<std::string, json>>> cells{{}};
    for (const auto& [key, values] : parsed.grid) {
      std::vector<std::vector<std::pair<std::string, json>>> next;
      for (const auto& cell : cells)
        for (const auto& value : values) {
          auto extended = cell;
          extended.emplace_back(key, value);
          next.push_back(std::move(extended));
        }
      cells = std::move(next);
    }
    for (const auto& cell : cells) {
      json merged = parsed.params;
      for (const auto& [key, value] : cell) merged[key] = value;
      normalized_params(parsed.kind, merged);
    }
  }
  return parsed;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path.string());
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    fail("config file is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(config);
}

int run_single_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir, bool plot) {
  std::filesystem::create_directories(out_dir);
  try {
    CellOutput cell = run_cell(config);
    write_csv(out_dir / "results.csv", cell.header, cell.rows);
    std::ofstream report(out_dir / "report.json", std::ios::binary);
    report << cell.report.dump(2) << '\n';
    if (plot && !cell.plot_xs.empty())
      write_line_chart(out_dir / "plot.svg", cell.plot_title, cell.plot_x, cell.plot_y,
                       cell.plot_xs, cell.plot_ys);
    return kExitOk;
  } catch (const NonConverged& e) {
    std::cerr << "non-converged: " << e.what() << '\n';
    return kExitNonConverged;
  }
}

int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   bool plot) {
  if (config.grid.empty()) return run_single_experiment(config, out_dir, plot);

  std::vector<std::vector<std::pair<std::string, json>>> cells{{}};
  for (const auto& [key, values] : config.grid) {
    std::vector<std::vector<std::pair<std::string, json>>> next;
    for (const auto& cell : cells)
      for (const auto& value : values) {
        auto extended = cell;
        extended.emplace_back(key, value);
        next.push_back(std::move(extended));
      }
    cells = std::move(next);
  }

  std::vector<int> codes(cells.size(), kExitOk);
  std::atomic<size_t> cursor{0};
  const int budget = std::min<int>(thread_budget(), static_cast<int>(cells.size()));
  const auto worker = [&] {
    while (true) {
      const size_t i = cursor.fetch_add(1);
      if (i >= cells.size()) return;
      ExperimentConfig cell_config = config;
      cell_config.grid.clear();
      for (const auto& [key, value] : cells[i]) cell_config.params[key] = value;
      codes[i] = run_single_experiment(cell_config, out_dir / cell_name(cells[i]), plot);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < budget; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace nclab
