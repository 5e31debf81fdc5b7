#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <random>

#include "nclab/experiments.hpp"
#include "nclab/final_layer.hpp"
#include "nclab/io.hpp"
#include "nclab/mean_field.hpp"
#include "nclab/metrics.hpp"
#include "nclab/penultimate.hpp"
#include "nclab/simplex.hpp"
#include "nclab/three_neuron.hpp"

namespace nclab {

namespace {

Vec random_logits(std::mt19937_64& rng, int k, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec z(k);
  for (int i = 0; i < k; ++i) z[i] = u(rng);
  return z;
}

// pass iff measured <= tolerance
CheckResult upper(const std::string& name, double measured, double tolerance) {
  return {name, measured <= tolerance, measured, tolerance};
}

// pass iff measured >= tolerance
CheckResult lower(const std::string& name, double measured, double tolerance) {
  return {name, measured >= tolerance, measured, tolerance};
}

std::vector<CheckResult> suite_oracle() {
  std::vector<CheckResult> checks;
  for (int k = 2; k <= 11; ++k)
    for (double p : {1.5, 2.0, 3.0})
      for (double R : {1.0, 5.0}) {
        SolverSettings settings;
        settings.radius = R;
        settings.p = p;
        settings.tol = 1e-10;
        const Vec z = minimize_phi_on_ball(k, 0, settings);
        const Vec v = vertex(simplex_lp(k, R, p), 0);
        const std::string name = "oracle/k=" + std::to_string(k) + ",p=" + format_double(p) +
                                 ",R=" + format_double(R);
        checks.push_back(upper(name, (z - v).cwiseAbs().maxCoeff(), 1e-5));
      }
  return checks;
}

std::vector<CheckResult> suite_hessian() {
  std::vector<CheckResult> checks;
  std::mt19937_64 rng(2024);

  double worst_min_eig = 0.0;       // most negative eigenvalue seen
  double smallest_second = 1e300;   // smallest second eigenvalue seen
  double worst_null = 0.0;          // max |H (1,...,1)|
  double worst_quad = 0.0;          // most negative a^T H a over random a
  for (int k = 2; k <= 10; ++k) {
    for (int trial = 0; trial < 25; ++trial) {
      const Vec z = random_logits(rng, k, 3.0);
      const Mat h = hess_phi(z);
      Eigen::SelfAdjointEigenSolver<Mat> eig(h);
      worst_min_eig = std::min(worst_min_eig, eig.eigenvalues()[0]);
      if (k >= 2) smallest_second = std::min(smallest_second, eig.eigenvalues()[1]);
      worst_null = std::max(worst_null, (h * Vec::Ones(k)).cwiseAbs().maxCoeff());
      const Vec a = random_logits(rng, k, 2.0);
      const Vec pi = softmax(z);
      const double quad = a.dot(h * a);
      worst_quad = std::min(worst_quad, quad);
      // the appendix identity: a^T H a = ||a||^2_{l2(pi)} - ||a||^2_{l1(pi)}
      const double identity =
          (a.array().square() * pi.array()).sum() - std::pow((a.array() * pi.array()).sum(), 2);
      worst_null = std::max(worst_null, std::abs(quad - identity));
    }
  }
  checks.push_back(upper("hessian/psd-min-eigenvalue", -worst_min_eig, 1e-10));
  checks.push_back(lower("hessian/second-eigenvalue-positive", smallest_second, 1e-8));
  checks.push_back(upper("hessian/null-direction", worst_null, 1e-12));
  checks.push_back(upper("hessian/quadratic-form-negative-part", -worst_quad, 1e-12));

  double shift_dev = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 9);
    const Vec z = random_logits(rng, k, 4.0);
    std::uniform_real_distribution<double> lam(-10.0, 10.0);
    const double l = lam(rng);
    const Vec shifted = z.array() + l;
    shift_dev = std::max(shift_dev, std::abs(phi(0, z) - phi(0, shifted)));
    shift_dev = std::max(shift_dev, (softmax(z) - softmax(shifted)).cwiseAbs().maxCoeff());
  }
  checks.push_back(upper("softmax-phi/shift-invariance", shift_dev, 1e-12));

  double fd_rel = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 9);
    const Vec z = random_logits(rng, k, 3.0);
    const int j = static_cast<int>(rng() % static_cast<unsigned>(k));
    const Vec g = grad_phi(j, z);
    for (int i = 0; i < k; ++i) {
      Vec zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (phi(j, zp) - phi(j, zm)) / (2.0 * h);
      fd_rel = std::max(fd_rel, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
    }
  }
  checks.push_back(upper("grad-phi/finite-difference", fd_rel, 1e-6));
  return checks;
}

std::vector<CheckResult> suite_collapse() {
  std::vector<CheckResult> checks;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::uniform_real_distribution<double> logit(-3.0, 3.0);

  double worst_increase = -1e300;
  double min_strict_decrease = 1e300;
  for (int run = 0; run < 1000; ++run) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const int n = k + static_cast<int>(rng() % 10);
    std::vector<LabeledPoint> pts;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = u(rng);
      pts.push_back({i, i % k, w});
      total += w;
    }
    for (auto& pt : pts) pt.weight /= total;
    const LabeledPointSet data(pts, k);
    std::map<int, Vec> outputs;
    for (int i = 0; i < n; ++i) outputs[i] = random_logits(rng, k, 3.0);
    const ClassifierOutputs before(data, outputs);
    const ClassifierOutputs after = collapse_to_means(before);
    const double diff = risk(after) - risk(before);
    worst_increase = std::max(worst_increase, diff);

    // size of within-class deviations orthogonal to (1,...,1)
    double ortho = 0.0;
    for (const auto& pt : data.points())
      ortho = std::max(
          ortho, project_ones_complement(before.at(pt.id) - after.at(pt.id)).norm());
    if (ortho > 1e-6) min_strict_decrease = std::min(min_strict_decrease, -diff);
  }
  checks.push_back(upper("collapse/descent-1000-random-datasets", worst_increase, 0.0));
  checks.push_back(lower("collapse/strict-decrease-when-orthogonal", min_strict_decrease, 0.0));

  // equality case: within-class deviations parallel to (1,...,1)
  double equality_dev = 0.0;
  for (int run = 0; run < 50; ++run) {
    const int k = 2 + static_cast<int>(rng() % 5);
    std::vector<LabeledPoint> pts;
    std::map<int, Vec> outputs;
    int id = 0;
    for (int c = 0; c < k; ++c) {
      const Vec base = random_logits(rng, k, 2.0);
      for (int r = 0; r < 3; ++r) {
        pts.push_back({id, c, 1.0 / (3.0 * k)});
        outputs[id] = base.array() + logit(rng);  // base + lambda (1,...,1)
        ++id;
      }
    }
    const ClassifierOutputs before(LabeledPointSet(pts, k), outputs);
    equality_dev =
        std::max(equality_dev, std::abs(risk(collapse_to_means(before)) - risk(before)));
  }
  checks.push_back(upper("collapse/equality-when-parallel-ones", equality_dev, 1e-12));

  // rotation + translation invariance of the collapse metrics
  double invariance_dev = 0.0;
  for (int run = 0; run < 20; ++run) {
    const int k = 3 + static_cast<int>(rng() % 3);
    const int dim = k + 2;
    std::vector<Vec> features;
    std::vector<int> labels;
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < 4; ++r) {
        features.push_back(random_logits(rng, dim, 2.0));
        labels.push_back(c);
      }
    Mat a_rows(k, dim);
    for (int c = 0; c < k; ++c) a_rows.row(c) = random_logits(rng, dim, 2.0).transpose();
    const CollapseReport base = collapse_report(features, labels, a_rows);

    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i) g.row(i) = random_logits(rng, dim, 1.0).transpose();
    const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
    const Vec shift = random_logits(rng, dim, 5.0);
    std::vector<Vec> moved;
    for (const auto& f : features) moved.push_back(q * f + shift);
    // rows of A rotate with the features; translation only affects centered stats
    const Mat a_moved = a_rows * q.transpose();
    const CollapseReport rotated = collapse_report(moved, labels, a_moved);

    invariance_dev = std::max(
        invariance_dev,
        std::abs(base.within_class_variance - rotated.within_class_variance));
    invariance_dev =
        std::max(invariance_dev, std::abs(base.equinorm_deviation - rotated.equinorm_deviation));
    invariance_dev = std::max(
        invariance_dev, std::abs(base.equiangular_deviation - rotated.equiangular_deviation));
    invariance_dev = std::max(invariance_dev, std::abs(*base.self_duality_deviation -
                                                       *rotated.self_duality_deviation));
  }
  checks.push_back(upper("metrics/rotation-translation-invariance", invariance_dev, 1e-10));

  // exact simplex with dual rows: all deviations vanish
  {
    const SimplexConfig config = simplex_l2(4, 1.0);
    std::vector<Vec> features;
    std::vector<int> labels;
    Mat a_rows(4, 4);
    for (int i = 0; i < 4; ++i) {
      features.push_back(vertex(config, i));
      labels.push_back(i);
      a_rows.row(i) = vertex(config, i).transpose();
    }
    const CollapseReport report = collapse_report(features, labels, a_rows);
    const double worst =
        std::max({report.within_class_variance, report.equinorm_deviation,
                  report.equiangular_deviation, *report.self_duality_deviation});
    checks.push_back(upper("metrics/exact-simplex-all-deviations", worst, 1e-12));
  }
  return checks;
}

std::vector<CheckResult> suite_penultimate() {
  std::vector<CheckResult> checks;
  for (int k : {3, 4, 5})
    for (int m : {k - 1, 2 * k})
      for (double R : {1.0, 2.0}) {
        std::vector<LabeledPoint> pts;
        for (int i = 0; i < k; ++i) pts.push_back({i, i, 1.0 / k});
        const LabeledPointSet data(pts, k);
        const PenultimateState state = optimize_penultimate(data, m, R);
        const IsometryReport iso = check_isometry(state);
        const std::string tag = "penultimate/k=" + std::to_string(k) + ",m=" +
                                std::to_string(m) + ",R=" + format_double(R);

        checks.push_back(upper(tag + "/center", state.Y.rowwise().sum().norm(), 1e-3 * R));
        const double target = 2.0 * k * R * R / (k - 1.0);
        double dist_err = 0.0;
        for (int i = 0; i < k; ++i)
          for (int j = i + 1; j < k; ++j)
            dist_err = std::max(
                dist_err,
                std::abs((state.Y.col(i) - state.Y.col(j)).squaredNorm() - target));
        checks.push_back(upper(tag + "/pairwise-distances", dist_err, 1e-3));
        checks.push_back(upper(tag + "/gram-isometry", iso.max_gram_deviation, 1e-3));
      }
  return checks;
}

std::vector<CheckResult> suite_ode() {
  std::vector<CheckResult> checks;

  {  // closed-form a1 on the collapse-case weights
    const auto s0 = make_three_neuron_state(0.0, 0.0, 0.0, 0.25, 0.25, 0.5);
    const auto traj = integrate_three_neuron(s0, 12.0, 1e-2);
    const double exact = std::log(1.0 + 0.25 * 12.0);
    checks.push_back(upper("ode/a1-closed-form",
                           std::abs(traj.back().a1 - exact) / std::abs(exact), 1e-6));
  }
  {  // invariant manifold: exp(2 a2 - a3) = 2 p2 / (3 p3)
    const double p1 = 0.3, p2 = 0.3, p3 = 0.4;
    const auto s0 =
        make_three_neuron_state(0.5, 0.0, std::log(3.0 * p3 / (2.0 * p2)), p1, p2, p3);
    const auto traj = integrate_three_neuron(s0, 100.0, 1e-2);
    const double a2_exact = std::log(std::exp(s0.a2) + p2 * 100.0 / 3.0);
    const double a3_exact = std::log(3.0 * p3 / (2.0 * p2)) + 2.0 * a2_exact;
    checks.push_back(upper("ode/manifold-a2",
                           std::abs(traj.back().a2 - a2_exact) / std::abs(a2_exact), 1e-6));
    checks.push_back(upper("ode/manifold-a3",
                           std::abs(traj.back().a3 - a3_exact) / std::abs(a3_exact), 1e-6));
    double factor_dev = 0.0;
    const double target = 2.0 * p2 / (3.0 * p3);
    for (const auto& s : traj)
      factor_dev = std::max(factor_dev, std::abs(std::exp(2.0 * s.a2 - s.a3) - target));
    checks.push_back(upper("ode/invariant-factor-conserved", factor_dev, 1e-6));
  }
  {  // generic initialization is attracted to the invariant factor
    const auto s0 = make_three_neuron_state(0.7, -0.4, 0.2, 0.3, 0.3, 0.4);
    const auto traj = integrate_three_neuron(s0, 1e4, 1e-2);
    const double target = 2.0 * s0.p2 / (3.0 * s0.p3);
    checks.push_back(upper("ode/invariant-factor-attracting",
                           std::abs(std::exp(2.0 * traj.back().a2 - traj.back().a3) - target),
                           1e-3));
  }
  {  // gap limit log(p3 / (2 p1)) over 20 random weight triples at T = 1e6
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> a_init(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      double p1 = u(rng), p2 = u(rng), p3 = u(rng);
      const double total = p1 + p2 + p3;
      p1 /= total;
      p2 /= total;
      p3 /= total;
      if (p1 < 0.05 || p3 < 0.05) {
        --trial;
        continue;
      }
      const auto s0 = make_three_neuron_state(a_init(rng), a_init(rng), a_init(rng), p1, p2, p3);
      const auto traj = integrate_three_neuron(s0, 1e6, 1e-2);
      const double gap = class_gap(traj).back();
      worst = std::max(worst, std::abs(gap - std::log(p3 / (2.0 * p1))));
    }
    checks.push_back(upper("ode/gap-limit-20-random-triples", worst, 5e-3));
  }
  {  // p3 = 2 p1: the only weights where the outer class collapses
    const auto s0 = make_three_neuron_state(0.4, 0.1, -0.3, 0.25, 0.25, 0.5);
    const auto traj = integrate_three_neuron(s0, 1e6, 1e-2);
    checks.push_back(upper("ode/gap-collapse-case", std::abs(class_gap(traj).back()), 5e-3));
  }
  return checks;
}

std::vector<CheckResult> suite_margin() {
  std::vector<CheckResult> checks;
  const BinaryPointSet data = margin_dataset();

  double fb_dev = 0.0;
  for (double b : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double margin = 1e300;
    for (const auto& pt : data.points())
      margin = std::min(margin, pt.xi * f_b_classifier(b, pt.x));
    fb_dev = std::max(fb_dev, std::abs(margin - 0.5));
  }
  checks.push_back(upper("margin/f_b-margin-exactly-half", fb_dev, 0.0));

  std::vector<MarginRecord> trace;
  const ParticleEnsemble ens = train_mean_field_relu(data, 500, 1e300, 0.05, 0, &trace);
  const MarginReport report = margin_report(ens, data);
  checks.push_back(lower("margin/trained-margin-lower", report.normalized_margin, 0.45));
  checks.push_back(
      upper("margin/trained-margin-upper", report.normalized_margin, 0.5 + 1e-9));
  double worst_traj = 0.0;
  for (const auto& r : trace) worst_traj = std::max(worst_traj, r.normalized_margin);
  checks.push_back(upper("margin/trajectory-never-exceeds-half", worst_traj, 0.5 + 1e-9));
  checks.push_back(
      lower("margin/class-spread-positive-class", report.spread_positive, 0.1));
  double correct = 1e300;
  for (const auto& pt : data.points()) correct = std::min(correct, pt.xi * ens.value(pt.x));
  checks.push_back(lower("margin/classifies-all-points", correct, 0.0));
  return checks;
}

}  // namespace

std::vector<CheckResult> verify_suite(const std::string& suite) {
  if (suite == "oracle") return suite_oracle();
  if (suite == "hessian") return suite_hessian();
  if (suite == "collapse") return suite_collapse();
  if (suite == "penultimate") return suite_penultimate();
  if (suite == "ode") return suite_ode();
  if (suite == "margin") return suite_margin();
  if (suite == "all") {
    std::vector<CheckResult> all;
    for (const char* name : {"oracle", "hessian", "collapse", "penultimate", "ode", "margin"}) {
      auto checks = verify_suite(name);
      all.insert(all.end(), checks.begin(), checks.end());
    }
    return all;
  }
  throw ConfigError("unknown verify suite \"" + suite +
                    "\" (expected oracle|hessian|collapse|penultimate|ode|margin|all)");
}

int run_verify(const std::string& suite, std::ostream& out) {
  const auto checks = verify_suite(suite);
  bool all_pass = true;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << format_double(c.measured)
        << " tol=" << format_double(c.tolerance) << '\n';
    all_pass = all_pass && c.pass;
  }
  out << (all_pass ? "all checks passed" : "some checks FAILED") << " (" << checks.size()
      << " checks)\n";
  return all_pass ? kExitOk : 1;
}

}  // namespace nclab
