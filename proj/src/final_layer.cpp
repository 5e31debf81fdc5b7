#include "nclab/final_layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

double lp_norm(const Vec& z, double p) {
  return std::pow(z.array().abs().pow(p).sum(), 1.0 / p);
}

// Unique root of x + mu x^{p-1} = a on (0, a], a > 0, mu >= 0.
// Newton from the upper end, bisection-safeguarded; monotone increasing lhs.
double scaled_coordinate(double a, double mu, double p) {
  if (a == 0.0 || mu == 0.0) return a;
  double lo = 0.0, hi = a, x = a;
  for (int it = 0; it < 80; ++it) {
    const double f = x + mu * std::pow(x, p - 1.0) - a;
    (f > 0.0 ? hi : lo) = x;
    const double df = 1.0 + mu * (p - 1.0) * std::pow(x, p - 2.0);
    double next = x - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-17 + 1e-16 * a) return next;
    x = next;
  }
  return x;
}

void validate_norm(double R, double p) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("radius R must be positive");
  if (!std::isfinite(p) || p <= 1.0)
    throw UnsupportedNorm("norm exponent p must lie in (1, inf), got " + std::to_string(p));
}

}  // namespace

ClassifierOutputs::ClassifierOutputs(LabeledPointSet data, std::map<int, Vec> outputs)
    : data_(std::move(data)), outputs_(std::move(outputs)) {
  for (const auto& pt : data_.points()) {
    auto it = outputs_.find(pt.id);
    if (it == outputs_.end())
      throw std::invalid_argument("missing output for input id " + std::to_string(pt.id));
    if (it->second.size() != data_.k())
      throw std::invalid_argument("output length != k for input id " + std::to_string(pt.id));
    if (!it->second.allFinite())
      throw std::invalid_argument("non-finite output for input id " + std::to_string(pt.id));
  }
}

double risk(const ClassifierOutputs& outputs) { return risk(outputs.data(), outputs.outputs()); }

Vec project_ones_complement(const Vec& z) {
  return z.array() - z.mean();
}

Vec project_lp_ball(const Vec& z, double R, double p) {
  validate_norm(R, p);
  if (lp_norm(z, p) <= R) return z;
  if (p == 2.0) return z * (R / z.norm());

  const Vec a = z.array().abs();
  const auto x_of = [&](double mu) {
    Vec x(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) x[i] = scaled_coordinate(a[i], mu, p);
    return x;
  };

  // g(mu) = ||x(mu)||_p - R is strictly decreasing with g(0) > 0.
  double lo = 0.0, hi = 1.0;
  while (lp_norm(x_of(hi), p) > R) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericFailure("lp projection bracket diverged");
  }
  double mu = 0.5 * (lo + hi);
  Vec x;
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    x = x_of(mu);
    const double norm = lp_norm(x, p);
    const double g = norm - R;
    if (std::abs(g) <= 1e-13 * R || hi - lo <= 1e-15 * std::max(1.0, hi)) {
      converged = true;
      break;
    }
    (g > 0.0 ? lo : hi) = mu;
    // d||x||_p/dmu through dx_i/dmu = -x^{p-1} / (1 + mu (p-1) x^{p-2})
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= 0.0) continue;
      const double xp1 = std::pow(x[i], p - 1.0);
      acc += xp1 * (-xp1 / (1.0 + mu * (p - 1.0) * std::pow(x[i], p - 2.0)));
    }
    const double dg = std::pow(norm, 1.0 - p) * acc;
    double next = mu - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  if (!converged) throw NumericFailure("lp ball projection: dual Newton did not converge");
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = z[i] < 0.0 ? -x[i] : x[i];
  return out;
}

ClassifierOutputs collapse_to_means(const ClassifierOutputs& outputs) {
  const LabeledPointSet& data = outputs.data();
  const int k = data.k();
  const auto mass = data.class_mass();
  for (int i = 0; i < k; ++i)
    if (mass[static_cast<size_t>(i)] <= 0.0)
      throw std::invalid_argument("class " + std::to_string(i) + " is empty");

  std::vector<Vec> means(static_cast<size_t>(k), Vec::Zero(k));
  for (const auto& pt : data.points())
    means[static_cast<size_t>(pt.label)] += pt.weight * outputs.at(pt.id);
  for (int i = 0; i < k; ++i) means[static_cast<size_t>(i)] /= mass[static_cast<size_t>(i)];

  std::map<int, Vec> collapsed;
  for (const auto& pt : data.points()) collapsed[pt.id] = means[static_cast<size_t>(pt.label)];
  return ClassifierOutputs(data, std::move(collapsed));
}

Vec minimize_phi_on_ball(int k, int j, const SolverSettings& settings,
                         std::vector<IterationRecord>* trace) {
  if (k < 2) throw std::invalid_argument("class count k must be >= 2");
  if (j < 0 || j >= k) throw std::invalid_argument("class index out of range");
  if (!(settings.step > 0.0) || !(settings.tol > 0.0))
    throw std::invalid_argument("step and tol must be positive");
  validate_norm(settings.radius, settings.p);

  const double R = settings.radius;
  const double p = settings.p;
  const double c = 1e-4;  // Armijo constant

  Vec z = Vec::Zero(k);
  double fz = phi(j, z);
  double eta = settings.step;
  double residual = 0.0;

  for (long it = 0; it < settings.max_iters; ++it) {
    // The gradient of Phi sums to zero identically; subtracting the mean only
    // removes floating-point drift along the flat direction (1,...,1).
    const Vec g = project_ones_complement(grad_phi(j, z));
    residual = (z - project_lp_ball(z - g, R, p)).norm();
    if (trace) trace->push_back({it, fz, residual, eta});
    if (residual <= settings.tol) return z;

    Vec w;
    double fw;
    while (true) {
      w = project_lp_ball(z - eta * g, R, p);
      fw = phi(j, w);
      // ||hess_phi|| <= 1/2, so any step <= 1 descends; skipping the Armijo
      // test there avoids stalling on function-value rounding noise.
      if (eta <= 1.0 || fw <= fz + c * g.dot(w - z)) break;
      eta *= 0.5;
    }
    z = std::move(w);
    fz = fw;
    eta = std::min(eta * 1.3, 1e8);
  }
  throw NonConverged("minimize_phi_on_ball: no convergence after " +
                         std::to_string(settings.max_iters) + " iterations (residual " +
                         std::to_string(residual) + ")",
                     residual, settings.max_iters, z);
}

}  // namespace nclab
