#include "nclab/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

// log(1 + exp(-2u)) without overflow on either tail.
double exp_tail_loss(double u) {
  if (u >= 0.0) return std::log1p(std::exp(-2.0 * u));
  return -2.0 * u + std::log1p(std::exp(2.0 * u));
}

// d/du log(1 + exp(-2u)) = -2 / (1 + exp(2u)).
double exp_tail_loss_deriv(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-2.0 * u);
    return -2.0 * e / (1.0 + e);
  }
  return -2.0 / (1.0 + std::exp(2.0 * u));
}

// Risk is below any double once the worst margin passes ~340; gradients are
// pure denormal noise there and training carries no more information.
constexpr double kRiskFloor = 1e-290;

struct Snapshot {
  double margin;
  double spread_pos;
  double spread_neg;
};

Snapshot normalized_snapshot(const ParticleEnsemble& ens, const BinaryPointSet& data) {
  const double pn = ens.path_norm();
  double margin = std::numeric_limits<double>::infinity();
  double pos_min = margin, pos_max = -margin, neg_min = margin, neg_max = -margin;
  for (const auto& pt : data.points()) {
    const double h = ens.value(pt.x) / pn;
    margin = std::min(margin, pt.xi * h);
    if (pt.xi > 0) {
      pos_min = std::min(pos_min, h);
      pos_max = std::max(pos_max, h);
    } else {
      neg_min = std::min(neg_min, h);
      neg_max = std::max(neg_max, h);
    }
  }
  return {margin, pos_max - pos_min, neg_max - neg_min};
}

}  // namespace

double relu(double z) { return z > 0.0 ? z : 0.0; }

double ParticleEnsemble::value(double x) const {
  double sum = 0.0;
  for (const auto& p : particles) sum += p.a * relu(p.w * x + p.b);
  return sum / static_cast<double>(particles.size());
}

double ParticleEnsemble::path_norm() const {
  double sum = 0.0;
  for (const auto& p : particles) sum += std::abs(p.a) * (std::abs(p.w) + std::abs(p.b));
  return sum / static_cast<double>(particles.size());
}

BinaryPointSet::BinaryPointSet(std::vector<BinaryPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("dataset must not be empty");
  double total = 0.0;
  bool has_pos = false, has_neg = false;
  for (const auto& pt : points_) {
    if (pt.xi != 1 && pt.xi != -1) throw std::invalid_argument("labels must be +-1");
    if (pt.x == 0.0 || pt.xi != (pt.x > 0.0 ? 1 : -1))
      throw std::invalid_argument("labels must equal sign(x)");
    if (!(pt.weight > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    (pt.xi > 0 ? has_pos : has_neg) = true;
    total += pt.weight;
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("both classes must be non-empty");
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("weights sum to " + std::to_string(total) + ", expected 1");
  for (auto& pt : points_) pt.weight /= total;
}

BinaryPointSet margin_dataset() {
  return BinaryPointSet({{-2.0, -1, 0.25}, {-1.0, -1, 0.25}, {1.0, 1, 0.25}, {2.0, 1, 0.25}});
}

double binary_risk(const ParticleEnsemble& ensemble, const BinaryPointSet& data) {
  double f = 0.0;
  for (const auto& pt : data.points())
    f += pt.weight * exp_tail_loss(pt.xi * ensemble.value(pt.x));
  return f;
}

MarginReport margin_report(const ParticleEnsemble& ensemble, const BinaryPointSet& data) {
  if (ensemble.particles.empty()) throw std::invalid_argument("empty ensemble");
  const double pn = ensemble.path_norm();
  if (!(pn > 0.0)) throw std::invalid_argument("zero path norm");
  const Snapshot snap = normalized_snapshot(ensemble, data);
  return {snap.margin, pn, snap.spread_pos, snap.spread_neg};
}

double f_b_classifier(double b, double x) {
  if (!(b >= 0.0 && b <= 1.0))
    throw std::invalid_argument("f_b is only defined for b in [0,1], got " + std::to_string(b));
  // Division form keeps f_b(+-1) = +-1/2 exact in floating point.
  const double den = 2.0 * (1.0 + b);
  if (x >= b) return (x + b) / den;
  if (x <= -b) return (x - b) / den;
  return 2.0 * x / den;
}

double fit_margin_family_b(const ParticleEnsemble& ensemble) {
  const double pn = ensemble.path_norm();
  if (!(pn > 0.0)) throw std::invalid_argument("zero path norm");
  std::vector<double> xs, hs;
  for (int i = 0; i <= 20; ++i) {
    for (double x0 : {-2.0, 1.0}) {
      const double x = x0 + i / 20.0;
      xs.push_back(x);
      hs.push_back(ensemble.value(x) / pn);
    }
  }
  double best_b = 0.0, best_sse = std::numeric_limits<double>::infinity();
  for (int ib = 0; ib <= 1000; ++ib) {
    const double b = ib / 1000.0;
    double sse = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double d = hs[i] - f_b_classifier(b, xs[i]);
      sse += d * d;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_b = b;
    }
  }
  return best_b;
}

ParticleEnsemble train_mean_field_relu(const BinaryPointSet& data, int m, double T, double dt,
                                       unsigned seed, std::vector<MarginRecord>* trace) {
  if (m < 100) throw std::invalid_argument("mean-field experiment expects m >= 100 particles");
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("T and dt must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParticleEnsemble ens;
  ens.particles.resize(static_cast<size_t>(m));
  for (auto& p : ens.particles) {
    p.a = gauss(rng);
    p.w = gauss(rng);
    p.b = gauss(rng);
    // |a|^2 <= |w|^2 + |b|^2 at initialization, enforced by rescaling a.
    const double cap = std::hypot(p.w, p.b);
    if (std::abs(p.a) > cap) p.a = (p.a < 0.0 ? -cap : cap);
  }

  const auto& pts = data.points();
  const size_t n = pts.size();
  std::vector<double> ga(ens.particles.size()), gw(ens.particles.size()),
      gb(ens.particles.size()), dldh(n);

  double t = 0.0;
  double eta = dt;
  double f = binary_risk(ens, data);
  const long max_steps = 200000;
  for (long it = 0; it < max_steps; ++it) {
    if (t >= T || f <= kRiskFloor) break;

    for (size_t x = 0; x < n; ++x)
      dldh[x] = pts[x].weight * pts[x].xi *
                exp_tail_loss_deriv(pts[x].xi * ens.value(pts[x].x));

    double gmax = 0.0;
    for (size_t i = 0; i < ens.particles.size(); ++i) {
      const Particle& p = ens.particles[i];
      double da = 0.0, dw = 0.0, db = 0.0;
      for (size_t x = 0; x < n; ++x) {
        const double pre = p.w * pts[x].x + p.b;
        da += dldh[x] * relu(pre);
        if (pre > 0.0) {
          dw += dldh[x] * p.a * pts[x].x;
          db += dldh[x] * p.a;
        }
      }
      ga[i] = da;
      gw[i] = dw;
      gb[i] = db;
      gmax = std::max({gmax, std::abs(da), std::abs(dw), std::abs(db)});
    }
    if (gmax == 0.0) break;

    ParticleEnsemble next = ens;
    double fn;
    while (true) {
      for (size_t i = 0; i < ens.particles.size(); ++i) {
        next.particles[i].a = ens.particles[i].a - eta * ga[i];
        next.particles[i].w = ens.particles[i].w - eta * gw[i];
        next.particles[i].b = ens.particles[i].b - eta * gb[i];
      }
      fn = binary_risk(next, data);
      if (std::isfinite(fn) && fn <= f) break;
      eta *= 0.5;
      if (eta < 1e-300)
        throw NumericFailure("mean-field training: persistent divergence, no step accepted");
    }
    ens = std::move(next);
    f = fn;
    t += eta;
    eta = std::min(eta * 1.3, 1e280);

    if (trace) {
      const Snapshot snap = normalized_snapshot(ens, data);
      trace->push_back({t, f, snap.margin, ens.path_norm(), snap.spread_pos, snap.spread_neg});
    }
  }
  return ens;
}

}  // namespace nclab
