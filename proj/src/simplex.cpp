#include "nclab/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

namespace {

void require_kr(int k, double R) {
  if (k < 2) throw std::invalid_argument("class count k must be >= 2");
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("radius R must be positive");
}

}  // namespace

SimplexConfig simplex_l2(int k, double R) {
  require_kr(k, R);
  const double kd = k;
  const double alpha = std::sqrt((kd - 1.0) / kd) * R;
  return {k, R, 2.0, alpha, -alpha / (kd - 1.0)};
}

SimplexConfig simplex_lp(int k, double R, double p) {
  require_kr(k, R);
  if (!std::isfinite(p) || p <= 1.0)
    throw UnsupportedNorm("norm exponent p must lie in (1, inf), got " + std::to_string(p));
  const double km1 = k - 1.0;
  const double s = std::pow(km1, 1.0 / (p - 1.0));
  const double frac = s / (1.0 + s);
  const double alpha = std::pow(frac, 1.0 / p) * R;
  const double beta = -std::pow((1.0 - frac) / km1, 1.0 / p) * R;
  return {k, R, p, alpha, beta};
}

Vec vertex(const SimplexConfig& config, int i) {
  if (i < 0 || i >= config.k)
    throw std::invalid_argument("vertex index " + std::to_string(i) + " out of range");
  Vec z = Vec::Constant(config.k, config.beta);
  z[i] = config.alpha;
  return z;
}

double pairwise_distance_sq(const SimplexConfig& config) {
  if (config.p != 2.0)
    throw UnsupportedNorm("pairwise distances are only derived for p = 2");
  const double direct = 2.0 * (config.alpha - config.beta) * (config.alpha - config.beta);
  const double closed = 2.0 * config.k * config.R * config.R / (config.k - 1.0);
  if (std::abs(direct - closed) > 1e-10 * closed)
    throw NumericFailure("pairwise distance routes disagree: " + std::to_string(direct) +
                         " vs " + std::to_string(closed));
  return direct;
}

}  // namespace nclab
