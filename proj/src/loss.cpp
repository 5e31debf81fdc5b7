#include "nclab/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nclab {

namespace {

void require_finite(const Vec& z) {
  if (!z.allFinite()) throw std::invalid_argument("logit vector has non-finite entries");
}

void require_class(int j, const Vec& z) {
  if (j < 0 || j >= z.size())
    throw std::invalid_argument("class index " + std::to_string(j) + " out of range for k=" +
                                std::to_string(z.size()));
}

}  // namespace

LabeledPointSet::LabeledPointSet(std::vector<LabeledPoint> points, int k)
    : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("point set must not be empty");
  int max_label = 0;
  double total = 0.0;
  for (const auto& pt : points_) {
    if (pt.label < 0) throw std::invalid_argument("negative class index");
    if (!(pt.weight > 0.0)) throw std::invalid_argument("weights must be strictly positive");
    max_label = std::max(max_label, pt.label);
    total += pt.weight;
  }
  k_ = (k < 0) ? max_label + 1 : k;
  if (max_label >= k_)
    throw std::invalid_argument("class index " + std::to_string(max_label) +
                                " exceeds class count k=" + std::to_string(k_));
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("weights sum to " + std::to_string(total) + ", expected 1");
  for (auto& pt : points_) pt.weight /= total;
}

std::vector<double> LabeledPointSet::class_mass() const {
  std::vector<double> mass(static_cast<size_t>(k_), 0.0);
  for (const auto& pt : points_) mass[static_cast<size_t>(pt.label)] += pt.weight;
  return mass;
}

Vec softmax(const Vec& z) {
  require_finite(z);
  const double zmax = z.maxCoeff();
  Vec e = (z.array() - zmax).exp();
  return e / e.sum();
}

double phi(int j, const Vec& z) {
  require_finite(z);
  require_class(j, z);
  const double zmax = z.maxCoeff();
  return zmax + std::log((z.array() - zmax).exp().sum()) - z[j];
}

Vec grad_phi(int j, const Vec& z) {
  require_class(j, z);
  Vec g = softmax(z);
  g[j] -= 1.0;
  return g;
}

Mat hess_phi(const Vec& z) {
  const Vec pi = softmax(z);
  Mat h = -pi * pi.transpose();
  h.diagonal() += pi;
  return h;
}

double risk(const LabeledPointSet& data, const std::map<int, Vec>& outputs) {
  double total = 0.0;
  for (const auto& pt : data.points()) {
    auto it = outputs.find(pt.id);
    if (it == outputs.end())
      throw std::invalid_argument("missing output for input id " + std::to_string(pt.id));
    if (it->second.size() != data.k())
      throw std::invalid_argument("output for input id " + std::to_string(pt.id) +
                                  " has wrong length");
    total += pt.weight * phi(pt.label, it->second);
  }
  return total;
}

}  // namespace nclab
