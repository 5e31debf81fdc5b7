#include "nclab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nclab {

CollapseReport collapse_report(const std::vector<Vec>& features, const std::vector<int>& labels,
                               const std::optional<Mat>& A) {
  if (features.empty() || features.size() != labels.size())
    throw std::invalid_argument("features and labels must be non-empty and aligned");
  const Eigen::Index dim = features.front().size();
  int k = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) throw std::invalid_argument("inconsistent feature dimension");
    if (labels[i] < 0) throw std::invalid_argument("negative class label");
    k = std::max(k, labels[i] + 1);
  }
  if (k < 2) throw std::invalid_argument("need at least two classes");

  std::vector<Vec> mean(static_cast<size_t>(k), Vec::Zero(dim));
  std::vector<long> count(static_cast<size_t>(k), 0);
  for (size_t i = 0; i < features.size(); ++i) {
    mean[static_cast<size_t>(labels[i])] += features[i];
    ++count[static_cast<size_t>(labels[i])];
  }
  for (int c = 0; c < k; ++c) {
    if (count[static_cast<size_t>(c)] == 0)
      throw std::invalid_argument("class " + std::to_string(c) + " is empty");
    mean[static_cast<size_t>(c)] /= static_cast<double>(count[static_cast<size_t>(c)]);
  }

  // Worst class: mean squared deviation of the points from their class mean.
  std::vector<double> msd(static_cast<size_t>(k), 0.0);
  for (size_t i = 0; i < features.size(); ++i) {
    const auto c = static_cast<size_t>(labels[i]);
    msd[c] += (features[i] - mean[c]).squaredNorm() / static_cast<double>(count[c]);
  }
  const double variance = *std::max_element(msd.begin(), msd.end());

  // Classes enter the global center with equal weight.
  Vec center = Vec::Zero(dim);
  for (int c = 0; c < k; ++c) center += mean[static_cast<size_t>(c)];
  center /= static_cast<double>(k);

  std::vector<Vec> centered(static_cast<size_t>(k));
  Vec norms(k);
  for (int c = 0; c < k; ++c) {
    centered[static_cast<size_t>(c)] = mean[static_cast<size_t>(c)] - center;
    norms[c] = centered[static_cast<size_t>(c)].norm();
  }
  const double norm_mean = norms.mean();
  const double norm_var = (norms.array() - norm_mean).square().mean();
  const double equinorm = norm_mean > 0.0 ? std::sqrt(norm_var) / norm_mean : 0.0;

  const double target_cos = -1.0 / (k - 1.0);
  double equiangular = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double denom = norms[i] * norms[j];
      const double cos_ij =
          denom > 0.0 ? centered[static_cast<size_t>(i)].dot(centered[static_cast<size_t>(j)]) /
                            denom
                      : 0.0;
      equiangular = std::max(equiangular, std::abs(cos_ij - target_cos));
    }

  std::optional<double> duality;
  if (A.has_value()) {
    if (A->rows() != k || A->cols() != dim)
      throw std::invalid_argument("A must be k x feature-dimension");
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      const Vec row = A->row(i).transpose();
      const double denom = row.norm() * norms[i];
      // Orientation of the rows is not part of the claim, only parallelism.
      const double cos_i =
          denom > 0.0 ? std::abs(row.dot(centered[static_cast<size_t>(i)])) / denom : 0.0;
      worst = std::max(worst, 1.0 - cos_i);
    }
    duality = worst;
  }

  return {variance, equinorm, equiangular, duality, center};
}

}  // namespace nclab
