#pragma once

#include <optional>
#include <vector>

#include "nclab/loss.hpp"

namespace nclab {

// Snapshot geometry of classifier features: the four collapse observations.
// Classes enter with equal weight regardless of their data mass, and points
// enter their class mean unweighted, so the report depends only on geometry.
struct CollapseReport {
  // Max over classes of the mean squared deviation from the class mean.
  double within_class_variance;
  // Coefficient of variation (std/mean) of ||ybar_i - M|| over classes.
  double equinorm_deviation;
  // max_{i != j} | cos angle(ybar_i - M, ybar_j - M) + 1/(k-1) |.
  double equiangular_deviation;
  // max_i 1 - |cos angle(row_i(A), ybar_i - M)|; absent when A not supplied.
  std::optional<double> self_duality_deviation;
  // Center of mass of the class means, uniform over classes.
  Vec center;
};

// features[n] with labels[n] in 0..k-1 (k = max label + 1, every class
// non-empty, k >= 2). A, when given, must have k rows and feature-dimension
// columns. All deviations are zero for an exact centered simplex with dual A.
CollapseReport collapse_report(const std::vector<Vec>& features,
                               const std::vector<int>& labels,
                               const std::optional<Mat>& A = std::nullopt);

}  // namespace nclab
