#pragma once

#include "nclab/loss.hpp"

namespace nclab {

// Closed-form description of the optimal class outputs on the lp ball of
// radius R: vertex i is alpha*e_i + beta*sum_{j!=i} e_j with alpha > 0 > beta,
//   |alpha|^p + (k-1)|beta|^p = R^p                          (boundary)
//   |alpha|^{p-2} alpha + (k-1)|beta|^{p-2} beta = 0         (stationarity)
// For p = 2 the stationarity reduces to alpha + (k-1) beta = 0.
struct SimplexConfig {
  int k;
  double R;
  double p;
  double alpha;
  double beta;
};

// Euclidean case: alpha = sqrt((k-1)/k) R, beta = -R / sqrt(k(k-1)).
SimplexConfig simplex_l2(int k, double R);

// General lp case, 1 < p < inf:
//   alpha = ( (k-1)^{1/(p-1)} / (1 + (k-1)^{1/(p-1)}) )^{1/p} R.
// p <= 1 or p = inf is rejected (UnsupportedNorm): those spheres have straight
// segments and corners and the Lagrange characterization does not apply.
SimplexConfig simplex_lp(int k, double R, double p);

// Vertex i as a logit vector: alpha at position i, beta elsewhere.
Vec vertex(const SimplexConfig& config, int i);

// Squared distance between any two distinct vertices, p = 2 only:
// 2 (alpha - beta)^2, which equals 2 k R^2 / (k-1). Both routes are computed
// and cross-checked to 1e-10 before returning.
double pairwise_distance_sq(const SimplexConfig& config);

}  // namespace nclab
