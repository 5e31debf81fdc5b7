#pragma once

#include <vector>

#include "nclab/loss.hpp"

namespace nclab {

// Feature vectors y_i (columns of Y, one per class) in the Euclidean ball of
// radius R in R^m, together with the linear map A: R^m -> R^k applied on top.
struct PenultimateState {
  Mat Y;     // m x k, column i is y_i
  Mat A;     // k x m, operator norm <= 1
  double R;

  int m() const { return static_cast<int>(Y.rows()); }
  int k() const { return static_cast<int>(Y.cols()); }
};

struct PenultimateSettings {
  long max_iters = 100000;
  double tol = 1e-10;   // risk gap to the oracle configuration at radius R
  double step_y = 1.0;  // initial line-search steps, adapted independently
  double step_a = 1.0;
  unsigned seed = 0;
};

// Per-iteration record for CSV export.
struct PenultimateRecord {
  long iter;
  double risk;
  double gram_deviation;      // max |<y_i,y_j> - <z_i*,z_j*>| vs the oracle Gram
  double isometry_residual;   // max |<Ay_i,Ay_j> - <y_i,y_j>|
};

struct IsometryReport {
  double max_gram_deviation;    // max_{ij} |<Ay_i,Ay_j> - <y_i,y_j>|
  double center_norm;           // ||sum_i y_i||
  double max_radius_deviation;  // max_i | ||y_i|| - R |
  Vec singular_values;          // of A restricted to span{y_1,...,y_k}
};

// Clip all singular values of A at 1. Fixed point iff A is already feasible.
Mat project_spectral(const Mat& A);

// (1/k) sum_i y_i.
Vec center_of_mass(const PenultimateState& state);

// How close A is to an isometric embedding on span{Y}, plus the centering and
// radius diagnostics of the Lemma characterizing minimizers.
IsometryReport check_isometry(const PenultimateState& state);

// Jointly minimize the risk of h = A f over one-point classes by alternating
// projected gradient steps on Y (per-column ball projection) and A (spectral
// clipping), each with its own adapted step size. Y starts as i.i.d. Gaussian
// columns scaled to radius R/2, A as a random partial isometry. Converged when
// risk is within settings.tol of the closed-form optimum at radius R; throws
// NonConverged with the final risk gap otherwise.
PenultimateState optimize_penultimate(const LabeledPointSet& data, int m, double R,
                                      const PenultimateSettings& settings = {},
                                      std::vector<PenultimateRecord>* trace = nullptr);

}  // namespace nclab
