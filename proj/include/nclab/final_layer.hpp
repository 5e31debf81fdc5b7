#pragma once

#include <map>
#include <vector>

#include "nclab/loss.hpp"

namespace nclab {

// Settings for the constrained final-layer solve.
struct SolverSettings {
  double step = 1.0;        // initial line-search step
  long max_iters = 100000;
  double tol = 1e-8;        // projected-gradient norm for convergence
  double radius = 1.0;      // lp ball radius R
  double p = 2.0;           // norm exponent, in (1, inf)
  unsigned seed = 0;
};

// One solver iterate for CSV export.
struct IterationRecord {
  long iter;
  double value;     // Phi_j at the iterate
  double residual;  // unit-step projected-gradient norm
  double step;      // accepted line-search step
};

// Per-point logit vectors over a labeled point set. Complete by construction:
// every point id must have an output of length data.k().
class ClassifierOutputs {
 public:
  ClassifierOutputs(LabeledPointSet data, std::map<int, Vec> outputs);

  const LabeledPointSet& data() const { return data_; }
  const std::map<int, Vec>& outputs() const { return outputs_; }
  const Vec& at(int id) const { return outputs_.at(id); }

 private:
  LabeledPointSet data_;
  std::map<int, Vec> outputs_;
};

double risk(const ClassifierOutputs& outputs);

// z - mean(z) * (1,...,1): orthogonal projection onto the complement of the
// span of (1,...,1). Idempotent; Phi_j is invariant under it.
Vec project_ones_complement(const Vec& z);

// Euclidean projection onto the lp ball of radius R. Inputs inside the ball
// are returned unchanged. For p = 2 this is radial rescaling; otherwise the
// dual scalar equation is solved by a bracketed Newton iteration
// (NumericFailure after 100 iterations).
Vec project_lp_ball(const Vec& z, double R, double p);

// Replace every output in class i by the weighted class mean of the original
// outputs. Never increases risk; equality holds exactly when all within-class
// deviations are multiples of (1,...,1).
ClassifierOutputs collapse_to_means(const ClassifierOutputs& outputs);

// Minimize Phi_j over the lp ball of radius settings.radius by projected
// gradient descent with Armijo backtracking. The (1,...,1) component of the
// gradient is quotiented out each step (Phi is flat along it); the iterate is
// then projected onto the ball. Note the minimizer itself has zero coordinate
// sum only for p = 2; for p != 2 the stationarity condition is
// sum_j |z_j|^{p-2} z_j = 0 and the ball projection is what pins the iterate.
// Returns once the unit-step projected-gradient norm is <= settings.tol;
// throws NonConverged (with last iterate and residual) when the iteration
// budget runs out.
Vec minimize_phi_on_ball(int k, int j, const SolverSettings& settings,
                         std::vector<IterationRecord>* trace = nullptr);

}  // namespace nclab
