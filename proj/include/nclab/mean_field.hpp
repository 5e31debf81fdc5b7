#pragma once

#include <vector>

namespace nclab {

// One ReLU unit of a mean-field two-layer network
//   h(x) = (1/m) sum_i a_i relu(w_i x + b_i).
struct Particle {
  double a, w, b;
};

struct ParticleEnsemble {
  std::vector<Particle> particles;

  double value(double x) const;
  // (1/m) sum_i |a_i| (|w_i| + |b_i|), the normalization of the margin.
  double path_norm() const;
};

// Binary classification data on the line; labels are +-1 and must equal
// sign(x). Weights are strictly positive and renormalized to sum one.
struct BinaryPoint {
  double x;
  int xi;
  double weight;
};

class BinaryPointSet {
 public:
  explicit BinaryPointSet(std::vector<BinaryPoint> points);
  const std::vector<BinaryPoint>& points() const { return points_; }

 private:
  std::vector<BinaryPoint> points_;
};

// The four-point dataset {-2,-1,1,2} with equal weights 1/4. Both classes
// contain a point beyond the closest one, so the max-margin set is the whole
// f_b family.
BinaryPointSet margin_dataset();

double relu(double z);

// Binary cross-entropy with the exp tail: l(h, xi) = log(1 + exp(-2 xi h)).
double binary_risk(const ParticleEnsemble& ensemble, const BinaryPointSet& data);

struct MarginReport {
  double normalized_margin;  // min_x xi_x h(x) / path_norm
  double path_norm;
  double spread_positive;    // max - min of h / path_norm over class +1 points
  double spread_negative;    // same over class -1 points
};

// Margin and per-class spread of the path-norm-normalized classifier.
// Invalid for a zero path norm.
MarginReport margin_report(const ParticleEnsemble& ensemble, const BinaryPointSet& data);

// The continuum of maximum margin classifiers on this problem, b in [0, 1]:
//   f_b(x) = (x + b) / (2(1+b))  for x > b,
//            2x / (2(1+b))       for -b < x < b,
//            (x - b) / (2(1+b))  for x < -b.
// All of them attain normalized margin exactly 1/2 on {+-1, +-2}.
double f_b_classifier(double b, double x);

// Least-squares fit of the normalized classifier against the f_b family on a
// fixed grid over [-2,-1] and [1,2]; returns the best b in [0,1]. Which member
// training selects is not predicted, so this is reported, never asserted.
double fit_margin_family_b(const ParticleEnsemble& ensemble);

// One summary row per accepted Euler step.
struct MarginRecord {
  double t;
  double risk;
  double normalized_margin;
  double path_norm;
  double spread_positive;
  double spread_negative;
};

// Particle gradient flow (explicit Euler, mean-field time) on the binary
// cross-entropy risk. The step starts at dt, halves on a risk increase and
// grows again after accepted steps, so late training behaves like normalized
// gradient descent; persistent divergence raises NumericFailure. Initial
// particles are standard Gaussians with a rescaled so |a| <= sqrt(w^2 + b^2).
// Stops at time T, or earlier at the double-precision risk floor where
// further steps carry no information. Requires m >= 100.
ParticleEnsemble train_mean_field_relu(const BinaryPointSet& data, int m, double T,
                                       double dt, unsigned seed,
                                       std::vector<MarginRecord>* trace = nullptr);

}  // namespace nclab
