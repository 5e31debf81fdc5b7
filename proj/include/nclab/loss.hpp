#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

namespace nclab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One data point: an opaque input id, its class in 0..k-1 and its probability
// weight. The set of points models a discrete data distribution together with
// its label function.
struct LabeledPoint {
  int id;
  int label;
  double weight;
};

// Finite labeled data distribution. Weights must be strictly positive and sum
// to one within 1e-12; they are renormalized exactly on construction since
// config files carry decimal round-off. Classes are 0..k-1; k is inferred as
// max label + 1 when not given. Empty classes are representable here; solvers
// that need non-empty classes reject them at their own boundary.
class LabeledPointSet {
 public:
  explicit LabeledPointSet(std::vector<LabeledPoint> points, int k = -1);

  int k() const { return k_; }
  const std::vector<LabeledPoint>& points() const { return points_; }

  // Total weight per class; entries may be zero.
  std::vector<double> class_mass() const;

 private:
  std::vector<LabeledPoint> points_;
  int k_;
};

// softmax(z)_j = exp(z_j) / sum_l exp(z_l), computed with max subtraction.
// Throws std::invalid_argument on non-finite input.
Vec softmax(const Vec& z);

// Phi_j(z) = log(sum_i exp(z_i)) - z_j, log-sum-exp stabilized.
// Strictly positive for k >= 2.
double phi(int j, const Vec& z);

// grad Phi_j(z) = softmax(z) - e_j. Entries always sum to zero.
Vec grad_phi(int j, const Vec& z);

// Hessian of Phi_j; independent of j:  H_jl = pi_j delta_jl - pi_j pi_l.
// Positive semi-definite with null space exactly span{(1,...,1)}.
Mat hess_phi(const Vec& z);

// Weighted risk sum_x w_x Phi_{label(x)}(outputs[id(x)]).
// Every point must have an output of length k.
double risk(const LabeledPointSet& data, const std::map<int, Vec>& outputs);

}  // namespace nclab
