#include "nclab/three_neuron.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nclab/errors.hpp"

namespace nclab {

ThreeNeuronState make_three_neuron_state(double a1, double a2, double a3, double p1,
                                         double p2, double p3) {
  const double total = p1 + p2 + p3;
  if (p1 < 0.0 || p2 < 0.0 || p3 < 0.0)
    throw std::invalid_argument("class weights must be nonnegative");
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("class weights sum to " + std::to_string(total) +
                                ", expected 1");
  if (!(p1 > 0.0) || !(p3 > 0.0))
    throw std::invalid_argument("p1 and p3 must be strictly positive");
  return {a1, a2, a3, p1 / total, p2 / total, p3 / total, 0.0};
}

double ramp_sigmoid(double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return z;
}

double ramp_sigmoid_deriv(double z) { return (z > 0.0 && z < 1.0) ? 1.0 : 0.0; }

double three_neuron_value(const ThreeNeuronState& s, double x) {
  return s.a1 * ramp_sigmoid(-x) - s.a2 * ramp_sigmoid(x + 1.0) + s.a3 * ramp_sigmoid(x);
}

std::array<double, 3> three_neuron_rhs(const ThreeNeuronState& s) {
  const double e1 = std::exp(-s.a1);
  const double e2 = std::exp(-s.a2);
  const double e23 = std::exp(s.a2 - s.a3);
  const std::array<double, 3> v{s.p1 * e1, s.p2 * e2 - s.p3 * e23, s.p3 * e23};
  if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
    throw NumericFailure("three-neuron flow velocity overflowed");
  return v;
}

std::vector<ThreeNeuronState> integrate_three_neuron(const ThreeNeuronState& s0, double T,
                                                     double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("T and dt must be positive");

  const auto step = [](ThreeNeuronState s, double h) {
    const auto at = [&s](const std::array<double, 3>& d, double scale) {
      ThreeNeuronState n = s;
      n.a1 += scale * d[0];
      n.a2 += scale * d[1];
      n.a3 += scale * d[2];
      return n;
    };
    const auto k1 = three_neuron_rhs(s);
    const auto k2 = three_neuron_rhs(at(k1, 0.5 * h));
    const auto k3 = three_neuron_rhs(at(k2, 0.5 * h));
    const auto k4 = three_neuron_rhs(at(k3, h));
    s.a1 += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    s.a2 += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    s.a3 += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
    s.t += h;
    return s;
  };

  std::vector<ThreeNeuronState> samples;
  samples.push_back(s0);
  const double t_end = s0.t + T;
  ThreeNeuronState s = s0;
  while (s.t < t_end) {
    // The flow decelerates like 1/t, so the step may grow proportionally with
    // t without losing accuracy; late samples come out log-spaced.
    const double h = std::min(std::max(dt, dt * s.t / 10.0), t_end - s.t);
    s = step(s, h);
    samples.push_back(s);
  }
  return samples;
}

std::vector<double> class_gap(const std::vector<ThreeNeuronState>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  std::vector<double> gaps;
  gaps.reserve(trajectory.size());
  for (const auto& s : trajectory) gaps.push_back((s.a3 - s.a2) - s.a1);
  return gaps;
}

}  // namespace nclab
