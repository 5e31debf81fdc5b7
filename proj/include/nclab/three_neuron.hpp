#pragma once

#include <array>
#include <vector>

namespace nclab {

// State of the three-neuron exponential-loss gradient flow
//   F(a) = p1 e^{-a1} + p2 e^{-a2} + p3 e^{a2-a3},
// the risk of h(x) = a1 s(-x) - a2 s(x+1) + a3 s(x) on the points
// {-1, 0, 1} with labels (+1, -1, +1), where s is the clamp ramp.
// Class weights must sum to one within 1e-12 (renormalized exactly) and
// p1, p3 must be strictly positive for the limit formula to make sense.
struct ThreeNeuronState {
  double a1, a2, a3;
  double p1, p2, p3;
  double t = 0.0;
};

ThreeNeuronState make_three_neuron_state(double a1, double a2, double a3,
                                         double p1, double p2, double p3);

// Clamp ramp activation: 0 for z <= 0, z on (0,1), 1 for z >= 1. Its
// derivative vanishes at every data argument of the three-neuron network,
// which is what freezes the inner weights along the flow.
double ramp_sigmoid(double z);
double ramp_sigmoid_deriv(double z);

// Network value h(x) for the frozen inner weights: neurons (w,b) =
// (-1,0), (1,1), (1,0) with signs (+, -, +).
double three_neuron_value(const ThreeNeuronState& s, double x);

// Gradient-flow velocity (da1, da2, da3) =
//   (p1 e^{-a1},  p2 e^{-a2} - p3 e^{a2-a3},  p3 e^{a2-a3}).
std::array<double, 3> three_neuron_rhs(const ThreeNeuronState& s);

// Classic RK4 from s0.t to s0.t + T. The base step is dt; because the
// dynamics slow down like 1/t the step grows as dt * max(1, t/10), which
// makes the late-time samples log-spaced and T = 1e6 cheap. Returns the
// sampled states including the initial one; the last sample lands exactly
// on the final time.
std::vector<ThreeNeuronState> integrate_three_neuron(const ThreeNeuronState& s0,
                                                     double T, double dt);

// h(t,1) - h(t,-1) = (a3 - a2) - a1 per sample. Converges to
// log(p3 / (2 p1)); zero exactly in the limit iff p3 = 2 p1.
std::vector<double> class_gap(const std::vector<ThreeNeuronState>& trajectory);

}  // namespace nclab
