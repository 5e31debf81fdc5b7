#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nclab/final_layer.hpp"
#include "nclab/loss.hpp"
#include "nclab/mean_field.hpp"
#include "nclab/metrics.hpp"
#include "nclab/penultimate.hpp"
#include "nclab/simplex.hpp"
#include "nclab/three_neuron.hpp"

namespace py = pybind11;
using namespace nclab;

namespace {

LabeledPointSet one_point_classes(int k) {
  std::vector<LabeledPoint> pts;
  for (int i = 0; i < k; ++i) pts.push_back({i, i, 1.0 / k});
  return LabeledPointSet(pts, k);
}

ParticleEnsemble ensemble_from(const std::vector<double>& a, const std::vector<double>& w,
                               const std::vector<double>& b) {
  if (a.size() != w.size() || a.size() != b.size())
    throw std::invalid_argument("a, w, b must have equal length");
  ParticleEnsemble ens;
  for (size_t i = 0; i < a.size(); ++i) ens.particles.push_back({a[i], w[i], b[i]});
  return ens;
}

py::dict margin_dict(const MarginReport& r) {
  py::dict d;
  d["normalized_margin"] = r.normalized_margin;
  d["path_norm"] = r.path_norm;
  d["spread_positive"] = r.spread_positive;
  d["spread_negative"] = r.spread_negative;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "softmax classifier collapse geometry: closed forms, solvers, counterexamples";

  // core loss
  m.def("softmax", &softmax, py::arg("z"));
  m.def("phi", &phi, py::arg("j"), py::arg("z"));
  m.def("grad_phi", &grad_phi, py::arg("j"), py::arg("z"));
  m.def("hess_phi", &hess_phi, py::arg("z"));

  // simplex oracle
  py::class_<SimplexConfig>(m, "SimplexConfig")
      .def_readonly("k", &SimplexConfig::k)
      .def_readonly("R", &SimplexConfig::R)
      .def_readonly("p", &SimplexConfig::p)
      .def_readonly("alpha", &SimplexConfig::alpha)
      .def_readonly("beta", &SimplexConfig::beta)
      .def("__repr__", [](const SimplexConfig& c) {
        return "SimplexConfig(k=" + std::to_string(c.k) + ", R=" + std::to_string(c.R) +
               ", p=" + std::to_string(c.p) + ", alpha=" + std::to_string(c.alpha) +
               ", beta=" + std::to_string(c.beta) + ")";
      });
  m.def("simplex_l2", &simplex_l2, py::arg("k"), py::arg("R"));
  m.def("simplex_lp", &simplex_lp, py::arg("k"), py::arg("R"), py::arg("p"));
  m.def("vertex", &vertex, py::arg("config"), py::arg("i"));
  m.def("pairwise_distance_sq", &pairwise_distance_sq, py::arg("config"));

  // final-layer solver
  m.def("project_ones_complement", &project_ones_complement, py::arg("z"));
  m.def("project_lp_ball", &project_lp_ball, py::arg("z"), py::arg("R"), py::arg("p"));
  m.def(
      "minimize_phi_on_ball",
      [](int k, int j, double R, double p, double tol, long max_iters) {
        SolverSettings s;
        s.radius = R;
        s.p = p;
        s.tol = tol;
        s.max_iters = max_iters;
        return minimize_phi_on_ball(k, j, s);
      },
      py::arg("k"), py::arg("j"), py::arg("R") = 1.0, py::arg("p") = 2.0,
      py::arg("tol") = 1e-8, py::arg("max_iters") = 100000);

  // penultimate layer
  m.def("project_spectral", &project_spectral, py::arg("A"));
  m.def(
      "optimize_penultimate",
      [](int k, int m_dim, double R, double tol, long max_iters, unsigned seed) {
        PenultimateSettings s;
        s.tol = tol;
        s.max_iters = max_iters;
        s.seed = seed;
        const PenultimateState state = optimize_penultimate(one_point_classes(k), m_dim, R, s);
        const IsometryReport iso = check_isometry(state);
        py::dict d;
        d["Y"] = state.Y;
        d["A"] = state.A;
        d["center_norm"] = iso.center_norm;
        d["max_gram_deviation"] = iso.max_gram_deviation;
        d["max_radius_deviation"] = iso.max_radius_deviation;
        d["singular_values"] = iso.singular_values;
        return d;
      },
      py::arg("k"), py::arg("m"), py::arg("R") = 1.0, py::arg("tol") = 1e-10,
      py::arg("max_iters") = 100000, py::arg("seed") = 0);

  // three-neuron gradient flow
  m.def(
      "integrate_three_neuron",
      [](std::array<double, 3> a0, std::array<double, 3> weights, double T, double dt) {
        const auto traj = integrate_three_neuron(
            make_three_neuron_state(a0[0], a0[1], a0[2], weights[0], weights[1], weights[2]), T,
            dt);
        const auto gaps = class_gap(traj);
        Mat out(traj.size(), 5);
        for (size_t i = 0; i < traj.size(); ++i) {
          out(i, 0) = traj[i].t;
          out(i, 1) = traj[i].a1;
          out(i, 2) = traj[i].a2;
          out(i, 3) = traj[i].a3;
          out(i, 4) = gaps[i];
        }
        return out;
      },
      py::arg("a0"), py::arg("weights"), py::arg("T") = 1e6, py::arg("dt") = 1e-2,
      "columns: t, a1, a2, a3, gap");

  // mean-field margin experiment
  m.def("f_b_classifier", &f_b_classifier, py::arg("b"), py::arg("x"));
  m.def(
      "margin_report",
      [](const std::vector<double>& a, const std::vector<double>& w,
         const std::vector<double>& b) {
        return margin_dict(margin_report(ensemble_from(a, w, b), margin_dataset()));
      },
      py::arg("a"), py::arg("w"), py::arg("b"),
      "margin of (a, w, b) particles on the {-2,-1,1,2} dataset");
  m.def(
      "train_mean_field_relu",
      [](int m_particles, double dt, unsigned seed) {
        const auto ens = train_mean_field_relu(margin_dataset(), m_particles, 1e300, dt, seed);
        py::dict d = margin_dict(margin_report(ens, margin_dataset()));
        d["risk"] = binary_risk(ens, margin_dataset());
        d["fitted_b"] = fit_margin_family_b(ens);
        return d;
      },
      py::arg("m") = 500, py::arg("dt") = 0.05, py::arg("seed") = 0);

  // collapse metrics
  m.def(
      "collapse_report",
      [](const std::vector<Vec>& features, const std::vector<int>& labels,
         std::optional<Mat> A) {
        const CollapseReport r = collapse_report(features, labels, A);
        py::dict d;
        d["within_class_variance"] = r.within_class_variance;
        d["equinorm_deviation"] = r.equinorm_deviation;
        d["equiangular_deviation"] = r.equiangular_deviation;
        if (r.self_duality_deviation) d["self_duality_deviation"] = *r.self_duality_deviation;
        d["center"] = r.center;
        return d;
      },
      py::arg("features"), py::arg("labels"), py::arg("A") = std::nullopt);
}
