#include "nclab/penultimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "nclab/errors.hpp"
#include "nclab/simplex.hpp"

namespace nclab {

namespace {

Mat clip_columns_to_ball(Mat Y, double R) {
  for (Eigen::Index i = 0; i < Y.cols(); ++i) {
    const double n = Y.col(i).norm();
    if (n > R) Y.col(i) *= R / n;
  }
  return Y;
}

double risk_of(const Mat& Y, const Mat& A, const std::vector<double>& w) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < Y.cols(); ++i)
    f += w[static_cast<size_t>(i)] * phi(static_cast<int>(i), A * Y.col(i));
  return f;
}

double max_abs_diff(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

Mat project_spectral(const Mat& A) {
  if (!A.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec s = svd.singularValues().cwiseMin(1.0);
  Mat out = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  if (!out.allFinite()) throw NumericFailure("SVD recomposition produced non-finite entries");
  return out;
}

Vec center_of_mass(const PenultimateState& state) { return state.Y.rowwise().mean(); }

IsometryReport check_isometry(const PenultimateState& state) {
  const Mat gram_y = state.Y.transpose() * state.Y;
  const Mat z = state.A * state.Y;
  const Mat gram_z = z.transpose() * z;

  IsometryReport report;
  report.max_gram_deviation = max_abs_diff(gram_z, gram_y);
  report.center_norm = (state.Y.rowwise().sum()).norm();
  report.max_radius_deviation =
      (gram_y.diagonal().array().sqrt() - state.R).abs().maxCoeff();

  // Orthonormal basis of span{y_i}, then singular values of A on it.
  Eigen::JacobiSVD<Mat> ysvd(state.Y, Eigen::ComputeThinU);
  const double smax = ysvd.singularValues()[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < ysvd.singularValues().size(); ++i)
    if (ysvd.singularValues()[i] > 1e-12 * smax) ++rank;
  const Mat basis = ysvd.matrixU().leftCols(rank);
  Eigen::JacobiSVD<Mat> asvd(state.A * basis);
  report.singular_values = asvd.singularValues();
  return report;
}

PenultimateState optimize_penultimate(const LabeledPointSet& data, int m, double R,
                                      const PenultimateSettings& settings,
                                      std::vector<PenultimateRecord>* trace) {
  const int k = data.k();
  if (k < 2) throw std::invalid_argument("need at least two classes");
  if (m < k - 1) throw std::invalid_argument("feature dimension m must be >= k-1");
  if (!(R > 0.0)) throw std::invalid_argument("radius R must be positive");
  if (static_cast<int>(data.points().size()) != k)
    throw std::invalid_argument("penultimate toy model expects exactly one point per class");
  std::vector<double> w(static_cast<size_t>(k), 0.0);
  for (const auto& pt : data.points()) {
    if (w[static_cast<size_t>(pt.label)] != 0.0)
      throw std::invalid_argument("class " + std::to_string(pt.label) + " has several points");
    w[static_cast<size_t>(pt.label)] = pt.weight;
  }

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Mat Y(m, k);
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    for (Eigen::Index i = 0; i < Y.rows(); ++i) Y(i, j) = gauss(rng);
    Y.col(j) *= (R / 2.0) / Y.col(j).norm();
  }
  Mat G0(k, m);
  for (Eigen::Index i = 0; i < G0.rows(); ++i)
    for (Eigen::Index j = 0; j < G0.cols(); ++j) G0(i, j) = gauss(rng);
  Eigen::JacobiSVD<Mat> svd(G0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Mat A = svd.matrixU() * svd.matrixV().transpose();  // random partial isometry

  // The risk infimum at radius R is attained by the closed-form simplex.
  const SimplexConfig oracle = simplex_l2(k, R);
  double oracle_risk = 0.0;
  for (int i = 0; i < k; ++i)
    oracle_risk += w[static_cast<size_t>(i)] * phi(i, vertex(oracle, i));
  Mat oracle_gram(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      oracle_gram(i, j) = vertex(oracle, i).dot(vertex(oracle, j));

  const double c = 1e-4;
  double eta_y = settings.step_y;
  double eta_a = settings.step_a;
  const double safe_eta_a = 1.0 / (R * R);  // curvature in A scales with ||y||^2
  double f = risk_of(Y, A, w);
  double gap = f - oracle_risk;

  for (long it = 0; it < settings.max_iters; ++it) {
    gap = f - oracle_risk;
    if (trace) {
      const Mat gram_y = Y.transpose() * Y;
      const Mat z = A * Y;
      trace->push_back({it, f, max_abs_diff(gram_y, oracle_gram),
                        max_abs_diff(z.transpose() * z, gram_y)});
    }
    if (gap <= settings.tol) return {Y, A, R};

    // Y step
    Mat GY(m, k);
    for (int i = 0; i < k; ++i)
      GY.col(i) = w[static_cast<size_t>(i)] * (A.transpose() * grad_phi(i, A * Y.col(i)));
    while (true) {
      Mat Yn = clip_columns_to_ball(Y - eta_y * GY, R);
      const double fn = risk_of(Yn, A, w);
      if (eta_y <= 1.0 || fn <= f + c * (GY.cwiseProduct(Yn - Y)).sum()) {
        if (fn <= f) {
          Y = std::move(Yn);
          f = fn;
        } else {
          eta_y *= 0.5;
        }
        break;
      }
      eta_y *= 0.5;
    }
    eta_y = std::min(eta_y * 1.3, 1e8);

    // A step
    Mat GA = Mat::Zero(k, m);
    for (int i = 0; i < k; ++i)
      GA += w[static_cast<size_t>(i)] * grad_phi(i, A * Y.col(i)) * Y.col(i).transpose();
    while (true) {
      Mat An = project_spectral(A - eta_a * GA);
      const double fn = risk_of(Y, An, w);
      if (eta_a <= safe_eta_a || fn <= f + c * (GA.cwiseProduct(An - A)).sum()) {
        if (fn <= f) {
          A = std::move(An);
          f = fn;
        } else {
          eta_a *= 0.5;
        }
        break;
      }
      eta_a *= 0.5;
    }
    eta_a = std::min(eta_a * 1.3, 1e8);
  }
  throw NonConverged("optimize_penultimate: risk gap " + std::to_string(gap) +
                         " above tolerance after " + std::to_string(settings.max_iters) +
                         " iterations (k=" + std::to_string(k) + ", m=" + std::to_string(m) +
                         ")",
                     gap, settings.max_iters);
}

}  // namespace nclab
