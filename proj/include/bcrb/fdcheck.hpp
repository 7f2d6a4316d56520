#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "bcrb/score_net.hpp"

namespace bcrb {

// Central finite differences against the exact evaluations. These routines
// differentiate the forward/loss paths only, independent of the analytic
// Jacobian/gradient code they are used to check.

template <class F>
double central_diff(F&& f, double x0, double h) {
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

inline Eigen::MatrixXd fd_input_jacobian(const MlpScoreNetd& net,
                                         const Eigen::Ref<const Eigen::VectorXd>& x,
                                         double h = 1e-5) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd j(net.output_dim(), d);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index k = 0; k < d; ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    j.col(k) = (forward<double>(net, xp) - forward<double>(net, xm)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return j;
}

inline double fd_jacobian_trace(const MlpScoreNetd& net,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                double h = 1e-5) {
  double tr = 0.0;
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    tr += (forward<double>(net, xp)[k] - forward<double>(net, xm)[k]) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return tr;
}

// Loss gradient by nudging every weight entry through empirical_sm_loss.
inline ParamGrad<double> fd_sm_loss_grad(const MlpScoreNetd& net,
                                         const Eigen::Ref<const Eigen::MatrixXd>& batch,
                                         double h = 1e-5) {
  MlpScoreNetd work = net;
  ParamGrad<double> grad;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Eigen::MatrixXd g(net.weights[l].rows(), net.weights[l].cols());
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        const double w0 = net.weights[l](r, c);
        work.weights[l](r, c) = w0 + h;
        const double fp = empirical_sm_loss<double>(work, batch);
        work.weights[l](r, c) = w0 - h;
        const double fm = empirical_sm_loss<double>(work, batch);
        work.weights[l](r, c) = w0;
        g(r, c) = (fp - fm) / (2.0 * h);
      }
    }
    grad.push_back(std::move(g));
  }
  return grad;
}

// max_ij |a_ij - b_ij| / max(floor, |b_ij|) across all layers.
inline double max_rel_err(const ParamGrad<double>& a, const ParamGrad<double>& b,
                          double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const Eigen::ArrayXXd denom = b[l].array().abs().max(floor);
    worst = std::max(worst, ((a[l] - b[l]).array().abs() / denom).maxCoeff());
  }
  return worst;
}

template <class DerivedA, class DerivedB>
double max_rel_err_matrix(const Eigen::MatrixBase<DerivedA>& a,
                          const Eigen::MatrixBase<DerivedB>& b, double floor = 1e-6) {
  const Eigen::ArrayXXd denom = b.derived().array().abs().max(floor);
  return ((a.derived() - b.derived()).array().abs() / denom).maxCoeff();
}

// Power iteration for |lambda|_max of a symmetric matrix; the independent
// route used to cross-check the eigensolver-based spectral norm.
inline double power_iteration_norm(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                   int iters = 2000, std::uint64_t seed = 12345) {
  Rng rng(seed);
  Eigen::VectorXd v = rng.normal_vector(a.rows());
  v.normalize();
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    lambda = norm;
  }
  return lambda;
}

// Max relative residual of the four Penrose conditions for (a, pinv_a).
inline double penrose_residual(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               const Eigen::Ref<const Eigen::MatrixXd>& p) {
  const double scale_a = std::max(a.norm(), 1e-300);
  const double scale_p = std::max(p.norm(), 1e-300);
  const double r1 = (a * p * a - a).norm() / scale_a;
  const double r2 = (p * a * p - p).norm() / scale_p;
  const Eigen::MatrixXd ap = a * p;
  const Eigen::MatrixXd pa = p * a;
  const double r3 = (ap - ap.transpose()).norm() / std::max(ap.norm(), 1e-300);
  const double r4 = (pa - pa.transpose()).norm() / std::max(pa.norm(), 1e-300);
  return std::max(std::max(r1, r2), std::max(r3, r4));
}

}  // namespace bcrb
