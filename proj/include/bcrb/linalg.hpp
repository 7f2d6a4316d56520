#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace bcrb {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Symmetric PSD role: J_P, J_D, J_B and their estimates; V_B in squared
// parameter units.
using InfoMatrix = MatrixX<double>;
using Vector = VectorX<double>;

enum class MatrixNorm { spectral, frobenius };

// Relative asymmetry ||A - A^T||_F / ||A||_F; zero matrix counts as symmetric.
template <class Derived>
double asymmetry(const Eigen::MatrixBase<Derived>& a) {
  const double denom = a.norm();
  if (denom == 0.0) return 0.0;
  return (a - a.transpose()).norm() / denom;
}

template <class Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

namespace detail {

template <class Derived>
VectorX<typename Derived::Scalar> sym_eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(a.derived(),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("symmetric eigendecomposition failed");
  return solver.eigenvalues();
}

}  // namespace detail

// Largest |eigenvalue| of a symmetric matrix.
template <class Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("spectral_norm: matrix not square");
  if (a.rows() == 0) return 0.0;
  if (asymmetry(a) > 1e-9)
    throw std::invalid_argument("spectral_norm: matrix not symmetric");
  const auto evals = detail::sym_eigenvalues(a);
  return evals.cwiseAbs().maxCoeff();
}

template <class Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

template <class Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  return detail::sym_eigenvalues(a).minCoeff();
}

// (1/N) sum_i v_i v_i^T over the columns of vs. Only the lower triangle is
// accumulated and then mirrored, so the result is symmetric bit-for-bit.
template <class Derived>
MatrixX<typename Derived::Scalar> mean_outer(const Eigen::MatrixBase<Derived>& vs) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index d = vs.rows();
  const Eigen::Index n = vs.cols();
  if (n == 0) throw std::invalid_argument("mean_outer: empty sample set");
  MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(d, d);
  acc.template selfadjointView<Eigen::Lower>().rankUpdate(vs.derived(), Scalar(1) / Scalar(n));
  acc.template triangularView<Eigen::StrictlyUpper>() =
      acc.template triangularView<Eigen::StrictlyLower>().transpose();
  return acc;
}

inline InfoMatrix mean_outer(std::span<const Vector> vs) {
  if (vs.empty()) throw std::invalid_argument("mean_outer: empty sample set");
  const Eigen::Index d = vs.front().size();
  InfoMatrix stacked(d, vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (vs[i].size() != d) throw std::invalid_argument("mean_outer: dimension mismatch");
    stacked.col(static_cast<Eigen::Index>(i)) = vs[i];
  }
  return mean_outer(stacked);
}

// Moore-Penrose pseudoinverse of a symmetric matrix via eigendecomposition.
// Eigenvalues with |lambda| <= rtol * max|lambda| are truncated to zero;
// rtol < 0 selects the default D * eps * max|lambda| cutoff.
template <class Derived>
MatrixX<typename Derived::Scalar> sym_pinv(const Eigen::MatrixBase<Derived>& a,
                                           double rtol = -1.0) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw std::invalid_argument("sym_pinv: matrix not square");
  if (asymmetry(a) > 1e-12)
    throw std::invalid_argument("sym_pinv: matrix not symmetric within tolerance");
  const Eigen::Index d = a.rows();
  MatrixX<Scalar> sym = ((a + a.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sym_pinv: eigendecomposition failed");
  const VectorX<Scalar>& evals = solver.eigenvalues();
  const MatrixX<Scalar>& evecs = solver.eigenvectors();
  const double lambda_max = evals.cwiseAbs().maxCoeff();
  const double cutoff =
      (rtol < 0.0 ? static_cast<double>(d) * std::numeric_limits<double>::epsilon()
                  : rtol) *
      lambda_max;
  VectorX<Scalar> inv(d);
  for (Eigen::Index i = 0; i < d; ++i)
    inv[i] = std::abs(evals[i]) <= cutoff ? Scalar(0) : Scalar(1) / evals[i];
  MatrixX<Scalar> p = evecs * inv.asDiagonal() * evecs.transpose();
  MatrixX<Scalar> result = ((p + p.transpose()) / Scalar(2)).eval();
  return result;
}

// ||est - ref|| / ||ref|| in the chosen norm.
template <class DerivedA, class DerivedB>
double rel_error(const Eigen::MatrixBase<DerivedA>& est,
                 const Eigen::MatrixBase<DerivedB>& ref,
                 MatrixNorm norm = MatrixNorm::spectral) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols())
    throw std::invalid_argument("rel_error: dimension mismatch");
  const double denom =
      norm == MatrixNorm::spectral ? spectral_norm(ref) : frobenius_norm(ref);
  if (denom == 0.0) throw std::invalid_argument("rel_error: zero reference");
  const double num = norm == MatrixNorm::spectral ? spectral_norm(est - ref)
                                                  : frobenius_norm(est - ref);
  return num / denom;
}

}  // namespace bcrb
