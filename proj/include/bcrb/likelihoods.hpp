#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "bcrb/linalg.hpp"
#include "bcrb/rng.hpp"

namespace bcrb {

// tau from SNR = 10 log10(E||x||^2 / tau^2).
inline double snr_to_tau(double snr_db, double mean_square_norm) {
  if (!(mean_square_norm > 0.0))
    throw std::invalid_argument("snr_to_tau: E||x||^2 must be positive");
  return std::sqrt(mean_square_norm * std::pow(10.0, -snr_db / 10.0));
}

// y = x + z, z ~ N(0, tau^2 I). Score and Fisher information are analytic.
class GaussianDenoisingLikelihood {
 public:
  explicit GaussianDenoisingLikelihood(double tau) : tau_(tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw std::invalid_argument("denoising likelihood: tau must be positive and finite");
  }

  double tau() const { return tau_; }

  Eigen::VectorXd sample_y(const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) const {
    return x + tau_ * rng.normal_vector(x.size());
  }

  // grad_x log p(y|x) = (y - x) / tau^2
  Eigen::VectorXd score_x(const Eigen::Ref<const Eigen::VectorXd>& y,
                          const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (y.size() != x.size())
      throw std::invalid_argument("denoising score: dimension mismatch");
    return (y - x) / (tau_ * tau_);
  }

  // J_F(x) = (1/tau^2) I, independent of x.
  InfoMatrix fisher(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return InfoMatrix::Identity(x.size(), x.size()) / (tau_ * tau_);
  }

  double loglik(const Eigen::Ref<const Eigen::VectorXd>& y,
                const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const double d = static_cast<double>(x.size());
    return -0.5 * (y - x).squaredNorm() / (tau_ * tau_) -
           0.5 * d * std::log(2.0 * M_PI * tau_ * tau_);
  }

 private:
  double tau_;
};

namespace detail {

// log cosh without overflow: |u| + log1p(e^{-2|u|}) - log 2.
inline double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

}  // namespace detail

// BPSK symbols through a phase channel: y_d = a_d e^{j x_d} + z_d with
// Rademacher a_d marginalized out and circular complex noise of total variance
// E|z|^2 = tau_n^2 (each real component N(0, tau_n^2/2)). The marginal
// per-symbol log-likelihood is
//   log p(y|x) = -log(pi tau^2) - (|y|^2 + 1)/tau^2 + log cosh(u),
//   u = 2 Re(y e^{-jx}) / tau^2,
// with first derivative tanh(u) * v, v = 2 Im(y e^{-jx}) / tau^2, and second
// derivative (1 - tanh^2 u) v^2 - u tanh(u). Symbols are conditionally
// independent across d.
class PhaseOffsetLikelihood {
 public:
  PhaseOffsetLikelihood(double tau_n2, int dim) : tau_n2_(tau_n2), dim_(dim) {
    if (!(tau_n2 > 0.0) || !std::isfinite(tau_n2))
      throw std::invalid_argument("phase likelihood: tau_n^2 must be positive and finite");
    if (dim < 1) throw std::invalid_argument("phase likelihood: dim must be >= 1");
  }

  double tau_n2() const { return tau_n2_; }
  int dim() const { return dim_; }

  static double snr_db_to_tau_n2(double snr_db) {
    return std::pow(10.0, -snr_db / 10.0);
  }
  static double tau_n2_to_snr_db(double tau_n2) {
    return 10.0 * std::log10(1.0 / tau_n2);
  }

  Eigen::VectorXcd sample_y(const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) const {
    if (x.size() != dim_) throw std::invalid_argument("phase sample: dimension mismatch");
    const double comp_sd = std::sqrt(tau_n2_ / 2.0);
    Eigen::VectorXcd y(dim_);
    for (int d = 0; d < dim_; ++d) {
      const double a = rng.sign();
      const std::complex<double> z(comp_sd * rng.normal(), comp_sd * rng.normal());
      y[d] = a * std::exp(std::complex<double>(0.0, x[d])) + z;
    }
    return y;
  }

  double loglik_d(std::complex<double> y_d, double x_d) const {
    const double u = rotated_real(y_d, x_d);
    return -std::log(M_PI * tau_n2_) - (std::norm(y_d) + 1.0) / tau_n2_ +
           detail::log_cosh(u);
  }

  double loglik(const Eigen::Ref<const Eigen::VectorXcd>& y,
                const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_dims(y, x);
    double total = 0.0;
    for (int d = 0; d < dim_; ++d) total += loglik_d(y[d], x[d]);
    return total;
  }

  // Stacks d/dx_d log p(y_d | x_d).
  Eigen::VectorXd score_x(const Eigen::Ref<const Eigen::VectorXcd>& y,
                          const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_dims(y, x);
    Eigen::VectorXd s(dim_);
    for (int d = 0; d < dim_; ++d) {
      const std::complex<double> r = rotated(y[d], x[d]);
      const double u = 2.0 * r.real() / tau_n2_;
      const double v = 2.0 * r.imag() / tau_n2_;
      s[d] = std::tanh(u) * v;
    }
    return s;
  }

  double d2_loglik_d(std::complex<double> y_d, double x_d) const {
    const std::complex<double> r = rotated(y_d, x_d);
    const double u = 2.0 * r.real() / tau_n2_;
    const double v = 2.0 * r.imag() / tau_n2_;
    const double t = std::tanh(u);
    return (1.0 - t * t) * v * v - u * t;
  }

 private:
  static std::complex<double> rotated(std::complex<double> y, double x) {
    return y * std::exp(std::complex<double>(0.0, -x));
  }
  double rotated_real(std::complex<double> y, double x) const {
    return 2.0 * rotated(y, x).real() / tau_n2_;
  }
  void check_dims(const Eigen::Ref<const Eigen::VectorXcd>& y,
                  const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (y.size() != dim_ || x.size() != dim_)
      throw std::invalid_argument("phase likelihood: dimension mismatch");
  }

  double tau_n2_;
  int dim_;
};

}  // namespace bcrb
