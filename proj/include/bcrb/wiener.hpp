#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "bcrb/rng.hpp"

namespace bcrb {

// Wiener phase-offset prior: x_1 ~ N(0,1), x_d = x_{d-1} + w_d with
// w_d ~ N(0, tau_w^2) for d = 2..D. Jointly Gaussian with a tridiagonal
// precision matrix.
class WienerPhasePrior {
 public:
  static WienerPhasePrior create(int dim, double tau_w) {
    if (dim < 1) throw std::invalid_argument("wiener: dim must be >= 1");
    if (!(tau_w > 0.0)) throw std::invalid_argument("wiener: tau_w must be positive");
    WienerPhasePrior p;
    p.dim_ = dim;
    p.tau_w_ = tau_w;
    const double q = 1.0 / (tau_w * tau_w);
    p.precision_ = Eigen::MatrixXd::Zero(dim, dim);
    p.precision_(0, 0) = 1.0;
    for (int d = 1; d < dim; ++d) {
      p.precision_(d - 1, d - 1) += q;
      p.precision_(d, d) += q;
      p.precision_(d - 1, d) -= q;
      p.precision_(d, d - 1) -= q;
    }
    // |Sigma| = tau_w^{2(D-1)}: the cumulative-sum map from the D unit/scaled
    // increments has determinant tau_w^{D-1}.
    p.log_det_precision_ = -2.0 * (dim - 1) * std::log(tau_w);
    return p;
  }

  int dim() const { return dim_; }
  double tau_w() const { return tau_w_; }
  const Eigen::MatrixXd& precision() const { return precision_; }

  // Draws by cumulative sums, one column per sample.
  Eigen::MatrixXd sample(long n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("wiener sample: n must be >= 1");
    Eigen::MatrixXd out(dim_, n);
    for (long i = 0; i < n; ++i) {
      double x = rng.normal();
      out(0, i) = x;
      for (int d = 1; d < dim_; ++d) {
        x += tau_w_ * rng.normal();
        out(d, i) = x;
      }
    }
    return out;
  }

  Eigen::VectorXd score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim_) throw std::invalid_argument("wiener score: dimension mismatch");
    return -(precision_ * x);
  }

  double logpdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim_) throw std::invalid_argument("wiener logpdf: dimension mismatch");
    return 0.5 * log_det_precision_ - 0.5 * dim_ * std::log(2.0 * M_PI) -
           0.5 * x.dot(precision_ * x);
  }

 private:
  int dim_ = 0;
  double tau_w_ = 0.0;
  Eigen::MatrixXd precision_;
  double log_det_precision_ = 0.0;
};

}  // namespace bcrb
