#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "bcrb/linalg.hpp"
#include "bcrb/rng.hpp"

namespace bcrb {

// Finite Gaussian mixture with sampling, log density, and analytic score.
// Cholesky factors and log-normalizers are cached at construction.
class GaussianMixturePrior {
 public:
  static GaussianMixturePrior create(Eigen::VectorXd weights,
                                     std::vector<Eigen::VectorXd> means,
                                     std::vector<Eigen::MatrixXd> covariances) {
    GaussianMixturePrior p;
    const auto k = static_cast<std::size_t>(weights.size());
    if (k == 0 || means.size() != k || covariances.size() != k)
      throw std::invalid_argument("mixture: component count mismatch");
    if ((weights.array() <= 0.0).any())
      throw std::invalid_argument("mixture: weights must be positive");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("mixture: weights must sum to 1");
    p.weights_ = std::move(weights);
    p.means_ = std::move(means);
    p.covs_ = std::move(covariances);
    const Eigen::Index d = p.means_.front().size();
    p.log_weights_.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      if (p.means_[i].size() != d || p.covs_[i].rows() != d || p.covs_[i].cols() != d)
        throw std::invalid_argument("mixture: dimension mismatch");
      Eigen::LLT<Eigen::MatrixXd> llt(p.covs_[i]);
      if (llt.info() != Eigen::Success)
        throw std::invalid_argument("mixture: covariance not SPD");
      p.llts_.push_back(llt);
      double logdet = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        logdet += 2.0 * std::log(llt.matrixL()(j, j));
      p.log_norm_.push_back(-0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + logdet));
      p.log_weights_[static_cast<Eigen::Index>(i)] = std::log(p.weights_[static_cast<Eigen::Index>(i)]);
    }
    return p;
  }

  static GaussianMixturePrior standard_normal(int dim) {
    return create(Eigen::VectorXd::Ones(1), {Eigen::VectorXd::Zero(dim)},
                  {Eigen::MatrixXd::Identity(dim, dim)});
  }

  Eigen::Index dim() const { return means_.front().size(); }
  int components() const { return static_cast<int>(means_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& mean(int k) const { return means_[static_cast<std::size_t>(k)]; }
  const Eigen::MatrixXd& covariance(int k) const { return covs_[static_cast<std::size_t>(k)]; }

  // i.i.d. draws as columns: component by categorical(pi), then
  // mu_k + chol(Sigma_k) * standard normal.
  Eigen::MatrixXd sample(long n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("mixture sample: n must be >= 1");
    const Eigen::Index d = dim();
    Eigen::MatrixXd out(d, n);
    for (long i = 0; i < n; ++i) {
      const int k = rng.categorical(weights_);
      out.col(i) = means_[static_cast<std::size_t>(k)] +
                   llts_[static_cast<std::size_t>(k)].matrixL() * rng.normal_vector(d);
    }
    return out;
  }

  double logpdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return log_sum_exp(component_logs(x));
  }

  // score(x) = sum_k r_k(x) * (-Sigma_k^{-1} (x - mu_k)), responsibilities via
  // log-sum-exp.
  Eigen::VectorXd score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd logs = component_logs(x);
    const double lse = log_sum_exp(logs);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dim());
    for (int k = 0; k < components(); ++k) {
      const double r = std::exp(logs[k] - lse);
      if (r == 0.0) continue;
      s.noalias() -=
          r * llts_[static_cast<std::size_t>(k)].solve(x - means_[static_cast<std::size_t>(k)]);
    }
    return s;
  }

  // E||x||^2 = sum_k pi_k (||mu_k||^2 + tr Sigma_k).
  double second_moment() const {
    double total = 0.0;
    for (int k = 0; k < components(); ++k)
      total += weights_[k] * (means_[static_cast<std::size_t>(k)].squaredNorm() +
                              covs_[static_cast<std::size_t>(k)].trace());
    return total;
  }

  double component_log_weight(int k) const { return log_weights_[k]; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky(int k) const {
    return llts_[static_cast<std::size_t>(k)];
  }

 private:
  Eigen::VectorXd component_logs(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("mixture: dimension mismatch");
    Eigen::VectorXd logs(components());
    for (int k = 0; k < components(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Eigen::VectorXd centered = x - means_[ks];
      const Eigen::VectorXd half = llts_[ks].matrixL().solve(centered);
      logs[k] = log_weights_[k] + log_norm_[ks] - 0.5 * half.squaredNorm();
    }
    return logs;
  }

  static double log_sum_exp(const Eigen::VectorXd& logs) {
    const double m = logs.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((logs.array() - m).exp().sum());
  }

  Eigen::VectorXd weights_;
  Eigen::VectorXd log_weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covs_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_;
  std::vector<double> log_norm_;
};

// Seeded random orthogonal matrix: QR of a Gaussian matrix with the R diagonal
// sign-fixed positive, so the draw is unique and reproducible.
inline Eigen::MatrixXd random_orthogonal(int dim, Rng& rng) {
  const Eigen::MatrixXd g = rng.normal_matrix(dim, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

inline constexpr std::uint64_t kDefaultMixtureSeed = 2023;

// The ten-dimensional three-component benchmark prior:
// weights (.4,.3,.3); mu_1 = -5*ones with identity covariance; mu_2 = 0 with
// diagonal covariance linspace(1,2); mu_3 = +5*ones with the same eigenvalues
// rotated by a seeded random orthogonal basis.
inline GaussianMixturePrior paper_mixture(std::uint64_t q_seed = kDefaultMixtureSeed,
                                          int dim = 10) {
  Eigen::VectorXd weights(3);
  weights << 0.4, 0.3, 0.3;
  const Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(dim, 1.0, 2.0);
  Rng rng(derive_seed(q_seed, "mixture-eigenvectors"));
  const Eigen::MatrixXd q = random_orthogonal(dim, rng);
  std::vector<Eigen::VectorXd> means = {Eigen::VectorXd::Constant(dim, -5.0),
                                        Eigen::VectorXd::Zero(dim),
                                        Eigen::VectorXd::Constant(dim, 5.0)};
  std::vector<Eigen::MatrixXd> covs = {
      Eigen::MatrixXd::Identity(dim, dim), Eigen::MatrixXd(diag.asDiagonal()),
      Eigen::MatrixXd(q * diag.asDiagonal() * q.transpose())};
  // Symmetrize the rotated covariance so the SPD cache sees an exact symmetric
  // input.
  covs[2] = ((covs[2] + covs[2].transpose()) / 2.0).eval();
  return GaussianMixturePrior::create(weights, std::move(means), std::move(covs));
}

}  // namespace bcrb
