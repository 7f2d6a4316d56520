#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcrb/estimators.hpp"
#include "bcrb/likelihoods.hpp"
#include "bcrb/mixture.hpp"
#include "bcrb/rng.hpp"

namespace bcrb {

// Closed-form MMSE for the Gaussian-mixture denoising model. The posterior is
// again a mixture: component posteriors N(m_k, C_k) with
//   C_k = (Sigma_k^{-1} + I/tau^2)^{-1} = tau^2 Sigma_k (Sigma_k + tau^2 I)^{-1}
//   m_k = C_k (Sigma_k^{-1} mu_k + y/tau^2)
// and weights w_k proportional to pi_k N(y; mu_k, Sigma_k + tau^2 I).
// Factorizations are cached per (prior, tau).
class MmseDenoiser {
 public:
  MmseDenoiser(const GaussianMixturePrior& prior, double tau)
      : prior_(&prior), tau2_(tau * tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("mmse: tau must be positive");
    const Eigen::Index d = prior.dim();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    for (int k = 0; k < prior.components(); ++k) {
      const Eigen::MatrixXd& cov = prior.covariance(k);
      Eigen::LLT<Eigen::MatrixXd> marg_llt(cov + tau2_ * eye);
      if (marg_llt.info() != Eigen::Success)
        throw std::runtime_error("mmse: marginal covariance not SPD");
      double logdet = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        logdet += 2.0 * std::log(marg_llt.matrixLLT()(j, j));
      marginal_llt_.push_back(std::move(marg_llt));
      marginal_log_norm_.push_back(
          -0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + logdet));
      // C_k via the tau^2 Sigma (Sigma + tau^2 I)^{-1} form (no explicit
      // inverses of Sigma_k).
      Eigen::MatrixXd c = tau2_ * marginal_llt_.back().solve(cov).transpose();
      posterior_cov_.push_back(((c + c.transpose()) / 2.0).eval());
      prior_precision_mean_.push_back(prior.cholesky(k).solve(prior.mean(k)));
    }
  }

  // Posterior mean E[x | y].
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    const auto& prior = *prior_;
    const Eigen::Index d = prior.dim();
    if (y.size() != d) throw std::invalid_argument("mmse: dimension mismatch");
    const int n_comp = prior.components();
    Eigen::VectorXd log_w(n_comp);
    std::vector<Eigen::VectorXd> post_mean(static_cast<std::size_t>(n_comp));
    for (int k = 0; k < n_comp; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Eigen::VectorXd centered = y - prior.mean(k);
      const Eigen::VectorXd half = marginal_llt_[ks].matrixL().solve(centered);
      log_w[k] = prior.component_log_weight(k) + marginal_log_norm_[ks] -
                 0.5 * half.squaredNorm();
      post_mean[ks] =
          posterior_cov_[ks] * (prior_precision_mean_[ks] + y / tau2_);
    }
    const double lse = log_sum_exp(log_w);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < n_comp; ++k)
      out += std::exp(log_w[k] - lse) * post_mean[static_cast<std::size_t>(k)];
    return out;
  }

  // Posterior component means; used as MAP restart points.
  std::vector<Eigen::VectorXd> component_posterior_means(
      const Eigen::Ref<const Eigen::VectorXd>& y) const {
    std::vector<Eigen::VectorXd> means;
    for (int k = 0; k < prior_->components(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      means.push_back(posterior_cov_[ks] * (prior_precision_mean_[ks] + y / tau2_));
    }
    return means;
  }

  // Normalized posterior weights w_k(y); sums to 1 exactly after
  // renormalization.
  Eigen::VectorXd posterior_weights(const Eigen::Ref<const Eigen::VectorXd>& y) const {
    const auto& prior = *prior_;
    Eigen::VectorXd log_w(prior.components());
    for (int k = 0; k < prior.components(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const Eigen::VectorXd half = marginal_llt_[ks].matrixL().solve(y - prior.mean(k));
      log_w[k] = prior.component_log_weight(k) + marginal_log_norm_[ks] -
                 0.5 * half.squaredNorm();
    }
    Eigen::VectorXd w = (log_w.array() - log_sum_exp(log_w)).exp();
    return w / w.sum();
  }

 private:
  static double log_sum_exp(const Eigen::VectorXd& logs) {
    const double m = logs.maxCoeff();
    return m + std::log((logs.array() - m).exp().sum());
  }

  const GaussianMixturePrior* prior_;
  double tau2_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> marginal_llt_;
  std::vector<double> marginal_log_norm_;
  std::vector<Eigen::MatrixXd> posterior_cov_;
  std::vector<Eigen::VectorXd> prior_precision_mean_;
};

inline Eigen::VectorXd mmse_denoise(const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const GaussianMixturePrior& prior, double tau) {
  return MmseDenoiser(prior, tau)(y);
}

struct MapOptions {
  double initial_step = 0.5;
  int max_iters = 2000;
  int max_restarts = 0;     // 0 = one restart per mixture component
  double grad_tol = 1e-8;   // stop when ||g|| <= grad_tol * (1 + ||x||)
  double armijo_c = 1e-4;
  double min_step = 1e-14;
};

// MAP estimate by gradient ascent on log p(x) + log p(y|x), with backtracking
// (Armijo) line search and one restart per component posterior mean; the best
// final objective wins.
inline Eigen::VectorXd map_denoise(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const GaussianMixturePrior& prior, double tau,
                                   const MapOptions& opts = {}) {
  if (!(tau > 0.0)) throw std::invalid_argument("map: tau must be positive");
  const GaussianDenoisingLikelihood lik(tau);
  const auto objective = [&](const Eigen::VectorXd& x) {
    return prior.logpdf(x) + lik.loglik(y, x);
  };
  const auto gradient = [&](const Eigen::VectorXd& x) {
    return (prior.score(x) + lik.score_x(y, x)).eval();
  };

  const MmseDenoiser mmse(prior, tau);
  std::vector<Eigen::VectorXd> starts = mmse.component_posterior_means(y);
  if (opts.max_restarts > 0 &&
      starts.size() > static_cast<std::size_t>(opts.max_restarts))
    starts.resize(static_cast<std::size_t>(opts.max_restarts));

  Eigen::VectorXd best_x;
  double best_f = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& x0 : starts) {
    Eigen::VectorXd x = x0;
    double f = objective(x);
    if (!std::isfinite(f)) throw std::runtime_error("map: non-finite objective");
    double step = opts.initial_step;
    for (int it = 0; it < opts.max_iters; ++it) {
      const Eigen::VectorXd g = gradient(x);
      const double gnorm = g.norm();
      if (gnorm <= opts.grad_tol * (1.0 + x.norm())) break;
      double t = step;
      bool accepted = false;
      while (t >= opts.min_step) {
        const Eigen::VectorXd cand = x + t * g;
        const double fc = objective(cand);
        if (std::isfinite(fc) && fc >= f + opts.armijo_c * t * gnorm * gnorm) {
          x = cand;
          f = fc;
          step = t * 2.0;  // remember an aggressive step for the next iterate
          accepted = true;
          break;
        }
        t /= 2.0;
      }
      if (!accepted) break;
    }
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return best_x;
}

struct RmseResult {
  double rmse = 0.0;
  long n_pairs = 0;
  std::string estimator_tag;
  double mse_mean = 0.0;
  double mse_se = 0.0;  // standard error of the mean squared error
};

// RMSE of an estimator over fresh joint draws (x, y).
template <class Estimator>
RmseResult rmse_eval(Estimator&& estimator, const GaussianMixturePrior& prior,
                     const GaussianDenoisingLikelihood& lik, long n_pairs, Rng& rng,
                     std::string tag) {
  if (n_pairs < 1) throw std::invalid_argument("rmse_eval: n_pairs must be >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n_pairs; ++i) {
    const Eigen::VectorXd x = prior.sample(1, rng).col(0);
    const Eigen::VectorXd y = lik.sample_y(x, rng);
    const double se = (estimator(y) - x).squaredNorm();
    sum += se;
    sum_sq += se * se;
  }
  RmseResult r;
  r.n_pairs = n_pairs;
  r.estimator_tag = std::move(tag);
  const double n = static_cast<double>(n_pairs);
  r.mse_mean = sum / n;
  const double var = n_pairs > 1
                         ? std::max(0.0, sum_sq - n * r.mse_mean * r.mse_mean) / (n - 1.0)
                         : 0.0;
  r.mse_se = std::sqrt(var / n);
  r.rmse = std::sqrt(r.mse_mean);
  return r;
}

// Scalar bound from the matrix bound: sqrt(tr V_B), the MSE lower bound the
// information inequality implies for the total squared error.
inline RmseResult bound_rmse(const InfoMatrix& vb) {
  RmseResult r;
  r.estimator_tag = "bound";
  r.n_pairs = 0;
  r.mse_mean = vb.trace();
  r.rmse = std::sqrt(std::max(0.0, r.mse_mean));
  return r;
}

}  // namespace bcrb
