#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "bcrb/likelihoods.hpp"
#include "bcrb/linalg.hpp"
#include "bcrb/mixture.hpp"
#include "bcrb/rng.hpp"
#include "bcrb/wiener.hpp"

namespace bcrb {

enum class ScoreSource { trained, oracle };
enum class JdMethod { analytic, monte_carlo, phase_structured };

inline std::string to_string(ScoreSource s) {
  return s == ScoreSource::trained ? "trained-score" : "oracle-score";
}
inline std::string to_string(JdMethod m) {
  switch (m) {
    case JdMethod::analytic: return "jd-analytic";
    case JdMethod::monte_carlo: return "jd-mc";
    case JdMethod::phase_structured: return "jd-phase";
  }
  return "jd-unknown";
}

// Assembled estimate: jb = jp + jd, vb = pinv(jb), plus provenance.
struct BcrbEstimate {
  InfoMatrix jp, jd, jb, vb;
  long n_used = 0;
  std::optional<long> m_used;
  ScoreSource score_source = ScoreSource::trained;
  JdMethod jd_method = JdMethod::analytic;

  // Condition number of jb from the pseudoinverse spectra; diagnostic only.
  double jb_condition = 0.0;
};

// J_P estimate: mean outer product of scores over the sample columns.
template <class ScoreFn>
InfoMatrix estimate_jp(ScoreFn&& score_fn, const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (xs.cols() == 0) throw std::invalid_argument("estimate_jp: empty sample set");
  Eigen::MatrixXd scores(xs.rows(), xs.cols());
  for (Eigen::Index i = 0; i < xs.cols(); ++i)
    scores.col(i) = score_fn(xs.col(i).eval());
  return mean_outer(scores);
}

// J_D estimate when the per-x Fisher information is analytic: (1/N) sum J_F(x_i).
template <class FisherFn>
InfoMatrix estimate_jd_analytic(FisherFn&& fisher_fn,
                                const Eigen::Ref<const Eigen::MatrixXd>& xs) {
  if (xs.cols() == 0) throw std::invalid_argument("estimate_jd_analytic: empty sample set");
  InfoMatrix acc = InfoMatrix::Zero(xs.rows(), xs.rows());
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const InfoMatrix f = fisher_fn(xs.col(i).eval());
    acc += f;
  }
  acc /= static_cast<double>(xs.cols());
  return ((acc + acc.transpose()) / 2.0).eval();
}

// Monte-Carlo J_D: for each prior sample, M fresh likelihood draws; Fisher per
// sample is the mean outer product of likelihood scores.
template <class Likelihood>
InfoMatrix estimate_jd_mc(const Likelihood& lik,
                          const Eigen::Ref<const Eigen::MatrixXd>& xs, long m,
                          Rng& rng) {
  if (xs.cols() == 0) throw std::invalid_argument("estimate_jd_mc: empty sample set");
  if (m < 1) throw std::invalid_argument("estimate_jd_mc: M must be >= 1");
  const Eigen::Index d = xs.rows();
  Eigen::MatrixXd scores(d, m);
  InfoMatrix acc = InfoMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const Eigen::VectorXd x = xs.col(i);
    for (long j = 0; j < m; ++j) {
      const auto y = lik.sample_y(x, rng);
      scores.col(j) = lik.score_x(y, x);
    }
    acc += mean_outer(scores);
  }
  acc /= static_cast<double>(xs.cols());
  return ((acc + acc.transpose()) / 2.0).eval();
}

// Structured J_D for the phase problem: a scalar times the identity. The
// scalar is the Monte-Carlo mean of -d^2/dx_d^2 log p(y_d|x_d); symbols are
// i.i.d. given x_d, so all D coordinates are averaged to cut variance.
inline InfoMatrix estimate_jd_phase(const PhaseOffsetLikelihood& lik,
                                    const Eigen::Ref<const Eigen::MatrixXd>& xs,
                                    long m, Rng& rng) {
  if (xs.cols() == 0) throw std::invalid_argument("estimate_jd_phase: empty sample set");
  if (m < 1) throw std::invalid_argument("estimate_jd_phase: M must be >= 1");
  const int d = lik.dim();
  if (xs.rows() != d) throw std::invalid_argument("estimate_jd_phase: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const Eigen::VectorXd x = xs.col(i);
    for (long j = 0; j < m; ++j) {
      const Eigen::VectorXcd y = lik.sample_y(x, rng);
      for (int k = 0; k < d; ++k) acc -= lik.d2_loglik_d(y[k], x[k]);
    }
  }
  const double scalar =
      acc / (static_cast<double>(xs.cols()) * static_cast<double>(m) * d);
  return scalar * InfoMatrix::Identity(d, d);
}

// jb = jp + jd; vb = pinv(jb). Flags ill conditioning (> 1e8) via jb_condition.
inline BcrbEstimate assemble(const InfoMatrix& jp, const InfoMatrix& jd,
                             ScoreSource source, JdMethod method, long n_used,
                             std::optional<long> m_used = std::nullopt) {
  if (jp.rows() != jd.rows() || jp.cols() != jd.cols())
    throw std::invalid_argument("assemble: dimension mismatch");
  BcrbEstimate e;
  e.jp = jp;
  e.jd = jd;
  e.jb = jp + jd;
  e.vb = sym_pinv(e.jb);
  e.n_used = n_used;
  e.m_used = m_used;
  e.score_source = source;
  e.jd_method = method;
  const Eigen::VectorXd evals = detail::sym_eigenvalues(e.jb);
  const double lo = evals.cwiseAbs().minCoeff();
  const double hi = evals.cwiseAbs().maxCoeff();
  e.jb_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return e;
}

struct DenoiseProblem {
  GaussianMixturePrior prior;
  double tau = 1.0;  // noise standard deviation

  GaussianDenoisingLikelihood likelihood() const {
    return GaussianDenoisingLikelihood(tau);
  }
};

struct PhaseProblem {
  WienerPhasePrior prior;
  double tau_n2 = 0.2;
  long m = 10;  // likelihood draws per prior sample in Eq-(9)-style estimation

  PhaseOffsetLikelihood likelihood() const {
    return PhaseOffsetLikelihood(tau_n2, prior.dim());
  }
};

using Problem = std::variant<DenoiseProblem, PhaseProblem>;

// Oracle-score reference: the same pipeline with the ground-truth prior score
// and the problem's preferred J_D path, at n_oracle fresh samples. With a
// large n_oracle this is the ground-truth stand-in the experiments compare
// against. jd_n/jd_m override the Monte-Carlo J_D sample budget for the phase
// problem (0 = use n_oracle / problem m).
inline BcrbEstimate ground_truth_reference(const Problem& problem, long n_oracle,
                                           std::uint64_t seed, long jd_n = 0,
                                           long jd_m = 0) {
  if (n_oracle < 1)
    throw std::invalid_argument("ground_truth_reference: n_oracle must be >= 1");
  if (const auto* dn = std::get_if<DenoiseProblem>(&problem)) {
    Rng rng(derive_seed(seed, "oracle-reference-samples"));
    const Eigen::MatrixXd xs = dn->prior.sample(n_oracle, rng);
    const InfoMatrix jp =
        estimate_jp([&](const Eigen::VectorXd& x) { return dn->prior.score(x); }, xs);
    const auto lik = dn->likelihood();
    const InfoMatrix jd = estimate_jd_analytic(
        [&](const Eigen::VectorXd& x) { return lik.fisher(x); }, xs);
    return assemble(jp, jd, ScoreSource::oracle, JdMethod::analytic, n_oracle);
  }
  const auto& ph = std::get<PhaseProblem>(problem);
  Rng rng(derive_seed(seed, "oracle-reference-samples"));
  const Eigen::MatrixXd xs = ph.prior.sample(n_oracle, rng);
  const InfoMatrix jp =
      estimate_jp([&](const Eigen::VectorXd& x) { return ph.prior.score(x); }, xs);
  const long n_jd = jd_n > 0 ? std::min(jd_n, n_oracle) : n_oracle;
  const long m_jd = jd_m > 0 ? jd_m : ph.m;
  Rng jd_rng(derive_seed(seed, "oracle-reference-jd"));
  const InfoMatrix jd =
      estimate_jd_phase(ph.likelihood(), xs.leftCols(n_jd), m_jd, jd_rng);
  return assemble(jp, jd, ScoreSource::oracle, JdMethod::phase_structured, n_oracle, m_jd);
}

}  // namespace bcrb
