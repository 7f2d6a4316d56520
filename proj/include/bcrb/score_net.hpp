#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bcrb/activations.hpp"
#include "bcrb/linalg.hpp"
#include "bcrb/rng.hpp"

namespace bcrb {

// Feedforward score model s(x) = sigma_L(W_L sigma_{L-1}(... sigma_1(W_1 x))).
// Square in/out (d_0 = d_L = D), no biases.
template <class Scalar>
struct MlpScoreNet {
  using Mat = MatrixX<Scalar>;
  using Vec = VectorX<Scalar>;

  std::vector<Mat> weights;             // W_l : d_l x d_{l-1}
  std::vector<Activation> activations;  // one per layer

  int depth() const { return static_cast<int>(weights.size()); }
  Eigen::Index input_dim() const { return weights.front().cols(); }
  Eigen::Index output_dim() const { return weights.back().rows(); }

  std::vector<int> dims() const {
    std::vector<int> d;
    d.reserve(weights.size() + 1);
    d.push_back(static_cast<int>(weights.front().cols()));
    for (const Mat& w : weights) d.push_back(static_cast<int>(w.rows()));
    return d;
  }

  void validate() const {
    if (weights.empty()) throw std::invalid_argument("score net: no layers");
    if (activations.size() != weights.size())
      throw std::invalid_argument("score net: one activation per layer required");
    for (std::size_t l = 1; l < weights.size(); ++l)
      if (weights[l].cols() != weights[l - 1].rows())
        throw std::invalid_argument("score net: layer shapes do not chain");
    if (input_dim() != output_dim())
      throw std::invalid_argument("score net: d_0 != d_L");
    for (const Mat& w : weights)
      if (!w.allFinite()) throw std::invalid_argument("score net: non-finite weight");
  }
};

template <class Scalar>
using ParamGrad = std::vector<MatrixX<Scalar>>;

using MlpScoreNetd = MlpScoreNet<double>;

template <class Scalar>
MlpScoreNet<Scalar> make_mlp(const std::vector<int>& dims, Activation hidden,
                             Activation output = Activation::identity) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least one layer");
  MlpScoreNet<Scalar> net;
  const int layers = static_cast<int>(dims.size()) - 1;
  net.weights.reserve(layers);
  net.activations.reserve(layers);
  for (int l = 0; l < layers; ++l) {
    net.weights.emplace_back(MatrixX<Scalar>::Zero(dims[l + 1], dims[l]));
    net.activations.push_back(l + 1 == layers ? output : hidden);
  }
  net.validate();
  return net;
}

// Glorot-style uniform init on [-sqrt(6/(d_in+d_out)), +sqrt(6/(d_in+d_out))].
template <class Scalar>
void init_uniform_scaled(MlpScoreNet<Scalar>& net, Rng& rng) {
  for (auto& w : net.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        w(i, j) = Scalar(bound * (2.0 * rng.uniform01() - 1.0));
  }
}

namespace detail {

// Forward pass keeping pre-activation derivative data for Jacobian work.
// z_l = W_l a_{l-1}; a_l = sigma_l(z_l); d1/d2 are sigma'/sigma'' at z_l.
template <class Scalar>
struct ForwardTrace {
  std::vector<VectorX<Scalar>> a;   // a[0] = x, a[l] post-activation
  std::vector<VectorX<Scalar>> d1;  // per layer, index l-1
  std::vector<VectorX<Scalar>> d2;
};

template <class Scalar>
void forward_trace(const MlpScoreNet<Scalar>& net,
                   const Eigen::Ref<const VectorX<Scalar>>& x, bool want_d2,
                   ForwardTrace<Scalar>& t) {
  const int layers = net.depth();
  t.a.resize(layers + 1);
  t.d1.resize(layers);
  t.d2.resize(layers);
  t.a[0] = x;
  for (int l = 0; l < layers; ++l) {
    VectorX<Scalar> z = net.weights[l] * t.a[l];
    const Eigen::Index n = z.size();
    t.a[l + 1].resize(n);
    t.d1[l].resize(n);
    if (want_d2) t.d2[l].resize(n);
    Scalar v, g, h;
    for (Eigen::Index i = 0; i < n; ++i) {
      act::evaluate(net.activations[l], z[i], v, g, h);
      t.a[l + 1][i] = v;
      t.d1[l][i] = g;
      if (want_d2) t.d2[l][i] = h;
    }
  }
}

}  // namespace detail

template <class Scalar>
VectorX<Scalar> forward(const MlpScoreNet<Scalar>& net,
                        const Eigen::Ref<const VectorX<Scalar>>& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("forward: dimension mismatch");
  VectorX<Scalar> a = x;
  Scalar v, g, h;
  for (int l = 0; l < net.depth(); ++l) {
    VectorX<Scalar> z = net.weights[l] * a;
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      act::evaluate(net.activations[l], z[i], v, g, h);
      a[i] = v;
    }
  }
  return a;
}

// Input Jacobian grad_x s(x), assembled as the ordered product
// diag(sigma_L') W_L ... diag(sigma_1') W_1 with each derivative evaluated at
// the layer's pre-activation.
template <class Scalar>
MatrixX<Scalar> input_jacobian(const MlpScoreNet<Scalar>& net,
                               const Eigen::Ref<const VectorX<Scalar>>& x) {
  if (x.size() != net.input_dim())
    throw std::invalid_argument("input_jacobian: dimension mismatch");
  detail::ForwardTrace<Scalar> t;
  detail::forward_trace(net, x, /*want_d2=*/false, t);
  MatrixX<Scalar> j = t.d1[0].asDiagonal() * net.weights[0];
  for (int l = 1; l < net.depth(); ++l)
    j = (t.d1[l].asDiagonal() * (net.weights[l] * j)).eval();
  return j;
}

// tr(grad_x s(x)); computed as the diagonal sum of input_jacobian so the two
// paths agree bit for bit.
template <class Scalar>
Scalar jacobian_trace(const MlpScoreNet<Scalar>& net,
                      const Eigen::Ref<const VectorX<Scalar>>& x) {
  return input_jacobian(net, x).trace();
}

// Empirical score-matching objective over the columns of `batch`:
//   (1/N) sum_i [ tr(grad_x s(x_i)) + 0.5 ||s(x_i)||^2 ].
template <class Scalar>
Scalar empirical_sm_loss(const MlpScoreNet<Scalar>& net,
                         const Eigen::Ref<const MatrixX<Scalar>>& batch) {
  if (batch.cols() == 0) throw std::invalid_argument("empirical_sm_loss: empty batch");
  if (batch.rows() != net.input_dim())
    throw std::invalid_argument("empirical_sm_loss: dimension mismatch");
  const int layers = net.depth();
  detail::ForwardTrace<Scalar> t;
  Scalar total = Scalar(0);
  MatrixX<Scalar> j;
  for (Eigen::Index i = 0; i < batch.cols(); ++i) {
    detail::forward_trace<Scalar>(net, batch.col(i), /*want_d2=*/false, t);
    j = t.d1[0].asDiagonal() * net.weights[0];
    for (int l = 1; l < layers; ++l)
      j = (t.d1[l].asDiagonal() * (net.weights[l] * j)).eval();
    total += j.trace() + Scalar(0.5) * t.a[layers].squaredNorm();
  }
  return total / Scalar(batch.cols());
}

// Exact gradient of empirical_sm_loss with respect to every weight entry.
//
// With P_l = diag(d1_l) W_l, R_l = P_{l-1}...P_1 (R_1 = I) and
// L_l = P_L...P_{l+1} (L_L = I), the Jacobian is J = L_l P_l R_l for any l, so
//   d tr(J) / d W_l      = diag(d1_l) (R_l L_l)^T            (explicit factor)
//   d tr(J) / d z_{l,i}  = d2_{l,i} [W_l R_l L_l]_{ii}        (through d1_l)
// and the z-route terms join the usual backward sweep that also carries the
// 0.5||s||^2 adjoint a_L.
template <class Scalar>
ParamGrad<Scalar> sm_loss_grad(const MlpScoreNet<Scalar>& net,
                               const Eigen::Ref<const MatrixX<Scalar>>& batch) {
  if (batch.cols() == 0) throw std::invalid_argument("sm_loss_grad: empty batch");
  if (batch.rows() != net.input_dim())
    throw std::invalid_argument("sm_loss_grad: dimension mismatch");
  const int layers = net.depth();
  const Eigen::Index n = batch.cols();

  ParamGrad<Scalar> grad;
  grad.reserve(layers);
  for (const auto& w : net.weights) grad.emplace_back(MatrixX<Scalar>::Zero(w.rows(), w.cols()));

  detail::ForwardTrace<Scalar> t;
  std::vector<MatrixX<Scalar>> right(layers);  // R_l, d_{l-1} x d_0
  std::vector<MatrixX<Scalar>> left(layers);   // L_l, d_L x d_l
  MatrixX<Scalar> rl;
  VectorX<Scalar> g_a, g_z, c;

  for (Eigen::Index i = 0; i < n; ++i) {
    detail::forward_trace<Scalar>(net, batch.col(i), /*want_d2=*/true, t);

    right[0] = MatrixX<Scalar>::Identity(net.input_dim(), net.input_dim());
    for (int l = 1; l < layers; ++l)
      right[l] = t.d1[l - 1].asDiagonal() * (net.weights[l - 1] * right[l - 1]);
    left[layers - 1] =
        MatrixX<Scalar>::Identity(net.output_dim(), net.output_dim());
    for (int l = layers - 2; l >= 0; --l)
      left[l] = (left[l + 1] * t.d1[l + 1].asDiagonal()) * net.weights[l + 1];

    g_a = t.a[layers];  // adjoint of the output from 0.5||s||^2
    for (int l = layers - 1; l >= 0; --l) {
      rl.noalias() = right[l] * left[l];  // d_{l-1} x d_l
      // c_i = d2_{l,i} * [W_l R_l L_l]_{ii}
      c = t.d2[l].cwiseProduct(
          net.weights[l].cwiseProduct(rl.transpose()).rowwise().sum());
      g_z = t.d1[l].cwiseProduct(g_a) + c;
      grad[l].noalias() += g_z * t.a[l].transpose();
      grad[l].noalias() += t.d1[l].asDiagonal() * rl.transpose();
      if (l > 0) g_a.noalias() = net.weights[l].transpose() * g_z;
    }
  }
  for (auto& g : grad) g /= Scalar(n);
  return grad;
}

// Monte-Carlo Fisher divergence against a known score:
//   (1/2N) sum_i || s(x_i) - oracle(x_i) ||^2.
template <class Scalar, class ScoreFn>
Scalar fisher_divergence(const MlpScoreNet<Scalar>& net,
                         const Eigen::Ref<const MatrixX<Scalar>>& samples,
                         ScoreFn&& oracle_score) {
  if (samples.cols() == 0)
    throw std::invalid_argument("fisher_divergence: empty sample set");
  Scalar total = Scalar(0);
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const VectorX<Scalar> diff =
        forward<Scalar>(net, samples.col(i)) - oracle_score(samples.col(i).eval());
    total += diff.squaredNorm();
  }
  return total / (Scalar(2) * Scalar(samples.cols()));
}

// Realized weight norms (||W||_sigma via SVD, ||W||_{2,1} column sums);
// diagnostic only, nothing is enforced during training.
template <class Scalar>
std::vector<std::pair<double, double>> weight_norm_report(const MlpScoreNet<Scalar>& net) {
  std::vector<std::pair<double, double>> out;
  out.reserve(net.weights.size());
  for (const auto& w : net.weights) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(w);
    const double spectral = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    double two_one = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) two_one += w.col(j).norm();
    out.emplace_back(spectral, two_one);
  }
  return out;
}

}  // namespace bcrb
