#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcrb/rng.hpp"
#include "bcrb/score_net.hpp"

namespace bcrb {

struct SplitRule {
  enum class Kind { fraction, count };
  Kind kind = Kind::fraction;
  double value = 0.2;  // validation fraction, or validation count

  static SplitRule fraction(double f) { return {Kind::fraction, f}; }
  static SplitRule count(double c) { return {Kind::count, c}; }
};

// Paper protocol: 5000 validation samples at N=1e5, 1000 at N=1e4, and an 80%
// validation split for N <= 1e3.
inline SplitRule paper_split_rule(long n) {
  if (n >= 100000) return SplitRule::count(5000);
  if (n >= 10000) return SplitRule::count(1000);
  return SplitRule::fraction(0.8);
}

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  long batch_size = 0;  // 0 = full batch
  int patience = 200;
  SplitRule val_split = SplitRule::fraction(0.2);
  long max_steps = 200000;
  int val_every = 1;  // optimizer steps per validation check
  std::uint64_t seed = 0;
  AdamHyper adam() const { return {learning_rate, 0.9, 0.999, 1e-8}; }
};

struct TrainReport {
  double best_val_loss = 0.0;
  long steps_run = 0;
  std::vector<std::pair<long, double>> val_history;  // (step, loss)
  double wall_time_s = 0.0;
};

class TrainDivergence : public std::runtime_error {
 public:
  TrainDivergence(TrainReport report, MlpScoreNetd best_net)
      : std::runtime_error("training diverged: non-finite validation loss"),
        report(std::move(report)),
        best_net(std::move(best_net)) {}
  TrainReport report;      // history up to the failure
  MlpScoreNetd best_net;   // last finite best weights
};

// Deterministic disjoint exhaustive split; validation takes the head of a
// seeded permutation. Columns are samples.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_dataset(
    const Eigen::Ref<const Eigen::MatrixXd>& data, const TrainConfig& cfg) {
  const long n = static_cast<long>(data.cols());
  if (n < 2) throw std::invalid_argument("split_dataset: need at least 2 samples");
  long n_val = 0;
  if (cfg.val_split.kind == SplitRule::Kind::fraction) {
    if (cfg.val_split.value <= 0.0 || cfg.val_split.value >= 1.0)
      throw std::invalid_argument("split_dataset: fraction must be in (0,1)");
    n_val = std::lround(cfg.val_split.value * static_cast<double>(n));
  } else {
    n_val = std::lround(cfg.val_split.value);
  }
  if (n_val < 1) throw std::invalid_argument("split_dataset: empty validation set");
  if (n - n_val < 1)
    throw std::invalid_argument("split_dataset: split rule leaves empty train set");

  std::vector<long> perm(n);
  std::iota(perm.begin(), perm.end(), 0L);
  Rng rng(derive_seed(cfg.seed, "dataset-split"));
  rng.shuffle(perm);

  Eigen::MatrixXd val(data.rows(), n_val);
  Eigen::MatrixXd train(data.rows(), n - n_val);
  for (long i = 0; i < n_val; ++i) val.col(i) = data.col(perm[i]);
  for (long i = n_val; i < n; ++i) train.col(i - n_val) = data.col(perm[i]);
  return {std::move(train), std::move(val)};
}

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  long t = 0;

  static AdamState like(const std::vector<Eigen::MatrixXd>& params) {
    AdamState s;
    for (const auto& p : params) {
      s.m.emplace_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
      s.v.emplace_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
    return s;
  }
};

// Standard bias-corrected Adam update, in place.
inline void adam_step_inplace(std::vector<Eigen::MatrixXd>& params,
                              const ParamGrad<double>& grads, AdamState& state,
                              const AdamHyper& h) {
  if (grads.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  for (const auto& g : grads)
    if (!g.allFinite()) throw std::runtime_error("adam_step: non-finite gradient");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols())
      throw std::invalid_argument("adam_step: shape mismatch");
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * grads[i];
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= h.learning_rate * (state.m[i].array() / bc1) /
                         ((state.v[i].array() / bc2).sqrt() + h.epsilon);
  }
}

// Pure variant of the update, matching the (params, state) -> (params', state')
// contract.
inline std::pair<std::vector<Eigen::MatrixXd>, AdamState> adam_step(
    std::vector<Eigen::MatrixXd> params, const ParamGrad<double>& grads,
    AdamState state, const AdamHyper& h) {
  adam_step_inplace(params, grads, state, h);
  return {std::move(params), std::move(state)};
}

struct ArchSpec {
  std::vector<int> hidden;  // hidden layer widths
  Activation hidden_activation = Activation::softplus;
  Activation output_activation = Activation::identity;
};

// Test hook: invoked with every gradient minibatch (training never touches
// validation columns for gradients).
using BatchObserver = std::function<void(const Eigen::Ref<const Eigen::MatrixXd>&)>;

// Early-stopped score-model training. Validation loss is checked every
// cfg.val_every optimizer steps; the weights with the best validation loss are
// returned; training stops after cfg.patience non-improving checks or
// cfg.max_steps optimizer steps. Deterministic for fixed (data, cfg).
inline std::pair<MlpScoreNetd, TrainReport> train_score_model(
    const Eigen::Ref<const Eigen::MatrixXd>& data, const ArchSpec& arch,
    const TrainConfig& cfg, const BatchObserver& on_grad_batch = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  auto [train, val] = split_dataset(data, cfg);
  const long n_train = static_cast<long>(train.cols());
  const Eigen::Index dim = data.rows();

  std::vector<int> dims;
  dims.push_back(static_cast<int>(dim));
  for (int w : arch.hidden) dims.push_back(w);
  dims.push_back(static_cast<int>(dim));
  MlpScoreNetd net =
      make_mlp<double>(dims, arch.hidden_activation, arch.output_activation);
  Rng init_rng(derive_seed(cfg.seed, "weight-init"));
  init_uniform_scaled(net, init_rng);

  AdamState adam = AdamState::like(net.weights);
  const AdamHyper hyper = cfg.adam();
  const long batch = cfg.batch_size <= 0 ? n_train : std::min(cfg.batch_size, n_train);

  TrainReport report;
  const auto finish = [&](double best) {
    report.best_val_loss = best;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
  };

  double best_val = empirical_sm_loss<double>(net, val);
  report.val_history.emplace_back(0L, best_val);
  std::vector<Eigen::MatrixXd> best_weights = net.weights;
  if (!std::isfinite(best_val)) {
    finish(best_val);
    throw TrainDivergence(report, net);
  }

  long steps = 0;
  int stale_checks = 0;
  std::vector<long> order(n_train);
  std::iota(order.begin(), order.end(), 0L);
  Eigen::MatrixXd minibatch(dim, batch);

  bool stop = false;
  for (long epoch = 0; !stop; ++epoch) {
    Rng epoch_rng(derive_seed(cfg.seed, "epoch-shuffle", {static_cast<std::uint64_t>(epoch)}));
    epoch_rng.shuffle(order);
    for (long start = 0; start < n_train && !stop; start += batch) {
      const long count = std::min(batch, n_train - start);
      minibatch.resize(dim, count);
      for (long k = 0; k < count; ++k) minibatch.col(k) = train.col(order[start + k]);

      const ParamGrad<double> grads = sm_loss_grad<double>(net, minibatch);
      if (on_grad_batch) on_grad_batch(minibatch);
      adam_step_inplace(net.weights, grads, adam, hyper);
      ++steps;

      if (steps % cfg.val_every == 0) {
        const double vloss = empirical_sm_loss<double>(net, val);
        report.val_history.emplace_back(steps, vloss);
        if (!std::isfinite(vloss)) {
          report.steps_run = steps;
          finish(best_val);
          MlpScoreNetd best = net;
          best.weights = best_weights;
          throw TrainDivergence(report, best);
        }
        if (vloss < best_val) {
          best_val = vloss;
          best_weights = net.weights;
          stale_checks = 0;
        } else if (++stale_checks >= cfg.patience) {
          stop = true;
        }
      }
      if (steps >= cfg.max_steps) stop = true;
    }
  }

  net.weights = std::move(best_weights);
  report.steps_run = steps;
  finish(best_val);
  return {std::move(net), report};
}

}  // namespace bcrb
