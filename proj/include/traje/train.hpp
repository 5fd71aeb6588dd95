// Adam training loop for the trajectory model with a step-decay learning
// rate schedule, global-norm gradient clipping and best-validation
// checkpointing.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "traje/corpus.hpp"
#include "traje/rnn.hpp"

namespace traje::rnn
{

struct TrainConfig
{
  int epochs{100};
  double learning_rate{1e-3};
  double decay_factor{0.1};
  std::vector<int> decay_epochs{15, 40, 80};
  double grad_clip_norm{5.0};
  /// Sequences per optimizer step.
  int batch_size{1};
  std::uint64_t seed{0};

  void validate() const
  {
    if (epochs < 0) {
      throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    }
    if (!(learning_rate >= 0.0)) {
      throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    }
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
      throw std::invalid_argument("TrainConfig: decay_factor must be in (0, 1]");
    }
    if (!std::is_sorted(decay_epochs.begin(), decay_epochs.end())) {
      throw std::invalid_argument("TrainConfig: decay_epochs must be ascending");
    }
    if (batch_size < 1) {
      throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    }
  }
};

/// Learning rate in effect during the 0-based epoch `epoch`.
inline double learning_rate_at(const TrainConfig& tc, int epoch)
{
  double lr = tc.learning_rate;
  for (int d : tc.decay_epochs) {
    if (epoch >= d) {
      lr *= tc.decay_factor;
    }
  }
  return lr;
}

struct EpochStats
{
  /// 0 is the untrained model; k is the state after k epochs.
  int epoch{0};
  double learning_rate{0.0};
  double train_nll{0.0};
  double val_nll{0.0};
};

struct TrainResult
{
  ModelParams params;
  std::vector<EpochStats> history;
  int best_epoch{0};
};

class DivergenceError : public std::runtime_error
{
public:
  DivergenceError(const std::string& what, int epoch, std::size_t sequence)
    : std::runtime_error(what), epoch_(epoch), sequence_(sequence)
  {
  }

  int epoch() const { return epoch_; }
  std::size_t sequence() const { return sequence_; }

private:
  int epoch_;
  std::size_t sequence_;
};

/// Mean per-step NLL over a set of sequences.
inline double mean_nll(const Model& model, std::span<const data::TrainingSequence> seqs)
{
  double total = 0.0;
  std::size_t steps = 0;
  for (const auto& s : seqs) {
    if (s.offsets.size() < 2) {
      continue;
    }
    total += sequence_loss(model, s.inputs(), s.targets());
    steps += s.inputs().size();
  }
  return steps == 0 ? 0.0 : total / static_cast<double>(steps);
}

class AdamOptimizer
{
public:
  AdamOptimizer(const ModelConfig& cfg, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
    : beta1_(beta1), beta2_(beta2), eps_(eps)
  {
    const std::size_t n = ModelParams::zeros(cfg).parameter_count();
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }

  void step(ModelParams& params, const std::vector<double>& grad, double lr)
  {
    ++t_;
    std::vector<double> flat = params.flatten();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < flat.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
      flat[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
    params.unflatten(flat);
  }

private:
  double beta1_, beta2_, eps_;
  std::uint64_t t_{0};
  std::vector<double> m_, v_;
};

/// Scales `grad` in place so its L2 norm is at most max_norm.
inline void clip_global_norm(std::vector<double>& grad, double max_norm)
{
  if (!(max_norm > 0.0)) {
    return;
  }
  const double norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) {
      g *= scale;
    }
  }
}

using EpochCallback = std::function<void(const EpochStats&)>;

inline TrainResult train(const Model& initial, std::span<const data::TrainingSequence> train_set,
                         std::span<const data::TrainingSequence> val_set, const TrainConfig& tc,
                         const EpochCallback& on_epoch = {})
{
  tc.validate();
  if (train_set.empty()) {
    throw std::invalid_argument("train: empty training set");
  }
  Model model = initial;
  AdamOptimizer adam(model.config);
  Rng rng(tc.seed);

  auto evaluate = [&](int epoch, double lr, double train_nll) {
    EpochStats s{epoch, lr, train_nll, val_set.empty() ? train_nll : mean_nll(model, val_set)};
    if (!std::isfinite(s.val_nll)) {
      throw DivergenceError("validation NLL diverged after epoch " + std::to_string(epoch), epoch,
                            0);
    }
    return s;
  };

  TrainResult result;
  result.history.push_back(evaluate(0, 0.0, mean_nll(model, train_set)));
  if (on_epoch) {
    on_epoch(result.history.back());
  }
  result.params = model.params;
  double best_val = result.history.back().val_nll;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_params = model.params.parameter_count();

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = learning_rate_at(tc, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    std::vector<double> grad(n_params, 0.0);
    int in_batch = 0;

    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& seq = train_set[order[i]];
      if (seq.offsets.size() < 2) {
        continue;
      }
      LossAndGradient lg;
      try {
        lg = backward_sequence(model, seq.inputs(), seq.targets());
      } catch (const TrainingDivergence& e) {
        throw DivergenceError("training diverged in epoch " + std::to_string(epoch + 1) +
                                  " at sequence " + std::to_string(order[i]) + ": " + e.what(),
                              epoch + 1, order[i]);
      }
      epoch_loss += lg.loss;
      epoch_steps += seq.inputs().size();

      const std::vector<double> g = lg.gradient.flatten();
      for (std::size_t j = 0; j < n_params; ++j) {
        grad[j] += g[j];
      }
      if (++in_batch == tc.batch_size || i + 1 == order.size()) {
        clip_global_norm(grad, tc.grad_clip_norm);
        if (lr > 0.0) {
          adam.step(model.params, grad, lr);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        in_batch = 0;
      }
    }
    if (!model.params.all_finite()) {
      throw DivergenceError("parameters became non-finite in epoch " + std::to_string(epoch + 1),
                            epoch + 1, 0);
    }

    const double train_nll = epoch_steps ? epoch_loss / static_cast<double>(epoch_steps) : 0.0;
    result.history.push_back(evaluate(epoch + 1, lr, train_nll));
    if (on_epoch) {
      on_epoch(result.history.back());
    }
    if (result.history.back().val_nll < best_val) {
      best_val = result.history.back().val_nll;
      result.params = model.params;
      result.best_epoch = epoch + 1;
    }
  }
  return result;
}

}  // namespace traje::rnn
