// Per-track trajectory estimator: a trained model plus beam search over
// sampled future offsets. Strategies:
//   BM   one chain, always the mean of the most probable component
//   GBS  one chain, the best of B samples per step
//   PBS  B chains; every chain draws B samples, the best B of all B*B survive

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "traje/core.hpp"
#include "traje/mdn.hpp"
#include "traje/rnn.hpp"

namespace traje
{

enum class Strategy
{
  BM,
  GBS,
  PBS
};

inline std::string to_string(Strategy s)
{
  switch (s) {
    case Strategy::BM:
      return "bm";
    case Strategy::GBS:
      return "gbs";
    case Strategy::PBS:
      return "pbs";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s)
{
  if (s == "bm") {
    return Strategy::BM;
  }
  if (s == "gbs") {
    return Strategy::GBS;
  }
  if (s == "pbs") {
    return Strategy::PBS;
  }
  throw std::invalid_argument("unknown strategy: " + s);
}

struct PendingPoint
{
  int frame{0};
  Centroid centroid;
  /// Log-density of the offset that produced this point (0 for stationary fill).
  double log_density{0.0};

  friend bool operator==(const PendingPoint&, const PendingPoint&) = default;
};

struct Beam
{
  rnn::HiddenState hidden;
  Centroid last_centroid;
  std::vector<PendingPoint> pending;
  double score{0.0};
  int beam_index{0};

  /// Hypothesis for the next frame and the distribution it was drawn from.
  /// Without a distribution (cold start) the hypothesis is last_centroid.
  Centroid next;
  double next_log_density{0.0};
  std::optional<mdn::MixtureParams> next_distribution;
};

struct EstimatorState
{
  std::vector<Beam> beams;
  int observations_seen{0};
  Strategy strategy{Strategy::PBS};
  double bias{1.0};
  int beam_width{1};
};

struct BeamPrediction
{
  Centroid centroid;
  int beam_index{0};
};

using Prediction = std::vector<BeamPrediction>;

class TrajectoryEstimator
{
public:
  TrajectoryEstimator(std::shared_ptr<const rnn::Model> model, Strategy strategy, int beam_width,
                      double bias, const Centroid& first)
    : model_(std::move(model))
  {
    if (!model_) {
      throw std::invalid_argument("estimator requires a model");
    }
    if (beam_width < 1) {
      throw std::invalid_argument("beam width must be >= 1");
    }
    if (!(bias >= 0.0)) {
      throw std::invalid_argument("bias must be >= 0");
    }
    state_.strategy = strategy;
    state_.beam_width = beam_width;
    state_.bias = bias;
    state_.observations_seen = 1;
    Beam b;
    b.hidden = rnn::initial_state(model_->config);
    b.last_centroid = first;
    b.next = first;
    state_.beams.push_back(std::move(b));
  }

  const EstimatorState& state() const { return state_; }

  /// Beams kept between frames: B for PBS, 1 otherwise.
  int effective_width() const { return state_.strategy == Strategy::PBS ? state_.beam_width : 1; }

  /// Samples drawn per beam and step: 1 for BM, B otherwise.
  int draws_per_beam() const { return state_.strategy == Strategy::BM ? 1 : state_.beam_width; }

  Prediction predictions() const
  {
    Prediction out;
    out.reserve(state_.beams.size());
    for (const Beam& b : state_.beams) {
      out.push_back({b.next, b.beam_index});
    }
    return out;
  }

  /// Track associated to a detection while active.
  Prediction observe(const Centroid& c, Rng& rng)
  {
    if (has_pending()) {
      commit_recovery(c);
    }
    Beam base = state_.beams.front();
    ++state_.observations_seen;
    base.hidden = rnn::cell_step(model_->params, base.hidden, c - base.last_centroid);
    base.last_centroid = c;
    base.pending.clear();
    base.score = 0.0;
    const mdn::MixtureParams dist = distribution(base.hidden);

    state_.beams.clear();
    if (state_.strategy == Strategy::PBS) {
      for (int i = 0; i < state_.beam_width; ++i) {
        const Offset o = mdn::sample(dist, rng);
        Beam b = base;
        b.beam_index = i;
        set_hypothesis(b, dist, o);
        state_.beams.push_back(std::move(b));
      }
    } else {
      const Offset o = state_.strategy == Strategy::BM ? mdn::best_mean(dist) : best_of_draws(dist, rng);
      base.beam_index = 0;
      set_hypothesis(base, dist, o);
      state_.beams.push_back(std::move(base));
    }
    return predictions();
  }

  /// Track unassociated at `frame`: every beam commits its hypothesis for
  /// this frame and extends it by one step.
  void propagate_lost(int frame, Rng& rng)
  {
    if (!state_.beams.front().next_distribution) {
      for (Beam& b : state_.beams) {
        b.pending.push_back({frame, b.last_centroid, 0.0});
      }
      return;
    }

    struct Candidate
    {
      std::size_t parent;
      int draw;
      Offset offset;
      double log_density;
      double key;
    };
    std::vector<Beam> advanced;
    std::vector<mdn::MixtureParams> dists;
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < state_.beams.size(); ++p) {
      Beam b = state_.beams[p];
      const Offset step = b.next - b.last_centroid;
      b.pending.push_back({frame, b.next, b.next_log_density});
      b.score += b.next_log_density;
      b.last_centroid = b.next;
      b.hidden = rnn::cell_step(model_->params, b.hidden, step);
      const mdn::MixtureParams dist = distribution(b.hidden);

      if (state_.strategy == Strategy::PBS) {
        for (int d = 0; d < state_.beam_width; ++d) {
          const Offset o = mdn::sample(dist, rng);
          const double lp = mdn::log_density(dist, o);
          candidates.push_back({p, d, o, lp, b.score + lp});
        }
      } else {
        const Offset o = state_.strategy == Strategy::BM ? mdn::best_mean(dist) : best_of_draws(dist, rng);
        const double lp = mdn::log_density(dist, o);
        candidates.push_back({p, 0, o, lp, b.score + lp});
      }
      advanced.push_back(std::move(b));
      dists.push_back(dist);
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.key > b.key; });
    const std::size_t keep = std::min<std::size_t>(candidates.size(), effective_width());

    std::vector<Beam> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      Beam b = advanced[c.parent];
      b.beam_index = static_cast<int>(i);
      b.next = b.last_centroid + c.offset;
      b.next_log_density = c.log_density;
      b.next_distribution = dists[c.parent];
      next.push_back(std::move(b));
    }
    state_.beams = std::move(next);
  }

  /// Detection associated to the lost track. Picks the beam maximizing its
  /// score plus the log-density of reaching `detection` in one more step,
  /// then collapses every beam onto the winner. Returns the winner as it
  /// was before the collapse, pending trajectory included.
  Beam commit_recovery(const Centroid& detection)
  {
    std::size_t best = 0;
    double best_key = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < state_.beams.size(); ++i) {
      const Beam& b = state_.beams[i];
      double key = b.score;
      if (b.next_distribution) {
        key += mdn::log_density(*b.next_distribution, detection - b.last_centroid);
      }
      if (i == 0 || key > best_key) {
        best = i;
        best_key = key;
      }
    }
    Beam winner = state_.beams[best];

    Beam reset = winner;
    reset.pending.clear();
    reset.score = 0.0;
    state_.beams.assign(static_cast<std::size_t>(effective_width()), reset);
    for (std::size_t i = 0; i < state_.beams.size(); ++i) {
      state_.beams[i].beam_index = static_cast<int>(i);
    }
    return winner;
  }

  bool has_pending() const { return !state_.beams.front().pending.empty(); }

private:
  mdn::MixtureParams distribution(const rnn::HiddenState& h) const
  {
    return mdn::constrain(rnn::heads(model_->params, h), state_.bias);
  }

  Offset best_of_draws(const mdn::MixtureParams& dist, Rng& rng) const
  {
    Offset best{};
    double best_lp = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < state_.beam_width; ++d) {
      const Offset o = mdn::sample(dist, rng);
      const double lp = mdn::log_density(dist, o);
      if (d == 0 || lp > best_lp) {
        best = o;
        best_lp = lp;
      }
    }
    return best;
  }

  static void set_hypothesis(Beam& b, const mdn::MixtureParams& dist, const Offset& o)
  {
    b.next = b.last_centroid + o;
    b.next_log_density = mdn::log_density(dist, o);
    b.next_distribution = dist;
  }

  std::shared_ptr<const rnn::Model> model_;
  EstimatorState state_;
};

}  // namespace traje
