// Per-track motion models behind one interface: projection for
// association, updates on association, extrapolation while lost, and the
// gap trajectory handed back on recovery.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "traje/core.hpp"
#include "traje/estimator.hpp"
#include "traje/kalman.hpp"
#include "traje/rnn.hpp"

namespace traje
{

enum class MotionKind
{
  None,
  ConstantVelocity,
  Kalman,
  TrajE
};

inline std::string to_string(MotionKind k)
{
  switch (k) {
    case MotionKind::None:
      return "none";
    case MotionKind::ConstantVelocity:
      return "cv";
    case MotionKind::Kalman:
      return "kalman";
    case MotionKind::TrajE:
      return "traje";
  }
  return "?";
}

struct GapPoint
{
  int frame{0};
  Centroid centroid;
};

struct Recovery
{
  /// One point per lost frame, in frame order.
  std::vector<GapPoint> gap;
  /// Where the model expected the object on the recovery frame.
  Centroid expected;
};

class MotionModel
{
public:
  virtual ~MotionModel() = default;

  virtual std::vector<Centroid> projections() const = 0;
  virtual void observe(const Centroid& c) = 0;
  virtual void propagate_lost(int frame) = 0;
  /// Ends a lost gap. The caller follows up with observe(detection).
  virtual Recovery recover(const Centroid& detection) = 0;
};

class StationaryMotion final : public MotionModel
{
public:
  explicit StationaryMotion(const Centroid& first) : last_(first) {}

  std::vector<Centroid> projections() const override { return {last_}; }
  void observe(const Centroid& c) override { last_ = c; }
  void propagate_lost(int frame) override { gap_.push_back({frame, last_}); }

  Recovery recover(const Centroid&) override
  {
    Recovery r{std::move(gap_), last_};
    gap_.clear();
    return r;
  }

private:
  Centroid last_;
  std::vector<GapPoint> gap_;
};

/// Last centroid plus the last observed offset.
class ConstantVelocityMotion final : public MotionModel
{
public:
  explicit ConstantVelocityMotion(const Centroid& first) : last_(first) {}

  std::vector<Centroid> projections() const override { return {last_ + velocity_}; }

  void observe(const Centroid& c) override
  {
    velocity_ = c - last_;
    last_ = c;
  }

  void propagate_lost(int frame) override
  {
    last_ = last_ + velocity_;
    gap_.push_back({frame, last_});
  }

  Recovery recover(const Centroid&) override
  {
    Recovery r{std::move(gap_), last_ + velocity_};
    gap_.clear();
    return r;
  }

private:
  Centroid last_;
  Offset velocity_{};
  std::vector<GapPoint> gap_;
};

/// Exactly one predict per frame: on association it precedes the update,
/// while lost the prediction itself becomes the gap point.
class KalmanMotion final : public MotionModel
{
public:
  KalmanMotion(const Centroid& first, const KalmanNoise& noise) : kf_(first, noise) {}

  std::vector<Centroid> projections() const override { return {kf_.peek()}; }

  void observe(const Centroid& c) override
  {
    kf_.predict();
    kf_.update(c);
  }

  void propagate_lost(int frame) override
  {
    kf_.predict();
    gap_.push_back({frame, kf_.position()});
  }

  Recovery recover(const Centroid&) override
  {
    Recovery r{std::move(gap_), kf_.peek()};
    gap_.clear();
    return r;
  }

  const KalmanFilter& filter() const { return kf_; }

private:
  KalmanFilter kf_;
  std::vector<GapPoint> gap_;
};

class TrajEMotion final : public MotionModel
{
public:
  TrajEMotion(std::shared_ptr<const rnn::Model> model, Strategy strategy, int beam_width,
              double bias, const Centroid& first, std::uint64_t seed)
    : est_(std::move(model), strategy, beam_width, bias, first), rng_(seed)
  {
  }

  std::vector<Centroid> projections() const override
  {
    std::vector<Centroid> out;
    for (const auto& p : est_.predictions()) {
      out.push_back(p.centroid);
    }
    return out;
  }

  void observe(const Centroid& c) override { est_.observe(c, rng_); }
  void propagate_lost(int frame) override { est_.propagate_lost(frame, rng_); }

  Recovery recover(const Centroid& detection) override
  {
    const Beam winner = est_.commit_recovery(detection);
    Recovery r;
    for (const auto& p : winner.pending) {
      r.gap.push_back({p.frame, p.centroid});
    }
    r.expected = winner.next;
    return r;
  }

  const TrajectoryEstimator& estimator() const { return est_; }

private:
  TrajectoryEstimator est_;
  Rng rng_;
};

}  // namespace traje
