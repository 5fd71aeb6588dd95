// Tracking-by-detection loop: gated L1 association of motion projections
// to detections, the Active / Lost / Terminated lifecycle, and optional
// reconstruction of occluded gaps.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "traje/core.hpp"
#include "traje/estimator.hpp"
#include "traje/hungarian.hpp"
#include "traje/kalman.hpp"
#include "traje/motion.hpp"
#include "traje/scenario.hpp"

namespace traje
{

using data::FrameDetections;

struct TrackerConfig
{
  MotionKind motion{MotionKind::None};
  Strategy strategy{Strategy::PBS};
  int beam_width{5};
  double bias{1.0};
  int patience{100};
  bool occ_reconstruct{false};
  double iou_coherence_threshold{0.5};
  /// Gate in pixels is this times the mean side of the track's last box.
  double association_gate{1.0};
  double detection_min_confidence{0.4};
  double iou_birth_suppression{0.3};
  std::size_t min_track_length{2};
  KalmanNoise kalman;

  void validate() const
  {
    if (patience < 0) {
      throw std::invalid_argument("patience must be >= 0");
    }
    if (beam_width < 1) {
      throw std::invalid_argument("beam width must be >= 1");
    }
    if (!(bias >= 0.0)) {
      throw std::invalid_argument("bias must be >= 0");
    }
    for (double t : {iou_coherence_threshold, detection_min_confidence, iou_birth_suppression}) {
      if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("tracker thresholds must lie in [0, 1]");
      }
    }
    if (!(association_gate >= 0.0)) {
      throw std::invalid_argument("association gate must be >= 0");
    }
  }
};

struct TrackerOutput
{
  std::vector<Track> tracks;
};

struct Association
{
  /// (row, detection) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_detections;
};

/// Rows are tracks (already in id order), columns detections. The cost of
/// a pair is the smallest L1 distance between any projection of the track
/// and the detection centroid; pairs above the row's gate are forbidden.
inline Association associate(const std::vector<std::vector<Centroid>>& projections,
                             const std::vector<Centroid>& detections,
                             const std::vector<double>& gates)
{
  Association out;
  const std::size_t n = projections.size(), m = detections.size();
  std::vector<char> det_used(m, 0);
  if (n > 0 && m > 0) {
    Eigen::MatrixXd cost(n, m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (const Centroid& p : projections[i]) {
          best = std::min(best, l1_distance(p, detections[j]));
        }
        cost(i, j) = best <= gates[i] ? best : kForbiddenCost;
      }
    }
    const std::vector<int> a = hungarian(cost);
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] >= 0 && cost(i, a[i]) < kForbiddenCost) {
        out.matches.emplace_back(i, static_cast<std::size_t>(a[i]));
        det_used[a[i]] = 1;
      } else {
        out.unmatched_rows.push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out.unmatched_rows.push_back(i);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!det_used[j]) {
      out.unmatched_detections.push_back(j);
    }
  }
  return out;
}

class Tracker
{
public:
  Tracker(TrackerConfig cfg, std::shared_ptr<const rnn::Model> model, std::uint64_t seed)
    : cfg_(std::move(cfg)), model_(std::move(model)), seed_(seed)
  {
    cfg_.validate();
    if (cfg_.motion == MotionKind::TrajE && !model_) {
      throw std::invalid_argument("TrajE motion requires a model");
    }
  }

  void step(const FrameDetections& fd)
  {
    if (fd.frame <= last_frame_) {
      throw std::invalid_argument("frames must be presented in increasing order (got " +
                                  std::to_string(fd.frame) + " after " +
                                  std::to_string(last_frame_) + ")");
    }
    last_frame_ = fd.frame;
    const int frame = fd.frame;

    std::vector<Detection> dets;
    for (const Detection& d : fd.detections) {
      if (d.confidence >= cfg_.detection_min_confidence && d.box.valid()) {
        dets.push_back(d);
      }
    }
    std::vector<Centroid> det_centroids;
    for (const Detection& d : dets) {
      det_centroids.push_back(centroid_of(d.box));
    }

    std::vector<std::size_t> live;
    std::vector<std::vector<Centroid>> projections;
    std::vector<double> gates;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].track.state == TrackState::Terminated) {
        continue;
      }
      live.push_back(i);
      projections.push_back(slots_[i].motion->projections());
      const BoundingBox& b = slots_[i].track.last().box;
      gates.push_back(cfg_.association_gate * (b.width + b.height) / 2.0);
    }

    const Association assoc = associate(projections, det_centroids, gates);
    for (const auto& [row, j] : assoc.matches) {
      Slot& s = slots_[live[row]];
      if (s.track.state == TrackState::Lost) {
        recover(s, dets[j]);
      }
      s.track.points.push_back({frame, dets[j].box, Provenance::Observed});
      s.motion->observe(det_centroids[j]);
      s.track.state = TrackState::Active;
      s.track.lost_since.reset();
      s.track.patience_left = cfg_.patience;
    }
    for (std::size_t row : assoc.unmatched_rows) {
      Slot& s = slots_[live[row]];
      if (s.track.state == TrackState::Active) {
        s.track.state = TrackState::Lost;
        s.track.lost_since = frame;
      }
      s.track.patience_left = std::max(0, s.track.patience_left - 1);
      if (s.track.patience_left == 0) {
        s.track.state = TrackState::Terminated;
      } else {
        s.motion->propagate_lost(frame);
      }
    }

    // Births are suppressed against tracks that existed before this frame.
    const std::size_t existing = slots_.size();
    for (std::size_t j : assoc.unmatched_detections) {
      bool suppressed = false;
      for (std::size_t i = 0; i < existing && !suppressed; ++i) {
        const Track& t = slots_[i].track;
        if (t.state != TrackState::Terminated &&
            iou(t.last().box, dets[j].box) >= cfg_.iou_birth_suppression) {
          suppressed = true;
        }
      }
      if (!suppressed) {
        spawn(frame, dets[j]);
      }
    }
  }

  /// Every track that survives the length filter, sorted by id.
  TrackerOutput finish() const
  {
    TrackerOutput out;
    for (const Slot& s : slots_) {
      if (s.track.points.size() >= cfg_.min_track_length) {
        out.tracks.push_back(s.track);
      }
    }
    return out;
  }

  std::vector<const Track*> tracks() const
  {
    std::vector<const Track*> out;
    for (const Slot& s : slots_) {
      out.push_back(&s.track);
    }
    return out;
  }

  const MotionModel& motion_of(std::size_t index) const { return *slots_.at(index).motion; }

  const TrackerConfig& config() const { return cfg_; }

private:
  struct Slot
  {
    Track track;
    std::unique_ptr<MotionModel> motion;
  };

  void spawn(int frame, const Detection& det)
  {
    Slot s;
    s.track.id = next_id_++;
    s.track.state = TrackState::Active;
    s.track.patience_left = cfg_.patience;
    s.track.points.push_back({frame, det.box, Provenance::Observed});
    const Centroid c = centroid_of(det.box);
    switch (cfg_.motion) {
      case MotionKind::None:
        s.motion = std::make_unique<StationaryMotion>(c);
        break;
      case MotionKind::ConstantVelocity:
        s.motion = std::make_unique<ConstantVelocityMotion>(c);
        break;
      case MotionKind::Kalman:
        s.motion = std::make_unique<KalmanMotion>(c, cfg_.kalman);
        break;
      case MotionKind::TrajE:
        s.motion = std::make_unique<TrajEMotion>(model_, cfg_.strategy, cfg_.beam_width, cfg_.bias,
                                                 c, mix_seed(seed_, static_cast<std::uint64_t>(s.track.id)));
        break;
    }
    slots_.push_back(std::move(s));
  }

  void recover(Slot& s, const Detection& det)
  {
    const Recovery r = s.motion->recover(centroid_of(det.box));
    if (!cfg_.occ_reconstruct || r.gap.empty()) {
      return;
    }
    const BoundingBox& before = s.track.last_observed().box;
    const BoundingBox coherence = box_from_centroid(r.expected, before.width, before.height);
    if (iou(coherence, det.box) < cfg_.iou_coherence_threshold) {
      return;
    }
    for (const GapPoint& g : r.gap) {
      s.track.points.push_back(
          {g.frame, box_from_centroid(g.centroid, det.box.width, det.box.height), Provenance::Estimated});
    }
  }

  TrackerConfig cfg_;
  std::shared_ptr<const rnn::Model> model_;
  std::uint64_t seed_;
  std::vector<Slot> slots_;
  int next_id_{1};
  int last_frame_{std::numeric_limits<int>::min()};
};

/// Runs the tracker over every frame in order. Frames missing from
/// `frames` are stepped as empty when `frame_count` covers them.
inline TrackerOutput run_sequence(const std::vector<FrameDetections>& frames,
                                  const TrackerConfig& cfg,
                                  std::shared_ptr<const rnn::Model> model, std::uint64_t seed,
                                  int frame_count = 0)
{
  Tracker tracker(cfg, std::move(model), seed);
  int last = frame_count;
  for (const auto& fd : frames) {
    last = std::max(last, fd.frame);
  }
  std::size_t next = 0;
  std::vector<FrameDetections> sorted = frames;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FrameDetections& a, const FrameDetections& b) { return a.frame < b.frame; });
  for (int f = 1; f <= last; ++f) {
    FrameDetections fd{f, {}};
    while (next < sorted.size() && sorted[next].frame == f) {
      fd.detections.insert(fd.detections.end(), sorted[next].detections.begin(),
                           sorted[next].detections.end());
      ++next;
    }
    tracker.step(fd);
  }
  return tracker.finish();
}

}  // namespace traje
