// Synthetic tracking scenarios with analytic ground truth, plus random
// constant-velocity / turning motion used to build desk-scale corpora.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "traje/core.hpp"
#include "traje/corpus.hpp"
#include "traje/mdn.hpp"

namespace traje::data
{

struct FrameDetections
{
  int frame{1};
  std::vector<Detection> detections;
};

struct FrameInterval
{
  int first{0};
  int last{0};

  bool contains(int f) const { return f >= first && f <= last; }
};

/// One object moving with constant speed; its heading rotates by
/// `turn_rate` radians per frame (0 gives constant velocity).
struct ObjectPath
{
  int id{1};
  int first_frame{1};
  int last_frame{1};
  Centroid start;
  Offset velocity;
  double turn_rate{0.0};
  double width{40.0};
  double height{100.0};
  std::vector<FrameInterval> occlusions;

  bool occluded(int frame) const
  {
    for (const auto& o : occlusions) {
      if (o.contains(frame)) {
        return true;
      }
    }
    return false;
  }

  /// Centroids for first_frame..last_frame.
  std::vector<Centroid> centroids() const
  {
    std::vector<Centroid> out;
    Centroid c = start;
    for (int f = first_frame; f <= last_frame; ++f) {
      out.push_back(c);
      const double angle = turn_rate * (f - first_frame);
      const double cs = std::cos(angle), sn = std::sin(angle);
      c = c + Offset{cs * velocity.dx - sn * velocity.dy, sn * velocity.dx + cs * velocity.dy};
    }
    return out;
  }
};

struct Scenario
{
  std::string name;
  std::vector<ObjectPath> objects;
  double noise_sigma{0.0};
  int frame_count{1};
  int image_width{1920};
  int image_height{1080};

  void validate() const
  {
    if (frame_count < 1) {
      throw std::invalid_argument("scenario frame_count must be positive");
    }
    for (const auto& o : objects) {
      if (o.first_frame < 1 || o.last_frame > frame_count || o.first_frame > o.last_frame) {
        throw std::invalid_argument("scenario object frames outside the sequence");
      }
      for (const auto& occ : o.occlusions) {
        if (occ.first < 1 || occ.last > frame_count || occ.first > occ.last) {
          throw std::invalid_argument("occlusion window outside the sequence");
        }
      }
    }
  }
};

struct ScenarioData
{
  std::vector<GroundTruthTrack> ground_truth;
  /// One entry per frame 1..frame_count (possibly empty).
  std::vector<FrameDetections> detections;
  SequenceInfo info;
};

inline constexpr double kSimDetectionConfidence = 0.9;

inline ScenarioData generate_scenario(const Scenario& sc, std::uint64_t seed)
{
  sc.validate();
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  ScenarioData out;
  out.info = {sc.name, sc.frame_count, sc.image_width, sc.image_height, 30.0};
  out.detections.resize(static_cast<std::size_t>(sc.frame_count));
  for (int f = 1; f <= sc.frame_count; ++f) {
    out.detections[f - 1].frame = f;
  }

  // Frame-major order keeps detection noise independent of object order per frame.
  std::vector<std::vector<Centroid>> paths;
  for (const auto& obj : sc.objects) {
    paths.push_back(obj.centroids());
    GroundTruthTrack gt;
    gt.object_id = obj.id;
    gt.class_id = 1;
    for (int f = obj.first_frame; f <= obj.last_frame; ++f) {
      const Centroid& c = paths.back()[f - obj.first_frame];
      gt.points.push_back({f, box_from_centroid(c, obj.width, obj.height), Provenance::Observed});
      gt.visibility.push_back(obj.occluded(f) ? 0.0 : 1.0);
    }
    out.ground_truth.push_back(std::move(gt));
  }
  for (int f = 1; f <= sc.frame_count; ++f) {
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
      const auto& obj = sc.objects[i];
      if (f < obj.first_frame || f > obj.last_frame) {
        continue;
      }
      Centroid c = paths[i][f - obj.first_frame];
      const double nx = noise(rng), ny = noise(rng);
      if (obj.occluded(f)) {
        continue;
      }
      c.x += sc.noise_sigma * nx;
      c.y += sc.noise_sigma * ny;
      out.detections[f - 1].detections.push_back(
          {f, box_from_centroid(c, obj.width, obj.height), kSimDetectionConfidence});
    }
  }
  return out;
}

/// Preset scenarios: "cv", "turn", "cross" (two objects meeting at frame 20
/// while both are hidden for frames 18-22) and "occlusion" (one object,
/// visible 1-10, hidden 11-15, visible 16-40).
inline Scenario make_scenario(const std::string& kind, double noise_sigma)
{
  Scenario sc;
  sc.name = kind;
  sc.noise_sigma = noise_sigma;
  if (kind == "cv") {
    sc.frame_count = 60;
    sc.objects = {
        {1, 1, 60, {200, 200}, {8, 2}, 0.0, 40, 100, {}},
        {2, 5, 60, {300, 700}, {7, -3}, 0.0, 40, 100, {}},
        {3, 1, 50, {1500, 450}, {-9, 1}, 0.0, 50, 120, {}},
    };
  } else if (kind == "turn") {
    sc.frame_count = 60;
    sc.objects = {
        {1, 1, 60, {400, 300}, {10, 0}, 0.03, 40, 100, {}},
        {2, 1, 60, {1400, 800}, {-8, -3}, -0.025, 40, 100, {}},
    };
  } else if (kind == "cross") {
    sc.frame_count = 45;
    const Centroid meet{800, 500};
    const Offset v{10, 0};
    const int meet_frame = 20;
    const Centroid a_start{meet.x - v.dx * (meet_frame - 1), meet.y};
    const Centroid b_start{meet.x + v.dx * (meet_frame - 1), meet.y};
    sc.objects = {
        {1, 1, 45, a_start, v, 0.0, 40, 100, {{18, 22}}},
        {2, 1, 45, b_start, {-v.dx, -v.dy}, 0.0, 40, 100, {{18, 22}}},
    };
  } else if (kind == "occlusion") {
    sc.frame_count = 40;
    sc.objects = {{1, 1, 40, {300, 300}, {8, 6}, 0.0, 40, 100, {{11, 15}}}};
  } else {
    throw std::invalid_argument("unknown scenario: " + kind);
  }
  return sc;
}

/// Random constant-velocity and turning tracks of `length` frames with
/// speeds in [min_speed, max_speed] px/frame; every other track turns.
inline std::vector<GroundTruthTrack> random_motion_tracks(std::size_t count, int length,
                                                          std::uint64_t seed,
                                                          double min_speed = 6.0,
                                                          double max_speed = 16.0)
{
  Rng rng(seed);
  std::uniform_real_distribution<double> speed(min_speed, max_speed);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> turn(-0.04, 0.04);
  std::uniform_real_distribution<double> pos(0.0, 2000.0);

  std::vector<GroundTruthTrack> tracks;
  tracks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = speed(rng);
    const double h = heading(rng);
    ObjectPath path;
    path.id = static_cast<int>(i + 1);
    path.first_frame = 1;
    path.last_frame = length;
    path.start = {pos(rng), pos(rng)};
    path.velocity = {s * std::cos(h), s * std::sin(h)};
    const double tr = turn(rng);
    path.turn_rate = (i % 2 == 1) ? tr : 0.0;

    GroundTruthTrack gt;
    gt.object_id = path.id;
    int f = 1;
    for (const Centroid& c : path.centroids()) {
      gt.points.push_back({f++, box_from_centroid(c, path.width, path.height), Provenance::Observed});
      gt.visibility.push_back(1.0);
    }
    tracks.push_back(std::move(gt));
  }
  return tracks;
}

}  // namespace traje::data
