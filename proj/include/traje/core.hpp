// Geometric and track-domain value types shared by every traje module.
//
// Boxes follow the MOTChallenge convention: (left, top, width, height) in
// continuous pixel coordinates, frames are 1-based. Nothing is rounded or
// clamped to the image.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace traje
{

struct BoundingBox
{
  double left{0.0};
  double top{0.0};
  double width{1.0};
  double height{1.0};

  bool valid() const
  {
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
           std::isfinite(height) && width > 0.0 && height > 0.0;
  }

  double area() const { return width * height; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Centroid
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Centroid&, const Centroid&) = default;
};

/// Displacement between two consecutive centroids; the network's input and target unit.
struct Offset
{
  double dx{0.0};
  double dy{0.0};

  friend bool operator==(const Offset&, const Offset&) = default;
};

inline Offset operator-(const Centroid& to, const Centroid& from)
{
  return {to.x - from.x, to.y - from.y};
}

inline Centroid operator+(const Centroid& c, const Offset& o)
{
  return {c.x + o.dx, c.y + o.dy};
}

inline Offset operator+(const Offset& a, const Offset& b)
{
  return {a.dx + b.dx, a.dy + b.dy};
}

struct Detection
{
  int frame{1};
  BoundingBox box;
  double confidence{1.0};

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class Provenance
{
  Observed,
  Estimated
};

struct TrackPoint
{
  int frame{1};
  BoundingBox box;
  Provenance provenance{Provenance::Observed};

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

enum class TrackState
{
  Active,
  Lost,
  Terminated
};

struct Track
{
  int id{0};
  TrackState state{TrackState::Active};
  int patience_left{0};
  std::vector<TrackPoint> points;
  std::optional<int> lost_since;

  const TrackPoint& last() const { return points.back(); }

  /// Last point carrying a real detection.
  const TrackPoint& last_observed() const
  {
    auto it = std::find_if(points.rbegin(), points.rend(), [](const TrackPoint& p) {
      return p.provenance == Provenance::Observed;
    });
    if (it == points.rend()) {
      throw std::logic_error("track has no observed point");
    }
    return *it;
  }

  friend bool operator==(const Track&, const Track&) = default;
};

struct SequenceInfo
{
  std::string name;
  int frame_count{0};
  int image_width{0};
  int image_height{0};
  double frame_rate{0.0};
};

inline Centroid centroid_of(const BoundingBox& box)
{
  return {box.left + box.width / 2.0, box.top + box.height / 2.0};
}

inline BoundingBox box_from_centroid(const Centroid& c, double width, double height)
{
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("box_from_centroid: width and height must be positive");
  }
  return {c.x - width / 2.0, c.y - height / 2.0, width, height};
}

inline double iou(const BoundingBox& a, const BoundingBox& b)
{
  const double a_right = a.left + a.width, a_bottom = a.top + a.height;
  const double b_right = b.left + b.width, b_bottom = b.top + b.height;
  const double ix = std::min(a_right, b_right) - std::max(a.left, b.left);
  const double iy = std::min(a_bottom, b_bottom) - std::max(a.top, b.top);
  if (ix <= 0.0 || iy <= 0.0) {
    return 0.0;
  }
  // Areas from the same rounded extents as the intersection, so iou(a, a) == 1.
  const double area_a = (a_right - a.left) * (a_bottom - a.top);
  const double area_b = (b_right - b.left) * (b_bottom - b.top);
  const double inter = ix * iy;
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

inline double l1_distance(const Centroid& a, const Centroid& b)
{
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

/// splitmix64 finaliser, used to derive independent per-track seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace traje
