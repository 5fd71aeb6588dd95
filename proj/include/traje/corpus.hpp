// Training-corpus generation: windows of centroids sampled from
// ground-truth tracks, perturbed with detector-like noise, and converted to
// offset sequences. Also the on-disk corpus format.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "traje/core.hpp"
#include "traje/mdn.hpp"

namespace traje::data
{

inline constexpr int kDefaultSequenceLength = 100;
inline constexpr int kMinSequenceLength = 20;
inline constexpr double kDefaultNoiseSigma = 2.0;

struct GroundTruthTrack
{
  int object_id{0};
  int class_id{1};
  std::vector<TrackPoint> points;
  std::vector<double> visibility;
};

struct TrainingSequence
{
  std::vector<Centroid> centroids;
  std::vector<Offset> offsets;

  static TrainingSequence from_centroids(std::vector<Centroid> centroids)
  {
    TrainingSequence s;
    s.centroids = std::move(centroids);
    for (std::size_t i = 1; i < s.centroids.size(); ++i) {
      s.offsets.push_back(s.centroids[i] - s.centroids[i - 1]);
    }
    return s;
  }

  /// Network inputs: every offset but the last.
  std::span<const Offset> inputs() const { return {offsets.data(), offsets.size() - 1}; }
  /// Targets: every offset but the first, aligned with inputs().
  std::span<const Offset> targets() const { return {offsets.data() + 1, offsets.size() - 1}; }
};

struct TrainingSet
{
  std::vector<TrainingSequence> train;
  std::vector<TrainingSequence> val;
};

struct Window
{
  std::size_t track{0};
  std::size_t start{0};
  std::size_t length{0};

  friend bool operator==(const Window&, const Window&) = default;
  friend auto operator<=>(const Window&, const Window&) = default;
};

/// Every admissible (track, start) pair. Tracks of at least `length`
/// points give full windows; shorter tracks down to kMinSequenceLength
/// contribute one window spanning the whole track.
inline std::vector<Window> eligible_windows(const std::vector<GroundTruthTrack>& tracks,
                                            std::size_t length)
{
  std::vector<Window> out;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::size_t n = tracks[i].points.size();
    if (n >= length) {
      for (std::size_t s = 0; s + length <= n; ++s) {
        out.push_back({i, s, length});
      }
    } else if (n >= static_cast<std::size_t>(kMinSequenceLength)) {
      out.push_back({i, 0, n});
    }
  }
  return out;
}

/// Samples windows uniformly with replacement over eligible (track, start)
/// pairs. Validation windows are drawn first; training windows come from
/// the remaining pairs, so the two splits never share a window (unless the
/// pool holds a single window).
inline std::vector<Window> sample_windows(const std::vector<Window>& eligible, std::size_t n_train,
                                          std::size_t n_val, Rng& rng,
                                          std::vector<Window>* val_out = nullptr)
{
  if (eligible.empty()) {
    throw std::invalid_argument("no ground-truth track is long enough for a training window");
  }
  const std::size_t pool = eligible.size();
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);

  // At most half of the pool is reserved for validation.
  const std::size_t reserve_limit = pool / 2;
  std::vector<char> is_val(pool, 0);
  std::vector<std::size_t> reserved;
  std::vector<Window> val;
  val.reserve(n_val);
  for (std::size_t i = 0; i < n_val; ++i) {
    std::size_t idx = pick(rng);
    if (!is_val[idx]) {
      if (reserved.size() < reserve_limit) {
        is_val[idx] = 1;
        reserved.push_back(idx);
      } else if (!reserved.empty()) {
        std::uniform_int_distribution<std::size_t> again(0, reserved.size() - 1);
        idx = reserved[again(rng)];
      }
    }
    val.push_back(eligible[idx]);
  }

  std::vector<std::size_t> free;
  free.reserve(pool - reserved.size());
  for (std::size_t i = 0; i < pool; ++i) {
    if (!is_val[i]) {
      free.push_back(i);
    }
  }
  std::uniform_int_distribution<std::size_t> pick_free(0, free.size() - 1);
  std::vector<Window> train;
  train.reserve(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    train.push_back(eligible[free[pick_free(rng)]]);
  }
  if (val_out != nullptr) {
    *val_out = std::move(val);
  }
  return train;
}

inline TrainingSequence materialize(const GroundTruthTrack& track, const Window& w,
                                    double noise_sigma, Rng& rng)
{
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  std::vector<Centroid> centroids;
  centroids.reserve(w.length);
  for (std::size_t i = 0; i < w.length; ++i) {
    Centroid c = centroid_of(track.points[w.start + i].box);
    if (noise_sigma > 0.0) {
      c.x += noise(rng);
      c.y += noise(rng);
    }
    centroids.push_back(c);
  }
  return TrainingSequence::from_centroids(std::move(centroids));
}

inline TrainingSet generate_training_set(const std::vector<GroundTruthTrack>& tracks,
                                         std::size_t n_train, std::size_t n_val,
                                         std::size_t length, double noise_sigma,
                                         std::uint64_t seed)
{
  if (length < 3) {
    throw std::invalid_argument("sequence length must be at least 3");
  }
  if (noise_sigma < 0.0) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
  Rng rng(seed);
  const auto eligible = eligible_windows(tracks, length);
  std::vector<Window> val_windows;
  const auto train_windows = sample_windows(eligible, n_train, n_val, rng, &val_windows);

  TrainingSet set;
  set.train.reserve(train_windows.size());
  for (const Window& w : train_windows) {
    set.train.push_back(materialize(tracks[w.track], w, noise_sigma, rng));
  }
  for (const Window& w : val_windows) {
    set.val.push_back(materialize(tracks[w.track], w, noise_sigma, rng));
  }
  return set;
}

inline constexpr const char* kCorpusHeader = "traje-corpus v1";

/// One record per line: `<split> <n> x0 y0 x1 y1 ...`.
inline void save_corpus(const TrainingSet& set, const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write corpus file: " + path);
  }
  out << kCorpusHeader << '\n' << std::setprecision(17);
  auto write = [&](const char* split, const std::vector<TrainingSequence>& seqs) {
    for (const auto& s : seqs) {
      out << split << ' ' << s.centroids.size();
      for (const Centroid& c : s.centroids) {
        out << ' ' << c.x << ' ' << c.y;
      }
      out << '\n';
    }
  };
  write("train", set.train);
  write("val", set.val);
}

inline TrainingSet load_corpus(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read corpus file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCorpusHeader) {
    throw std::runtime_error("corpus file has an unknown or missing header: " + path);
  }
  TrainingSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string split;
    std::size_t n = 0;
    if (!(row >> split >> n) || (split != "train" && split != "val") || n < 3) {
      throw std::runtime_error("malformed corpus record at line " + std::to_string(line_no));
    }
    std::vector<Centroid> cs(n);
    for (auto& c : cs) {
      if (!(row >> c.x >> c.y)) {
        throw std::runtime_error("truncated corpus record at line " + std::to_string(line_no));
      }
    }
    auto seq = TrainingSequence::from_centroids(std::move(cs));
    (split == "train" ? set.train : set.val).push_back(std::move(seq));
  }
  return set;
}

}  // namespace traje::data
