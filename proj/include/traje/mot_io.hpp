// MOTChallenge text formats: det.txt, gt.txt, seqinfo.ini and result files.

#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "traje/core.hpp"
#include "traje/corpus.hpp"
#include "traje/scenario.hpp"

namespace traje::data
{

class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line)
  {
  }

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct DetectionFile
{
  /// Sorted by frame; only frames that have at least one row.
  std::vector<FrameDetections> frames;
  std::vector<std::string> warnings;
};

/// One gt.txt row as written, before any filtering.
struct GroundTruthRow
{
  int frame{0};
  int id{0};
  BoundingBox box;
  double flag{1.0};
  int class_id{-1};
  double visibility{1.0};
};

namespace detail
{

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> split_numbers(const std::string& line, const std::string& path,
                                         std::size_t line_no)
{
  std::vector<double> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') {
      ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last) {
      throw ParseError(path, line_no, "unparsable field '" + field + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline std::ifstream open_input(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  return in;
}

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline DetectionFile parse_detections(const std::string& path)
{
  auto in = detail::open_input(path);
  DetectionFile out;
  std::map<int, std::vector<Detection>> by_frame;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto v = detail::split_numbers(line, path, line_no);
    if (v.size() < 7) {
      throw ParseError(path, line_no, "expected at least 7 fields, got " + std::to_string(v.size()));
    }
    Detection d{static_cast<int>(v[0]), {v[2], v[3], v[4], v[5]}, v[6]};
    if (!(d.box.width > 0.0) || !(d.box.height > 0.0)) {
      out.warnings.push_back(path + ":" + std::to_string(line_no) +
                             ": rejected detection with non-positive width or height");
      continue;
    }
    by_frame[d.frame].push_back(d);
  }
  for (auto& [f, dets] : by_frame) {
    out.frames.push_back({f, std::move(dets)});
  }
  return out;
}

inline std::vector<GroundTruthRow> parse_ground_truth(const std::string& path)
{
  auto in = detail::open_input(path);
  std::vector<GroundTruthRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto v = detail::split_numbers(line, path, line_no);
    if (v.size() < 6) {
      throw ParseError(path, line_no, "expected at least 6 fields, got " + std::to_string(v.size()));
    }
    GroundTruthRow r;
    r.frame = static_cast<int>(v[0]);
    r.id = static_cast<int>(v[1]);
    r.box = {v[2], v[3], v[4], v[5]};
    if (v.size() > 6) {
      r.flag = v[6];
    }
    if (v.size() > 7) {
      r.class_id = static_cast<int>(v[7]);
    }
    if (v.size() > 8) {
      r.visibility = v[8];
    }
    rows.push_back(r);
  }
  return rows;
}

/// Rows that take part in evaluation: flag != 0 and a class in `classes`.
/// Rows without a class column (result files) are always kept.
inline std::vector<GroundTruthRow> evaluation_rows(const std::vector<GroundTruthRow>& rows,
                                                   const std::set<int>& classes = {1})
{
  std::vector<GroundTruthRow> out;
  for (const auto& r : rows) {
    if (r.flag == 0.0) {
      continue;
    }
    if (r.class_id >= 0 && !classes.empty() && !classes.count(r.class_id)) {
      continue;
    }
    out.push_back(r);
  }
  return out;
}

/// Groups rows by id into tracks with strictly increasing frames.
inline std::vector<GroundTruthTrack> group_tracks(const std::vector<GroundTruthRow>& rows)
{
  std::map<int, std::vector<GroundTruthRow>> by_id;
  for (const auto& r : rows) {
    by_id[r.id].push_back(r);
  }
  std::vector<GroundTruthTrack> out;
  for (auto& [id, rs] : by_id) {
    std::stable_sort(rs.begin(), rs.end(),
                     [](const GroundTruthRow& a, const GroundTruthRow& b) { return a.frame < b.frame; });
    GroundTruthTrack t;
    t.object_id = id;
    t.class_id = rs.front().class_id;
    for (const auto& r : rs) {
      if (!t.points.empty() && t.points.back().frame == r.frame) {
        continue;
      }
      t.points.push_back({r.frame, r.box, Provenance::Observed});
      t.visibility.push_back(r.visibility);
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline SequenceInfo parse_seqinfo(const std::string& path)
{
  auto in = detail::open_input(path);
  std::map<std::string, std::string> kv;
  std::string line, section;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') {
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (section == "Sequence" && eq != std::string::npos) {
      kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::runtime_error(path + ": missing key '" + key + "' in [Sequence]");
    }
    return it->second;
  };
  auto number = [&](const std::string& key) {
    const std::string& s = get(key);
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": key '" + key + "' is not a number: " + s);
    }
  };
  SequenceInfo info;
  info.name = kv.count("name") ? kv["name"] : "";
  info.image_width = static_cast<int>(number("imWidth"));
  info.image_height = static_cast<int>(number("imHeight"));
  info.frame_rate = number("frameRate");
  info.frame_count = static_cast<int>(number("seqLength"));
  return info;
}

inline void write_seqinfo(const SequenceInfo& info, const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "[Sequence]\nname=" << info.name << "\nframeRate=" << detail::fmt(info.frame_rate)
      << "\nseqLength=" << info.frame_count << "\nimWidth=" << info.image_width
      << "\nimHeight=" << info.image_height << "\nimExt=.jpg\n";
}

inline std::string format_results(const std::vector<Track>& tracks)
{
  struct Row
  {
    int frame, id;
    BoundingBox box;
  };
  std::vector<Row> rows;
  for (const Track& t : tracks) {
    for (const TrackPoint& p : t.points) {
      rows.push_back({p.frame, t.id, p.box});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  for (const Row& r : rows) {
    out += std::to_string(r.frame) + "," + std::to_string(r.id) + "," + detail::fmt(r.box.left) +
           "," + detail::fmt(r.box.top) + "," + detail::fmt(r.box.width) + "," +
           detail::fmt(r.box.height) + ",1,-1,-1,-1\n";
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed writing " + path);
  }
}

inline void emit_results(const std::vector<Track>& tracks, const std::string& path)
{
  write_text(path, format_results(tracks));
}

inline std::string format_detections(const std::vector<FrameDetections>& frames)
{
  std::string out;
  for (const auto& fd : frames) {
    for (const Detection& d : fd.detections) {
      out += std::to_string(fd.frame) + ",-1," + detail::fmt(d.box.left) + "," +
             detail::fmt(d.box.top) + "," + detail::fmt(d.box.width) + "," +
             detail::fmt(d.box.height) + "," + detail::fmt(d.confidence) + ",-1,-1,-1\n";
    }
  }
  return out;
}

inline std::string format_ground_truth(const std::vector<GroundTruthTrack>& tracks)
{
  struct Row
  {
    int frame, id, cls;
    BoundingBox box;
    double vis;
  };
  std::vector<Row> rows;
  for (const auto& t : tracks) {
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const double vis = i < t.visibility.size() ? t.visibility[i] : 1.0;
      rows.push_back({t.points[i].frame, t.object_id, t.class_id, t.points[i].box, vis});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  for (const Row& r : rows) {
    out += std::to_string(r.frame) + "," + std::to_string(r.id) + "," + detail::fmt(r.box.left) +
           "," + detail::fmt(r.box.top) + "," + detail::fmt(r.box.width) + "," +
           detail::fmt(r.box.height) + ",1," + std::to_string(r.cls) + "," + detail::fmt(r.vis) +
           "\n";
  }
  return out;
}

/// Result rows back into tracks (id -> points in frame order).
inline std::vector<Track> tracks_from_rows(const std::vector<GroundTruthRow>& rows)
{
  std::vector<Track> out;
  for (const auto& g : group_tracks(rows)) {
    Track t;
    t.id = g.object_id;
    t.state = TrackState::Terminated;
    t.points = g.points;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace traje::data
