// CLEAR-MOT (MOTA, FP, FN, IDSW, MT, ML) and IDF1.

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "traje/core.hpp"
#include "traje/corpus.hpp"
#include "traje/hungarian.hpp"
#include "traje/mot_io.hpp"

namespace traje::metrics
{

struct Annotation
{
  int frame{0};
  int id{0};
  BoundingBox box;
};

using AnnotationSet = std::vector<Annotation>;

inline AnnotationSet annotations_of(const std::vector<Track>& tracks)
{
  AnnotationSet out;
  for (const auto& t : tracks) {
    for (const auto& p : t.points) {
      out.push_back({p.frame, t.id, p.box});
    }
  }
  return out;
}

inline AnnotationSet annotations_of(const std::vector<data::GroundTruthTrack>& tracks)
{
  AnnotationSet out;
  for (const auto& t : tracks) {
    for (const auto& p : t.points) {
      out.push_back({p.frame, t.object_id, p.box});
    }
  }
  return out;
}

inline AnnotationSet annotations_of(const std::vector<data::GroundTruthRow>& rows)
{
  AnnotationSet out;
  for (const auto& r : rows) {
    out.push_back({r.frame, r.id, r.box});
  }
  return out;
}

struct EvalReport
{
  std::string name;
  double mota{0.0};
  double idf1{0.0};
  long idsw{0};
  long fp{0};
  long fn{0};
  /// Percentages of ground-truth tracks.
  double mt{0.0};
  double ml{0.0};
  long gt_count{0};

  // Raw counts kept for aggregation.
  long matches{0};
  long gt_tracks{0};
  long mt_tracks{0};
  long ml_tracks{0};
  long idtp{0};
  long idfp{0};
  long idfn{0};
};

namespace detail
{

using FrameMap = std::map<int, std::vector<const Annotation*>>;

inline FrameMap by_frame(const AnnotationSet& set)
{
  FrameMap out;
  for (const auto& a : set) {
    out[a.frame].push_back(&a);
  }
  return out;
}

inline double mota_of(long fn, long fp, long idsw, long gt)
{
  return gt > 0 ? 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt) : 0.0;
}

inline double idf1_of(long idtp, long idfp, long idfn)
{
  const long denom = 2 * idtp + idfp + idfn;
  return denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom) : 0.0;
}

}  // namespace detail

/// Per-frame matching with correspondence persistence: a pair matched in
/// the previous frame stays matched while its IoU is at least the
/// threshold, the rest go through Hungarian on 1 - IoU.
inline EvalReport evaluate_clear(const AnnotationSet& gt, const AnnotationSet& hyp,
                                 double iou_threshold = 0.5)
{
  EvalReport r;
  const auto gt_frames = detail::by_frame(gt);
  const auto hyp_frames = detail::by_frame(hyp);

  std::map<int, int> previous;      // gt id -> hyp id matched in the previous frame
  std::map<int, int> last_matched;  // gt id -> most recent hyp id, across gaps
  std::map<int, long> gt_length, gt_covered;

  std::vector<int> frames;
  for (const auto& [f, _] : gt_frames) {
    frames.push_back(f);
  }
  for (const auto& [f, _] : hyp_frames) {
    frames.push_back(f);
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  static const std::vector<const Annotation*> kNone;
  for (int f : frames) {
    const auto git = gt_frames.find(f);
    const auto hit = hyp_frames.find(f);
    const auto& g = git != gt_frames.end() ? git->second : kNone;
    const auto& h = hit != hyp_frames.end() ? hit->second : kNone;
    for (const auto* a : g) {
      ++gt_length[a->id];
    }

    std::vector<int> g_match(g.size(), -1);
    std::vector<char> h_used(h.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto p = previous.find(g[i]->id);
      if (p == previous.end()) {
        continue;
      }
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (!h_used[j] && h[j]->id == p->second && iou(g[i]->box, h[j]->box) >= iou_threshold) {
          g_match[i] = static_cast<int>(j);
          h_used[j] = 1;
          break;
        }
      }
    }

    std::vector<std::size_t> gi, hj;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g_match[i] < 0) {
        gi.push_back(i);
      }
    }
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (!h_used[j]) {
        hj.push_back(j);
      }
    }
    if (!gi.empty() && !hj.empty()) {
      Eigen::MatrixXd cost(gi.size(), hj.size());
      for (std::size_t a = 0; a < gi.size(); ++a) {
        for (std::size_t b = 0; b < hj.size(); ++b) {
          const double v = iou(g[gi[a]]->box, h[hj[b]]->box);
          cost(a, b) = v >= iou_threshold ? 1.0 - v : kForbiddenCost;
        }
      }
      const auto assign = hungarian(cost);
      for (std::size_t a = 0; a < gi.size(); ++a) {
        if (assign[a] >= 0 && cost(a, assign[a]) < kForbiddenCost) {
          g_match[gi[a]] = static_cast<int>(hj[assign[a]]);
          h_used[hj[assign[a]]] = 1;
        }
      }
    }

    previous.clear();
    long matched = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g_match[i] < 0) {
        continue;
      }
      ++matched;
      const int gid = g[i]->id, hid = h[g_match[i]]->id;
      const auto lm = last_matched.find(gid);
      if (lm != last_matched.end() && lm->second != hid) {
        ++r.idsw;
      }
      last_matched[gid] = hid;
      previous[gid] = hid;
      ++gt_covered[gid];
    }
    r.matches += matched;
    r.fn += static_cast<long>(g.size()) - matched;
    r.fp += static_cast<long>(h.size()) - matched;
    r.gt_count += static_cast<long>(g.size());
  }

  for (const auto& [id, len] : gt_length) {
    const double ratio = static_cast<double>(gt_covered[id]) / static_cast<double>(len);
    ++r.gt_tracks;
    if (ratio >= 0.8) {
      ++r.mt_tracks;
    } else if (ratio <= 0.2) {
      ++r.ml_tracks;
    }
  }
  r.mota = detail::mota_of(r.fn, r.fp, r.idsw, r.gt_count);
  r.mt = r.gt_tracks ? 100.0 * r.mt_tracks / r.gt_tracks : 0.0;
  r.ml = r.gt_tracks ? 100.0 * r.ml_tracks / r.gt_tracks : 0.0;
  return r;
}

struct IdentityCounts
{
  long idtp{0};
  long idfp{0};
  long idfn{0};
};

/// Global one-to-one matching of identities maximizing the number of
/// frames where the paired boxes overlap by at least the threshold.
inline IdentityCounts identity_counts(const AnnotationSet& gt, const AnnotationSet& hyp,
                                      double iou_threshold = 0.5)
{
  std::map<int, int> gidx, hidx;
  for (const auto& a : gt) {
    gidx.emplace(a.id, 0);
  }
  for (const auto& a : hyp) {
    hidx.emplace(a.id, 0);
  }
  int k = 0;
  for (auto& [id, i] : gidx) {
    i = k++;
  }
  k = 0;
  for (auto& [id, i] : hidx) {
    i = k++;
  }

  IdentityCounts c;
  const long n_gt = static_cast<long>(gt.size()), n_hyp = static_cast<long>(hyp.size());
  if (gidx.empty() || hidx.empty()) {
    c.idfn = n_gt;
    c.idfp = n_hyp;
    return c;
  }
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(gidx.size(), hidx.size());
  const auto gf = detail::by_frame(gt);
  const auto hf = detail::by_frame(hyp);
  for (const auto& [f, gs] : gf) {
    const auto it = hf.find(f);
    if (it == hf.end()) {
      continue;
    }
    for (const auto* a : gs) {
      for (const auto* b : it->second) {
        if (iou(a->box, b->box) >= iou_threshold) {
          overlap(gidx[a->id], hidx[b->id]) += 1.0;
        }
      }
    }
  }
  const auto assign = hungarian(-overlap);
  long idtp = 0;
  for (std::size_t i = 0; i < assign.size(); ++i) {
    if (assign[i] >= 0) {
      idtp += static_cast<long>(overlap(static_cast<Eigen::Index>(i), assign[i]));
    }
  }
  c.idtp = idtp;
  c.idfn = n_gt - idtp;
  c.idfp = n_hyp - idtp;
  return c;
}

inline double evaluate_idf1(const AnnotationSet& gt, const AnnotationSet& hyp,
                            double iou_threshold = 0.5)
{
  const IdentityCounts c = identity_counts(gt, hyp, iou_threshold);
  return detail::idf1_of(c.idtp, c.idfp, c.idfn);
}

inline EvalReport evaluate(const std::string& name, const AnnotationSet& gt,
                           const AnnotationSet& hyp, double iou_threshold = 0.5)
{
  EvalReport r = evaluate_clear(gt, hyp, iou_threshold);
  r.name = name;
  const IdentityCounts c = identity_counts(gt, hyp, iou_threshold);
  r.idtp = c.idtp;
  r.idfp = c.idfp;
  r.idfn = c.idfn;
  r.idf1 = detail::idf1_of(c.idtp, c.idfp, c.idfn);
  return r;
}

/// Sums counts and recomputes ratios from them.
inline EvalReport aggregate(const std::vector<EvalReport>& reports, const std::string& name = "OVERALL")
{
  EvalReport t;
  t.name = name;
  for (const auto& r : reports) {
    t.idsw += r.idsw;
    t.fp += r.fp;
    t.fn += r.fn;
    t.gt_count += r.gt_count;
    t.matches += r.matches;
    t.gt_tracks += r.gt_tracks;
    t.mt_tracks += r.mt_tracks;
    t.ml_tracks += r.ml_tracks;
    t.idtp += r.idtp;
    t.idfp += r.idfp;
    t.idfn += r.idfn;
  }
  t.mota = detail::mota_of(t.fn, t.fp, t.idsw, t.gt_count);
  t.idf1 = detail::idf1_of(t.idtp, t.idfp, t.idfn);
  t.mt = t.gt_tracks ? 100.0 * t.mt_tracks / t.gt_tracks : 0.0;
  t.ml = t.gt_tracks ? 100.0 * t.ml_tracks / t.gt_tracks : 0.0;
  return t;
}

inline constexpr const char* kReportHeader = "name,MOTA,IDF1,IDSW,FP,FN,MT,ML,GT";

inline std::string report_row(const EvalReport& r)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%ld,%ld,%ld,%.2f,%.2f,%ld", r.name.c_str(), r.mota,
                r.idf1, r.idsw, r.fp, r.fn, r.mt, r.ml, r.gt_count);
  return buf;
}

inline std::string report_csv(const std::vector<EvalReport>& reports)
{
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& r : reports) {
    out += report_row(r) + "\n";
  }
  out += report_row(aggregate(reports)) + "\n";
  return out;
}

}  // namespace traje::metrics
