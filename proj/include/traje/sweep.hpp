// Parameter grid over (strategy, bias, beam width, run): track + evaluate
// per cell, optionally on several worker threads.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "traje/metrics.hpp"
#include "traje/svg.hpp"
#include "traje/tracker.hpp"

namespace traje
{

struct SweepGrid
{
  std::vector<Strategy> strategies{Strategy::BM, Strategy::GBS, Strategy::PBS};
  std::vector<double> biases{0, 0.1, 0.5, 1, 5, 10};
  std::vector<int> beams{1, 5, 10};
  int runs{5};

  std::size_t size() const { return strategies.size() * biases.size() * beams.size() * runs; }
};

struct SweepRow
{
  Strategy strategy{Strategy::PBS};
  double bias{0.0};
  int beam{1};
  int run{0};
  double mota{0.0};
  double idf1{0.0};
  long idsw{0};
};

/// Rows in grid order: strategy, then bias, then beam, then run.
inline std::vector<SweepRow> run_sweep(const std::vector<FrameDetections>& frames,
                                       const metrics::AnnotationSet& gt, int frame_count,
                                       std::shared_ptr<const rnn::Model> model,
                                       const TrackerConfig& base, const SweepGrid& grid,
                                       std::uint64_t seed, unsigned threads = 1)
{
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (Strategy s : grid.strategies) {
    for (double b : grid.biases) {
      for (int w : grid.beams) {
        for (int r = 0; r < grid.runs; ++r) {
          rows.push_back({s, b, w, r, 0.0, 0.0, 0});
        }
      }
    }
  }

  auto cell = [&](SweepRow& row) {
    TrackerConfig cfg = base;
    cfg.motion = MotionKind::TrajE;
    cfg.strategy = row.strategy;
    cfg.bias = row.bias;
    cfg.beam_width = row.beam;
    const auto out =
        run_sequence(frames, cfg, model, mix_seed(seed, static_cast<std::uint64_t>(row.run)), frame_count);
    const auto report = metrics::evaluate("", gt, metrics::annotations_of(out.tracks));
    row.mota = report.mota;
    row.idf1 = report.idf1;
    row.idsw = report.idsw;
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        cell(rows[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows)
{
  std::string out = "strategy,bias,beam,run,MOTA,IDF1,IDSW\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%d,%d,%.6f,%.6f,%ld\n", to_string(r.strategy).c_str(),
                  r.bias, r.beam, r.run, r.mota, r.idf1, r.idsw);
    out += buf;
  }
  return out;
}

/// One panel per strategy, one series per beam width over the bias axis.
inline std::string sweep_svg(const std::vector<SweepRow>& rows, const SweepGrid& grid,
                             const std::string& metric)
{
  auto value = [&](const SweepRow& r) {
    if (metric == "MOTA") {
      return r.mota;
    }
    if (metric == "IDF1") {
      return r.idf1;
    }
    return static_cast<double>(r.idsw);
  };
  std::vector<std::string> ticks;
  for (double b : grid.biases) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", b);
    ticks.emplace_back(buf);
  }
  std::vector<svg::Panel> panels;
  for (Strategy s : grid.strategies) {
    svg::Panel panel{to_string(s), {}};
    for (int w : grid.beams) {
      svg::Series series{"B=" + std::to_string(w), {}, {}, {}};
      for (double b : grid.biases) {
        double sum = 0.0, lo = 0.0, hi = 0.0;
        int n = 0;
        for (const auto& r : rows) {
          if (r.strategy == s && r.bias == b && r.beam == w) {
            const double v = value(r);
            lo = n == 0 ? v : std::min(lo, v);
            hi = n == 0 ? v : std::max(hi, v);
            sum += v;
            ++n;
          }
        }
        series.mean.push_back(n ? sum / n : 0.0);
        series.lo.push_back(lo);
        series.hi.push_back(hi);
      }
      panel.series.push_back(std::move(series));
    }
    panels.push_back(std::move(panel));
  }
  return svg::line_chart(metric + " vs bias", "bias", metric, ticks, panels);
}

}  // namespace traje
