// Command-line front end. run() is the whole program minus main(), so the
// subcommands can be driven from tests with captured streams.
//
// Exit codes: 0 ok, 2 usage or input error, 3 numeric divergence.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <tuple>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "traje/corpus.hpp"
#include "traje/metrics.hpp"
#include "traje/model_io.hpp"
#include "traje/mot_io.hpp"
#include "traje/scenario.hpp"
#include "traje/sweep.hpp"
#include "traje/tracker.hpp"
#include "traje/train.hpp"

namespace traje::cli
{

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int
{
  kOk = 0,
  kInputError = 2,
  kDiverged = 3
};

/// Bad flag values or unusable inputs.
class InputError : public std::runtime_error
{
  using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail
{

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag)
{
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = data::detail::trim(item);
    if (item.empty()) {
      continue;
    }
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) {
      throw InputError(std::string(flag) + ": cannot parse '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline void require_file(const std::string& path, const char* what)
{
  if (!fs::is_regular_file(path)) {
    throw InputError(std::string(what) + " not found: " + path);
  }
}

inline void ensure_parent(const std::string& path)
{
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    fs::create_directories(parent);
  }
}

inline std::string sibling(const std::string& path, const std::string& suffix)
{
  return fs::path(path).replace_extension(suffix).string();
}

class Manifest
{
public:
  explicit Manifest(std::string subcommand) : start_(std::chrono::steady_clock::now())
  {
    doc_["subcommand"] = std::move(subcommand);
    doc_["tool_version"] = kVersion;
    doc_["params"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::object();
  }

  json& parameters() { return doc_["params"]; }
  void input(const std::string& key, const std::string& path) { doc_["inputs"][key] = path; }
  void output(const std::string& key, const std::string& path) { doc_["outputs"][key] = path; }
  void seed(std::uint64_t s) { doc_["seed"] = s; }

  void write(const std::string& path)
  {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc_["duration_s"] = secs;
    data::write_text(path, doc_.dump(2) + "\n");
  }

private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

inline std::vector<std::string> find_named(const std::string& dir, const std::string& name)
{
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == name) {
      out.push_back(e.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::shared_ptr<const rnn::Model> load_shared_model(const std::string& path)
{
  require_file(path, "model file");
  try {
    return std::make_shared<const rnn::Model>(rnn::load_model(path).model);
  } catch (const rnn::ModelLoadError& e) {
    throw InputError(e.what());
  }
}

/// Sequence name for a gt file laid out as <seq>/gt/gt.txt.
inline std::string sequence_name(const fs::path& gt_file)
{
  const fs::path parent = gt_file.parent_path();
  if (parent.filename() == "gt" && !parent.parent_path().filename().empty()) {
    return parent.parent_path().filename().string();
  }
  return gt_file.stem().string();
}

inline std::vector<FrameDetections> read_detections(const std::string& path, std::ostream& err)
{
  require_file(path, "detection file");
  auto file = data::parse_detections(path);
  for (const auto& w : file.warnings) {
    err << "warning: " << w << "\n";
  }
  return std::move(file.frames);
}

}  // namespace detail

struct GenDataOptions
{
  std::string gt_dir;
  int synthetic_tracks{0};
  std::string out;
  std::size_t num_train{20000};
  std::size_t num_val{2000};
  std::size_t seq_len{data::kDefaultSequenceLength};
  double noise_sigma{data::kDefaultNoiseSigma};
  std::string classes{"1"};
  std::uint64_t seed{0};
};

inline int gen_data(const GenDataOptions& o, std::ostream& out)
{
  detail::Manifest m("gen-data");
  std::vector<data::GroundTruthTrack> tracks;
  if (!o.gt_dir.empty()) {
    if (!fs::is_directory(o.gt_dir)) {
      throw InputError("ground-truth directory not found: " + o.gt_dir);
    }
    const auto classes = detail::parse_list<int>(o.classes, "--classes");
    const std::set<int> keep(classes.begin(), classes.end());
    for (const auto& f : detail::find_named(o.gt_dir, "gt.txt")) {
      const auto t = data::group_tracks(data::evaluation_rows(data::parse_ground_truth(f), keep));
      tracks.insert(tracks.end(), t.begin(), t.end());
    }
    if (tracks.empty()) {
      throw InputError("no gt.txt tracks found under " + o.gt_dir);
    }
    m.input("gt_dir", o.gt_dir);
  } else if (o.synthetic_tracks > 0) {
    tracks = data::random_motion_tracks(static_cast<std::size_t>(o.synthetic_tracks),
                                        static_cast<int>(o.seq_len), mix_seed(o.seed, 1));
  } else {
    throw InputError("gen-data needs --gt-dir or --synthetic");
  }
  data::TrainingSet set;
  try {
    set = data::generate_training_set(tracks, o.num_train, o.num_val, o.seq_len, o.noise_sigma, o.seed);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  detail::ensure_parent(o.out);
  data::save_corpus(set, o.out);

  m.seed(o.seed);
  m.parameters() = {{"synthetic_tracks", o.synthetic_tracks}, {"num_train", o.num_train},
                    {"num_val", o.num_val},                   {"seq_len", o.seq_len},
                    {"noise_sigma", o.noise_sigma},           {"classes", o.classes}};
  m.output("corpus", o.out);
  m.write(detail::sibling(o.out, ".manifest.json"));
  out << "wrote " << set.train.size() << " training and " << set.val.size()
      << " validation sequences from " << tracks.size() << " tracks to " << o.out << "\n";
  return kOk;
}

struct TrainOptions
{
  std::string data;
  int epochs{100};
  double lr{1e-3};
  double decay{0.1};
  std::string decay_epochs{"15,40,80"};
  int hidden{64};
  int mixtures{5};
  std::uint64_t seed{0};
  std::string out{"model.json"};
  std::string history;
};

inline int train(const TrainOptions& o, std::ostream& out, std::ostream& err)
{
  detail::require_file(o.data, "corpus file");
  detail::Manifest m("train");
  data::TrainingSet set;
  try {
    set = data::load_corpus(o.data);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  rnn::TrainConfig tc;
  tc.epochs = o.epochs;
  tc.learning_rate = o.lr;
  tc.decay_factor = o.decay;
  tc.decay_epochs = detail::parse_list<int>(o.decay_epochs, "--decay-epochs");
  tc.seed = o.seed;
  rnn::ModelConfig mc{2, o.hidden, o.mixtures};
  try {
    tc.validate();
    mc.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  const rnn::Model initial = rnn::make_model(mc, o.seed);
  rnn::TrainResult result;
  try {
    result = rnn::train(initial, set.train, set.val, tc, [&](const rnn::EpochStats& s) {
      err << "epoch " << s.epoch << " lr " << s.learning_rate << " train " << s.train_nll << " val "
          << s.val_nll << "\n";
    });
  } catch (const rnn::DivergenceError& e) {
    err << "error: " << e.what() << " (epoch " << e.epoch() << ")\n";
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  rnn::ModelFile file;
  file.model = {mc, result.params};
  file.rng_seed = o.seed;
  file.training_meta = {{"epochs", o.epochs},
                        {"learning_rate", o.lr},
                        {"decay", o.decay},
                        {"decay_epochs", tc.decay_epochs},
                        {"best_epoch", result.best_epoch},
                        {"best_val_nll", result.history[result.best_epoch].val_nll},
                        {"train_sequences", set.train.size()},
                        {"val_sequences", set.val.size()}};
  detail::ensure_parent(o.out);
  rnn::save_model(o.out, file);

  const std::string history = o.history.empty() ? detail::sibling(o.out, ".history.csv") : o.history;
  std::string csv = "epoch,learning_rate,train_nll,val_nll\n";
  for (const auto& s : result.history) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", s.epoch, s.learning_rate, s.train_nll,
                  s.val_nll);
    csv += buf;
  }
  data::write_text(history, csv);

  m.seed(o.seed);
  m.parameters() = {{"epochs", o.epochs},     {"lr", o.lr},         {"decay", o.decay},
                    {"decay_epochs", tc.decay_epochs}, {"hidden", o.hidden}, {"mixtures", o.mixtures}};
  m.input("data", o.data);
  m.output("model", o.out);
  m.output("history", history);
  m.write(detail::sibling(o.out, ".manifest.json"));
  out << "best epoch " << result.best_epoch << ", validation NLL "
      << result.history[result.best_epoch].val_nll << "; wrote " << o.out << "\n";
  return kOk;
}

struct TrackOptions
{
  std::string det;
  std::string model;
  std::string strategy{"pbs"};
  int beam{5};
  double bias{1.0};
  int patience{100};
  bool occ{false};
  double min_conf{0.4};
  double gate{1.0};
  int frames{0};
  std::uint64_t seed{0};
  std::string out{"res.txt"};
};

inline TrackerConfig tracker_config(const std::string& strategy, int beam, double bias, int patience,
                                    bool occ, double min_conf, double gate)
{
  TrackerConfig cfg;
  if (strategy == "none") {
    cfg.motion = MotionKind::None;
  } else if (strategy == "cv") {
    cfg.motion = MotionKind::ConstantVelocity;
  } else if (strategy == "kalman") {
    cfg.motion = MotionKind::Kalman;
  } else if (strategy == "bm" || strategy == "gbs" || strategy == "pbs") {
    cfg.motion = MotionKind::TrajE;
    cfg.strategy = parse_strategy(strategy);
  } else {
    throw InputError("unknown strategy: " + strategy);
  }
  cfg.beam_width = beam;
  cfg.bias = bias;
  cfg.patience = patience;
  cfg.occ_reconstruct = occ;
  cfg.detection_min_confidence = min_conf;
  cfg.association_gate = gate;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return cfg;
}

inline int track(const TrackOptions& o, std::ostream& out, std::ostream& err)
{
  detail::Manifest m("track");
  const TrackerConfig cfg =
      tracker_config(o.strategy, o.beam, o.bias, o.patience, o.occ, o.min_conf, o.gate);
  std::shared_ptr<const rnn::Model> model;
  if (cfg.motion == MotionKind::TrajE) {
    if (o.model.empty()) {
      throw InputError("--model is required for strategy " + o.strategy);
    }
    model = detail::load_shared_model(o.model);
    m.input("model", o.model);
  }
  const auto frames = detail::read_detections(o.det, err);
  const auto result = run_sequence(frames, cfg, model, o.seed, o.frames);
  detail::ensure_parent(o.out);
  data::emit_results(result.tracks, o.out);

  m.seed(o.seed);
  m.parameters() = {{"strategy", o.strategy}, {"beam", o.beam},         {"bias", o.bias},
                    {"patience", o.patience}, {"occ", o.occ},           {"min_conf", o.min_conf},
                    {"gate", o.gate},         {"frames", o.frames}};
  m.input("det", o.det);
  m.output("results", o.out);
  m.write(detail::sibling(o.out, ".manifest.json"));
  out << "wrote " << result.tracks.size() << " tracks to " << o.out << "\n";
  return kOk;
}

struct EvalOptions
{
  std::string gt;
  std::string res;
  double iou{0.5};
  std::string classes{"1"};
  std::string out;
};

inline int eval(const EvalOptions& o, std::ostream& out)
{
  detail::Manifest m("eval");
  const auto classes = detail::parse_list<int>(o.classes, "--classes");
  const std::set<int> keep(classes.begin(), classes.end());

  // (name, gt file, result file)
  std::vector<std::tuple<std::string, std::string, std::string>> jobs;
  if (fs::is_directory(o.gt)) {
    if (!fs::is_directory(o.res)) {
      throw InputError("--gt is a directory, so --res must be one too: " + o.res);
    }
    for (const auto& f : detail::find_named(o.gt, "gt.txt")) {
      const std::string name = detail::sequence_name(f);
      jobs.emplace_back(name, f, (fs::path(o.res) / (name + ".txt")).string());
    }
    if (jobs.empty()) {
      throw InputError("no gt.txt found under " + o.gt);
    }
  } else {
    jobs.emplace_back(detail::sequence_name(o.gt), o.gt, o.res);
  }

  std::vector<metrics::EvalReport> reports;
  for (const auto& [name, gt_file, res_file] : jobs) {
    detail::require_file(gt_file, "ground-truth file");
    detail::require_file(res_file, "result file");
    const auto gt = data::evaluation_rows(data::parse_ground_truth(gt_file), keep);
    const auto hyp = data::parse_ground_truth(res_file);
    reports.push_back(metrics::evaluate(name, metrics::annotations_of(gt), metrics::annotations_of(hyp), o.iou));
  }
  const std::string csv = metrics::report_csv(reports);
  if (!o.out.empty()) {
    detail::ensure_parent(o.out);
    data::write_text(o.out, csv);
    m.parameters() = {{"iou", o.iou}, {"classes", o.classes}};
    m.input("gt", o.gt);
    m.input("res", o.res);
    m.output("report", o.out);
    m.write(detail::sibling(o.out, ".manifest.json"));
  }
  out << csv;
  return kOk;
}

struct SimOptions
{
  std::string scenario;
  double noise{2.0};
  std::uint64_t seed{0};
  std::string out_dir;
};

inline int sim(const SimOptions& o, std::ostream& out)
{
  detail::Manifest m("sim");
  data::Scenario sc;
  try {
    sc = data::make_scenario(o.scenario, o.noise);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto sd = data::generate_scenario(sc, o.seed);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "det");
  data::write_text((dir / "gt" / "gt.txt").string(), data::format_ground_truth(sd.ground_truth));
  data::write_text((dir / "det" / "det.txt").string(), data::format_detections(sd.detections));
  data::write_seqinfo(sd.info, (dir / "seqinfo.ini").string());

  m.seed(o.seed);
  m.parameters() = {{"scenario", o.scenario}, {"noise", o.noise}};
  m.output("gt", (dir / "gt" / "gt.txt").string());
  m.output("det", (dir / "det" / "det.txt").string());
  m.output("seqinfo", (dir / "seqinfo.ini").string());
  m.write((dir / "manifest.json").string());
  out << "wrote scenario '" << o.scenario << "' (" << sc.frame_count << " frames, "
      << sc.objects.size() << " objects) to " << o.out_dir << "\n";
  return kOk;
}

struct SweepOptions
{
  std::string det;
  std::string gt;
  std::string model;
  std::string strategies{"bm,gbs,pbs"};
  std::string bias_list{"0,0.1,0.5,1,5,10"};
  std::string beam_list{"1,5,10"};
  int runs{5};
  int patience{100};
  bool occ{false};
  double min_conf{0.4};
  double gate{1.0};
  int frames{0};
  std::uint64_t seed{0};
  std::string out_dir;
};

inline unsigned sweep_threads()
{
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRAJE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) {
        n = std::min(n, static_cast<unsigned>(cap));
      }
    } catch (const std::exception&) {
    }
  }
  return n;
}

inline int sweep(const SweepOptions& o, std::ostream& out, std::ostream& err)
{
  detail::Manifest m("sweep");
  SweepGrid grid;
  grid.strategies.clear();
  for (const auto& s : detail::parse_list<std::string>(o.strategies, "--strategies")) {
    try {
      grid.strategies.push_back(parse_strategy(s));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  grid.biases = detail::parse_list<double>(o.bias_list, "--bias-list");
  grid.beams = detail::parse_list<int>(o.beam_list, "--beam-list");
  grid.runs = o.runs;
  if (grid.strategies.empty() || grid.biases.empty() || grid.beams.empty()) {
    throw InputError("sweep needs non-empty --strategies, --bias-list and --beam-list");
  }
  if (grid.runs < 1) {
    throw InputError("--runs must be >= 1");
  }
  for (double b : grid.biases) {
    tracker_config("pbs", 1, b, o.patience, o.occ, o.min_conf, o.gate);
  }
  for (int w : grid.beams) {
    tracker_config("pbs", w, 1.0, o.patience, o.occ, o.min_conf, o.gate);
  }
  const TrackerConfig base = tracker_config("pbs", 1, 1.0, o.patience, o.occ, o.min_conf, o.gate);

  const auto model = detail::load_shared_model(o.model);
  const auto frames = detail::read_detections(o.det, err);
  detail::require_file(o.gt, "ground-truth file");
  const auto gt = metrics::annotations_of(data::evaluation_rows(data::parse_ground_truth(o.gt)));

  const unsigned threads = sweep_threads();
  const auto rows = run_sweep(frames, gt, o.frames, model, base, grid, o.seed, threads);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  data::write_text((dir / "sweep.csv").string(), sweep_csv(rows));
  for (const char* metric : {"MOTA", "IDF1", "IDSW"}) {
    std::string lower(metric);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    const auto path = dir / (lower + ".svg");
    data::write_text(path.string(), sweep_svg(rows, grid, metric));
    m.output(std::string("svg_") + lower, path.string());
  }

  m.seed(o.seed);
  m.parameters() = {{"strategies", o.strategies}, {"bias_list", o.bias_list},
                    {"beam_list", o.beam_list},   {"runs", o.runs},
                    {"patience", o.patience},     {"occ", o.occ},
                    {"min_conf", o.min_conf},     {"gate", o.gate},
                    {"frames", o.frames},         {"threads", threads}};
  m.input("det", o.det);
  m.input("gt", o.gt);
  m.input("model", o.model);
  m.output("csv", (dir / "sweep.csv").string());
  m.write((dir / "manifest.json").string());
  out << "wrote " << rows.size() << " sweep rows to " << (dir / "sweep.csv").string() << "\n";
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr)
{
  CLI::App app{"traje: multi-object tracking with a recurrent trajectory estimator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenDataOptions g;
  auto* gen = app.add_subcommand("gen-data", "Sample a training corpus from ground-truth tracks");
  gen->add_option("--gt-dir", g.gt_dir, "Directory searched recursively for gt.txt files");
  gen->add_option("--synthetic", g.synthetic_tracks,
                  "Use N random constant-velocity / turning tracks instead of --gt-dir");
  gen->add_option("--out", g.out, "Corpus file")->required();
  gen->add_option("--num-train", g.num_train)->capture_default_str();
  gen->add_option("--num-val", g.num_val)->capture_default_str();
  gen->add_option("--seq-len", g.seq_len)->capture_default_str();
  gen->add_option("--noise-sigma", g.noise_sigma)->capture_default_str();
  gen->add_option("--classes", g.classes, "Comma-separated gt classes to keep")->capture_default_str();
  gen->add_option("--seed", g.seed)->capture_default_str();

  TrainOptions t;
  auto* tr = app.add_subcommand("train", "Train the trajectory model");
  tr->add_option("--data", t.data, "Corpus file from gen-data")->required();
  tr->add_option("--epochs", t.epochs)->capture_default_str();
  tr->add_option("--lr", t.lr)->capture_default_str();
  tr->add_option("--decay", t.decay)->capture_default_str();
  tr->add_option("--decay-epochs", t.decay_epochs)->capture_default_str();
  tr->add_option("--hidden", t.hidden)->capture_default_str();
  tr->add_option("--mixtures", t.mixtures)->capture_default_str();
  tr->add_option("--seed", t.seed)->capture_default_str();
  tr->add_option("--out", t.out)->capture_default_str();
  tr->add_option("--history", t.history, "Training history CSV (default: next to --out)");

  TrackOptions k;
  auto* tk = app.add_subcommand("track", "Track a detection file");
  tk->add_option("--det", k.det, "MOT det.txt")->required();
  tk->add_option("--model", k.model, "Model file (bm, gbs, pbs)");
  tk->add_option("--strategy", k.strategy, "bm|gbs|pbs|kalman|cv|none")->capture_default_str();
  tk->add_option("--beam", k.beam)->capture_default_str();
  tk->add_option("--bias", k.bias)->capture_default_str();
  tk->add_option("--patience", k.patience)->capture_default_str();
  tk->add_flag("--occ", k.occ, "Reconstruct occluded gaps");
  tk->add_option("--min-conf", k.min_conf)->capture_default_str();
  tk->add_option("--gate", k.gate, "Association gate as a multiple of the mean box side")
      ->capture_default_str();
  tk->add_option("--frames", k.frames, "Sequence length (steps trailing empty frames)");
  tk->add_option("--seed", k.seed)->capture_default_str();
  tk->add_option("--out", k.out)->capture_default_str();

  EvalOptions e;
  auto* ev = app.add_subcommand("eval", "CLEAR-MOT and IDF1 evaluation");
  ev->add_option("--gt", e.gt, "gt.txt, or a directory of <seq>/gt/gt.txt")->required();
  ev->add_option("--res", e.res, "Result file, or a directory of <seq>.txt")->required();
  ev->add_option("--iou", e.iou)->capture_default_str();
  ev->add_option("--classes", e.classes)->capture_default_str();
  ev->add_option("--out", e.out, "Report CSV");

  SimOptions s;
  auto* si = app.add_subcommand("sim", "Write a synthetic scenario in MOT layout");
  si->add_option("--scenario", s.scenario, "cv|turn|cross|occlusion")->required();
  si->add_option("--noise", s.noise)->capture_default_str();
  si->add_option("--seed", s.seed)->capture_default_str();
  si->add_option("--out-dir", s.out_dir)->required();

  SweepOptions w;
  auto* sw = app.add_subcommand("sweep", "Track and evaluate over a bias / beam grid");
  sw->add_option("--det", w.det)->required();
  sw->add_option("--gt", w.gt)->required();
  sw->add_option("--model", w.model)->required();
  sw->add_option("--strategies", w.strategies)->capture_default_str();
  sw->add_option("--bias-list", w.bias_list)->capture_default_str();
  sw->add_option("--beam-list", w.beam_list)->capture_default_str();
  sw->add_option("--runs", w.runs)->capture_default_str();
  sw->add_option("--patience", w.patience)->capture_default_str();
  sw->add_flag("--occ", w.occ);
  sw->add_option("--min-conf", w.min_conf)->capture_default_str();
  sw->add_option("--gate", w.gate)->capture_default_str();
  sw->add_option("--frames", w.frames);
  sw->add_option("--seed", w.seed)->capture_default_str();
  sw->add_option("--out-dir", w.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*gen) {
      return gen_data(g, out);
    }
    if (*tr) {
      return train(t, out, err);
    }
    if (*tk) {
      return track(k, out, err);
    }
    if (*ev) {
      return eval(e, out);
    }
    if (*si) {
      return sim(s, out);
    }
    if (*sw) {
      return sweep(w, out, err);
    }
  } catch (const rnn::DivergenceError& d) {
    err << "error: " << d.what() << "\n";
    return kDiverged;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace traje::cli
