#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "traje/corpus.hpp"
#include "traje/mot_io.hpp"
#include "traje/scenario.hpp"

using namespace traje;
using namespace traje::data;
namespace fs = std::filesystem;

namespace
{

class TempDir : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("traje_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text)
  {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  fs::path dir_;
};

GroundTruthTrack straight_track(int id, int length, Centroid start, Offset v)
{
  GroundTruthTrack t;
  t.object_id = id;
  Centroid c = start;
  for (int f = 1; f <= length; ++f) {
    t.points.push_back({f, box_from_centroid(c, 40, 100), Provenance::Observed});
    t.visibility.push_back(1.0);
    c = c + v;
  }
  return t;
}

}  // namespace

using MotFiles = TempDir;

TEST_F(MotFiles, ParsesDetectionRow)
{
  const auto file = parse_detections(write("det.txt", "1,-1,100,200,50,80,0.9\n"));
  ASSERT_EQ(file.frames.size(), 1u);
  ASSERT_EQ(file.frames[0].detections.size(), 1u);
  const Detection& d = file.frames[0].detections[0];
  EXPECT_EQ(d.frame, 1);
  EXPECT_EQ(d.box, (BoundingBox{100, 200, 50, 80}));
  EXPECT_DOUBLE_EQ(d.confidence, 0.9);
}

TEST_F(MotFiles, RejectsDegenerateBoxesWithRowNumber)
{
  const auto file = parse_detections(write("det.txt", "1,-1,0,0,10,10,0.9\n2,-1,0,0,0,10,0.9\n"));
  ASSERT_EQ(file.frames.size(), 1u);
  ASSERT_EQ(file.warnings.size(), 1u);
  EXPECT_NE(file.warnings[0].find(":2:"), std::string::npos);
}

TEST_F(MotFiles, UnparsableRowReportsLine)
{
  const auto path = write("det.txt", "1,-1,0,0,10,10,0.9\n\n3,-1,abc,0,10,10,0.9\n");
  try {
    parse_detections(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST_F(MotFiles, EmptyFileIsEmptyResult)
{
  EXPECT_TRUE(parse_detections(write("det.txt", "")).frames.empty());
}

TEST_F(MotFiles, MissingFileThrows)
{
  EXPECT_THROW(parse_detections((dir_ / "nope.txt").string()), std::runtime_error);
}

TEST_F(MotFiles, NonContiguousFramesSorted)
{
  const auto file = parse_detections(write("det.txt", "7,-1,0,0,1,1,1\n2,-1,0,0,1,1,1\n7,-1,5,5,1,1,1\n"));
  ASSERT_EQ(file.frames.size(), 2u);
  EXPECT_EQ(file.frames[0].frame, 2);
  EXPECT_EQ(file.frames[1].frame, 7);
  EXPECT_EQ(file.frames[1].detections.size(), 2u);
}

TEST_F(MotFiles, DetectionRoundTrip)
{
  const auto sd = generate_scenario(make_scenario("turn", 2.0), 3);
  std::vector<FrameDetections> nonempty;
  for (const auto& fd : sd.detections) {
    if (!fd.detections.empty()) {
      nonempty.push_back(fd);
    }
  }
  const auto back = parse_detections(write("det.txt", format_detections(nonempty)));
  ASSERT_EQ(back.frames.size(), nonempty.size());
  for (std::size_t i = 0; i < nonempty.size(); ++i) {
    EXPECT_EQ(back.frames[i].frame, nonempty[i].frame);
    EXPECT_EQ(back.frames[i].detections, nonempty[i].detections);
  }
}

TEST_F(MotFiles, ResultRowsSortedAndRoundTrip)
{
  Track a{2, TrackState::Active, 0, {{1, {0.1, 0.2, 10, 20}}, {2, {1.5, 2, 10, 20}}, {3, {3, 4, 10, 20}}}, {}};
  Track b{1, TrackState::Active, 0, {{2, {100, 100, 5, 5}}, {3, {101, 101, 5, 5}}}, {}};
  const std::string text = format_results({a, b});
  EXPECT_EQ(text,
            "1,2,0.1,0.2,10,20,1,-1,-1,-1\n"
            "2,1,100,100,5,5,1,-1,-1,-1\n"
            "2,2,1.5,2,10,20,1,-1,-1,-1\n"
            "3,1,101,101,5,5,1,-1,-1,-1\n"
            "3,2,3,4,10,20,1,-1,-1,-1\n");
  const auto path = (dir_ / "res.txt").string();
  emit_results({a, b}, path);
  const auto back = tracks_from_rows(parse_ground_truth(path));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].points, b.points);
  EXPECT_EQ(back[1].points, a.points);
}

TEST_F(MotFiles, GroundTruthFlagAndClassFilter)
{
  const auto rows = parse_ground_truth(write("gt.txt",
                                             "1,1,0,0,10,10,1,1,1\n"
                                             "1,2,0,0,10,10,0,1,1\n"
                                             "1,3,0,0,10,10,1,3,0.5\n"));
  EXPECT_EQ(rows.size(), 3u);
  const auto eval = evaluation_rows(rows);
  ASSERT_EQ(eval.size(), 1u);
  EXPECT_EQ(eval[0].id, 1);
  EXPECT_EQ(evaluation_rows(rows, {1, 3}).size(), 2u);
  EXPECT_DOUBLE_EQ(rows[2].visibility, 0.5);
}

TEST_F(MotFiles, SeqinfoParsedAndMissingKeyNamed)
{
  const auto info = parse_seqinfo(write("seqinfo.ini",
                                        "[Sequence]\nname=MOT17-02\nimDir=img1\nframeRate=30\n"
                                        "seqLength=600\nimWidth=1920\nimHeight=1080\nimExt=.jpg\n"));
  EXPECT_EQ(info.name, "MOT17-02");
  EXPECT_EQ(info.frame_count, 600);
  EXPECT_EQ(info.image_width, 1920);
  EXPECT_EQ(info.image_height, 1080);
  EXPECT_DOUBLE_EQ(info.frame_rate, 30.0);

  const auto bad = write("bad.ini", "[Sequence]\nframeRate=30\nseqLength=600\nimWidth=1920\n");
  try {
    parse_seqinfo(bad);
    FAIL() << "expected error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("imHeight"), std::string::npos);
  }
}

TEST(TrainingSet, OffsetsReconstructCentroids)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 150, {0, 0}, {3, 1})};
  const auto set = generate_training_set(tracks, 20, 5, 100, 2.0, 1);
  for (const auto& s : set.train) {
    ASSERT_EQ(s.centroids.size(), 100u);
    ASSERT_EQ(s.offsets.size(), 99u);
    Centroid c = s.centroids[0];
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      c = c + s.offsets[i];
      EXPECT_NEAR(c.x, s.centroids[i + 1].x, 1e-9);
      EXPECT_NEAR(c.y, s.centroids[i + 1].y, 1e-9);
    }
  }
}

TEST(TrainingSet, ZeroNoiseStaysOnPath)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 120, {10, 20}, {2, -1})};
  const auto set = generate_training_set(tracks, 10, 2, 100, 0.0, 3);
  for (const auto& s : set.train) {
    for (const auto& o : s.offsets) {
      EXPECT_NEAR(o.dx, 2.0, 1e-12);
      EXPECT_NEAR(o.dy, -1.0, 1e-12);
    }
  }
}

TEST(TrainingSet, NoiseMagnitudeMatchesHalfNormalMean)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 100, {0, 0}, {1, 0})};
  const auto set = generate_training_set(tracks, 500, 0, 100, 2.0, 7);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : set.train) {
    for (std::size_t i = 0; i < s.centroids.size(); ++i) {
      const Centroid truth = centroid_of(tracks[0].points[i].box);
      sum += std::abs(s.centroids[i].x - truth.x) + std::abs(s.centroids[i].y - truth.y);
      n += 2;
    }
  }
  ASSERT_GE(n, 100000u);
  const double expected = 2.0 * std::sqrt(2.0 / M_PI);
  EXPECT_NEAR(sum / n, expected, 0.02 * expected);
}

TEST(TrainingSet, WindowSamplingIsUniform)
{
  std::vector<GroundTruthTrack> tracks;
  for (int i = 0; i < 10; ++i) {
    tracks.push_back(straight_track(i + 1, 100 + 5 * i, {0, 0}, {1, 1}));
  }
  const auto eligible = eligible_windows(tracks, 100);
  std::map<Window, long> counts;
  Rng rng(42);
  const std::size_t draws = 100000;
  for (const Window& w : sample_windows(eligible, draws, 0, rng)) {
    ++counts[w];
  }
  const double expected = static_cast<double>(draws) / eligible.size();
  double chi2 = 0.0;
  for (const Window& w : eligible) {
    const double d = counts[w] - expected;
    chi2 += d * d / expected;
  }
  // Wilson-Hilferty approximation of the 0.99 chi-square quantile.
  const double k = static_cast<double>(eligible.size() - 1);
  const double z99 = 2.326347874;
  const double critical = k * std::pow(1.0 - 2.0 / (9.0 * k) + z99 * std::sqrt(2.0 / (9.0 * k)), 3);
  EXPECT_LT(chi2, critical);
}

TEST(TrainingSet, TrainAndValidationWindowsDisjoint)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 130, {0, 0}, {1, 0}),
                                             straight_track(2, 110, {0, 0}, {0, 1})};
  const auto eligible = eligible_windows(tracks, 100);
  Rng rng(5);
  std::vector<Window> val;
  const auto train = sample_windows(eligible, 200, 10, rng, &val);
  EXPECT_EQ(train.size(), 200u);
  EXPECT_EQ(val.size(), 10u);
  for (const auto& v : val) {
    for (const auto& t : train) {
      EXPECT_FALSE(v == t);
    }
  }
}

TEST(TrainingSet, ShortTracksAdmittedDownToMinimum)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 30, {0, 0}, {1, 0}),
                                             straight_track(2, 19, {0, 0}, {1, 0})};
  const auto eligible = eligible_windows(tracks, 100);
  ASSERT_EQ(eligible.size(), 1u);
  EXPECT_EQ(eligible[0].length, 30u);
  EXPECT_THROW(generate_training_set({straight_track(1, 10, {0, 0}, {1, 0})}, 5, 1, 100, 2.0, 1),
               std::invalid_argument);
}

TEST(TrainingSet, DeterministicGivenSeed)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 150, {0, 0}, {3, 1})};
  const auto a = generate_training_set(tracks, 10, 2, 100, 2.0, 9);
  const auto b = generate_training_set(tracks, 10, 2, 100, 2.0, 9);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].centroids, b.train[i].centroids);
  }
}

TEST(TrainingSet, CorpusFileRoundTrip)
{
  const std::vector<GroundTruthTrack> tracks{straight_track(1, 150, {0.1, 0.2}, {3.3, 1.7})};
  const auto set = generate_training_set(tracks, 4, 2, 50, 2.0, 9);
  const auto path = (fs::temp_directory_path() / "traje_corpus_roundtrip.txt").string();
  save_corpus(set, path);
  const auto back = load_corpus(path);
  fs::remove(path);
  ASSERT_EQ(back.train.size(), 4u);
  ASSERT_EQ(back.val.size(), 2u);
  EXPECT_EQ(back.train[3].centroids, set.train[3].centroids);
  EXPECT_EQ(back.val[1].centroids, set.val[1].centroids);
}

TEST(Scenario, ZeroNoiseDetectionsEqualGroundTruth)
{
  const auto sd = generate_scenario(make_scenario("cv", 0.0), 1);
  std::size_t gt_boxes = 0;
  for (const auto& t : sd.ground_truth) {
    gt_boxes += t.points.size();
  }
  std::size_t dets = 0;
  for (const auto& fd : sd.detections) {
    for (const auto& d : fd.detections) {
      ++dets;
      bool found = false;
      for (const auto& t : sd.ground_truth) {
        for (const auto& p : t.points) {
          found = found || (p.frame == fd.frame && p.box == d.box);
        }
      }
      EXPECT_TRUE(found);
    }
  }
  EXPECT_EQ(dets, gt_boxes);
}

TEST(Scenario, OcclusionSuppressesDetections)
{
  const auto sd = generate_scenario(make_scenario("occlusion", 2.0), 1);
  ASSERT_EQ(sd.detections.size(), 40u);
  for (const auto& fd : sd.detections) {
    const bool hidden = fd.frame >= 11 && fd.frame <= 15;
    EXPECT_EQ(fd.detections.empty(), hidden) << fd.frame;
  }
}

TEST(Scenario, CrossingObjectsMeet)
{
  const auto sd = generate_scenario(make_scenario("cross", 0.0), 1);
  const auto a = centroid_of(sd.ground_truth[0].points[19].box);
  const auto b = centroid_of(sd.ground_truth[1].points[19].box);
  EXPECT_EQ(sd.ground_truth[0].points[19].frame, 20);
  EXPECT_NEAR(a.x, b.x, 1e-9);
  EXPECT_NEAR(a.y, b.y, 1e-9);
}

TEST(Scenario, DeterministicAndSeedSensitive)
{
  const auto sc = make_scenario("turn", 2.0);
  const auto a = generate_scenario(sc, 4);
  const auto b = generate_scenario(sc, 4);
  const auto c = generate_scenario(sc, 5);
  EXPECT_EQ(format_detections(a.detections), format_detections(b.detections));
  EXPECT_NE(format_detections(a.detections), format_detections(c.detections));
}

TEST(Scenario, UnknownKindAndBadWindowRejected)
{
  EXPECT_THROW(make_scenario("spiral", 1.0), std::invalid_argument);
  Scenario sc = make_scenario("occlusion", 0.0);
  sc.objects[0].occlusions = {{35, 45}};
  EXPECT_THROW(generate_scenario(sc, 1), std::invalid_argument);
}
