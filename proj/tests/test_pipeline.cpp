#include <gtest/gtest.h>

#include <filesystem>

#include "gaitkit/pipeline/pipeline.hpp"
#include "gaitkit/synthgait/fixture.hpp"

using namespace gaitkit;
using namespace gaitkit::pipeline;
namespace fs = std::filesystem;

namespace {

// Two gait cycles, rendered, with a noisy "observed" variant for the pose mock.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "gaitkit_test_pipeline";
    fs::remove_all(root_);
    synthgait::FixtureOptions opt;
    opt.n_frames = 64;
    opt.seed = 3;
    opt.render_frames = true;
    synthgait::CorruptionSpec observed;
    observed.noise_sd_px = 1.0;
    opt.variants["observed"] = observed;
    synthgait::write_fixture(root_ / "fixture", opt);
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static PipelineConfig config(const std::string& run) {
    const auto fx = root_ / "fixture";
    PipelineConfig cfg;
    cfg.frames_dir = fx / "frames";
    cfg.work_dir = root_ / run;
    cfg.generate.executable = GAITKIT_MOCK_GENERATE;
    cfg.pose.executable = GAITKIT_MOCK_POSE;
    cfg.pose.params = {{"source_dir", (fx / "observed").string()},
                       {"source_width", 1280},
                       {"source_height", 720}};
    cfg.events_file = fx / "events.csv";
    cfg.truth = TruthConfig{fx / "truth", "pose", fx / "truth_angles.csv"};
    return cfg;
  }

  static std::map<std::string, bool> executed(const RunResult& r) {
    std::map<std::string, bool> out;
    for (const auto& s : r.stages) out[s.name] = s.executed;
    return out;
  }

  static fs::path root_;
};

fs::path PipelineTest::root_;

}  // namespace

TEST_F(PipelineTest, ConfigJsonRoundTrip) {
  auto cfg = config("cfg");
  cfg.selective = true;
  cfg.decimate_k = 3;
  cfg.refine.cutoff_hz = 5.0;
  cfg.edges.order = EdgeOrder::CannyThenResize;
  cfg.meta.subject_height_cm = 172.0;
  const auto j = config_json(cfg);
  EXPECT_EQ(config_json(config_from_json(j, "/")), j);
  EXPECT_EQ(j["generate"]["exe"], GAITKIT_MOCK_GENERATE);
  EXPECT_NO_THROW(cfg.validate());
}

TEST_F(PipelineTest, ConfigValidation) {
  auto cfg = config("bad");
  cfg.frames_dir = root_ / "nowhere";
  EXPECT_THROW(cfg.validate(), Error);
  cfg = config("bad");
  cfg.refine.cutoff_hz = 20.0;  // above Nyquist at 30 Hz
  EXPECT_THROW(cfg.validate(), Error);
  auto j = config_json(config("bad"));
  j["edges"]["order"] = "sideways";
  EXPECT_THROW(config_from_json(j, "/"), Error);
  j.erase("generate");
  EXPECT_THROW(config_from_json(j, "/"), Error);
}

TEST_F(PipelineTest, RelativePathsResolveAgainstBase) {
  auto j = config_json(config("rel"));
  j["work_dir"] = "runs/a";
  const auto cfg = config_from_json(j, "/data/project");
  EXPECT_EQ(cfg.work_dir, fs::path("/data/project/runs/a"));
}

TEST_F(PipelineTest, FullRunProducesLayoutAndReport) {
  const auto r = run_full(config("full"));
  for (const char* d : {"edges", "generated", "poses_generated", "poses_raw", "poses_refined", "kinematics", "cycles",
                        "report"}) {
    EXPECT_TRUE(fs::exists(r.run_dir / d / ".stage")) << d;
  }
  EXPECT_TRUE(fs::exists(r.run_dir / "run_manifest.json"));
  EXPECT_TRUE(fs::exists(r.run_dir / "report" / "report.json"));
  EXPECT_EQ(r.generation_frames.size(), 64u);
  EXPECT_EQ(r.backend_calls, 2u);
  ASSERT_TRUE(r.report.has_value());
  EXPECT_EQ(r.report->n_frames, 64u);
  const auto mae = r.report->kinematics(metrics::Method::ZeroShot, metrics::LimbRole::Intact);
  ASSERT_TRUE(mae.has_value());
  EXPECT_LT(mae->mae, 3.0);

  // Recomputing from the run directory reproduces the stored report.
  const auto again = evaluate_run(r.run_dir, config("full"));
  EXPECT_EQ(metrics::report_json(again), nlohmann::json::parse(util::read_file(r.run_dir / "report/report.json")));
}

TEST_F(PipelineTest, RerunIsCachedAndDeletionRerunsDependents) {
  const auto cfg = config("cache");
  run_full(cfg);
  const auto second = run_full(cfg);
  EXPECT_EQ(second.backend_calls, 0u);
  for (const auto& [name, ran] : executed(second)) EXPECT_FALSE(ran) << name;

  fs::remove_all(cfg.work_dir / "kinematics");
  const auto third = executed(run_full(cfg));
  EXPECT_FALSE(third.at("edges"));
  EXPECT_FALSE(third.at("generated"));
  EXPECT_FALSE(third.at("poses_refined"));
  EXPECT_TRUE(third.at("kinematics"));
  EXPECT_TRUE(third.at("cycles"));
  EXPECT_TRUE(third.at("report"));
}

TEST_F(PipelineTest, ConfigChangeInvalidatesDownstreamOnly) {
  auto cfg = config("change");
  run_full(cfg);
  cfg.refine.cutoff_hz = 5.0;
  const auto r = executed(run_full(cfg));
  EXPECT_FALSE(r.at("generated"));
  EXPECT_FALSE(r.at("poses_raw"));
  EXPECT_TRUE(r.at("poses_refined"));
  EXPECT_TRUE(r.at("cycles"));
}

TEST_F(PipelineTest, FailedGenerationFramesAreReported) {
  auto cfg = config("partial");
  cfg.generate.params = {{"fail_frames", {5, 6}}};
  const auto r = run_full(cfg);
  ASSERT_TRUE(r.failed_frames.count("generate"));
  EXPECT_EQ(r.failed_frames.at("generate"), (std::vector<long>{5, 6}));
  // Both frames are still present downstream, bridged by interpolation.
  const auto traj = parse_trajectories_csv(util::read_file(r.run_dir / "poses_refined" / "trajectories.csv"));
  EXPECT_EQ(traj.length, 64u);
  EXPECT_EQ(traj.at(JointId::LKnee).state[5], SampleState::Interpolated);
}

TEST_F(PipelineTest, CompareNeedsGroundTruth) {
  auto cfg = config("cmp_missing");
  cfg.truth.reset();
  try {
    run_compare({cfg}, root_ / "cmp_missing_out");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingGroundTruth);
  }
}

TEST_F(PipelineTest, CompareIdenticalMethodsShowsNoImprovement) {
  auto cfg = config("cmp_same");
  cfg.raw_pose = cfg.pose;  // baseline served from the same observed poses
  const auto rep = run_compare({cfg}, root_ / "cmp_same_out");
  const auto before = rep.coordinates(metrics::Method::RawPose, metrics::LimbRole::Prosthetic);
  const auto after = rep.coordinates(metrics::Method::ZeroShot, metrics::LimbRole::Prosthetic);
  ASSERT_TRUE(before && after);
  EXPECT_NEAR(metrics::improvement_percent(before->mae, after->mae), 0.0, 1e-6);
  EXPECT_TRUE(fs::exists(root_ / "cmp_same_out" / "report.json"));
  EXPECT_TRUE(fs::exists(root_ / "cmp_same_out" / "report.txt"));
}

TEST_F(PipelineTest, InventoryRejectsMissingFrames) {
  const auto dir = root_ / "inv";
  fs::create_directories(dir);
  fs::copy_file(root_ / "fixture/frames/frame_000000000000.png", dir / "frame_000000000000.png");
  fs::copy_file(root_ / "fixture/frames/frame_000000000002.png", dir / "frame_000000000002.png");
  EXPECT_THROW(inventory_frames(dir, ".png"), Error);
  EXPECT_THROW(inventory_frames(root_ / "empty_nothing", ".png"), Error);
  EXPECT_EQ(inventory_frames(root_ / "fixture/frames", ".png").frames.size(), 64u);
}
