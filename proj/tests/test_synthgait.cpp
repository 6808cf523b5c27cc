#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gaitkit/core/pose_io.hpp"
#include "gaitkit/synthgait/fixture.hpp"

using namespace gaitkit;
using namespace gaitkit::synthgait;
namespace fs = std::filesystem;

namespace {

GaitModel hip_only(double amplitude) {
  GaitModel m;
  m.hip = {0.0, {{{amplitude, 0.0}, {}, {}}}};
  m.knee = {};
  m.ankle = {};
  return m;
}

TrajectorySet zeros(std::size_t n) {
  TrajectorySet tr;
  tr.length = n;
  JointSeries s(n);
  for (std::size_t t = 0; t < n; ++t) {
    s.confidence[t] = 1.0;
    s.state[t] = SampleState::Observed;
  }
  tr.joints[JointId::LKnee] = s;
  return tr;
}

}  // namespace

TEST(ForwardKinematics, StandingIsStatic) {
  const auto fk = forward_kinematics(GaitModel::standing(), 20, 30.0);
  for (const auto& [j, s] : fk.trajectories.joints) {
    for (std::size_t t = 1; t < 20; ++t) {
      EXPECT_DOUBLE_EQ(s.x[t], s.x[0]);
      EXPECT_DOUBLE_EQ(s.y[t], s.y[0]);
    }
  }
  for (auto j : kinematics::kAngleJoints) EXPECT_DOUBLE_EQ(fk.angles.left.of(j)[7], 0.0);
}

TEST(ForwardKinematics, HipAmplitudeAndPeriod) {
  const auto fk = forward_kinematics(hip_only(30.0), 180, 30.0);
  const auto& hip = fk.angles.left.of(kinematics::AngleJoint::Hip);
  double peak = -1e9;
  int upward = 0;
  for (std::size_t t = 0; t < hip.size(); ++t) {
    peak = std::max(peak, hip[t]);
    if (t > 0 && hip[t - 1] < 0.0 && hip[t] >= 0.0) ++upward;
  }
  EXPECT_NEAR(peak, 30.0, 1e-9);
  EXPECT_EQ(upward, 6);
}

TEST(ForwardKinematics, PhaseOffsetDelaysCurve) {
  auto m = hip_only(30.0);
  m.right_heel_phase = 0.0;
  m.right.phase_offset = 0.1;  // 10% of a 30-frame cycle = 3 frames
  const auto fk = forward_kinematics(m, 90, 30.0);
  const auto& l = fk.angles.left.of(kinematics::AngleJoint::Hip);
  const auto& r = fk.angles.right.of(kinematics::AngleJoint::Hip);
  for (std::size_t t = 3; t < 90; ++t) EXPECT_NEAR(r[t], l[t - 3], 1e-9);
}

TEST(ForwardKinematics, HeelStrikesAtCycleBoundaries) {
  const auto fk = forward_kinematics(GaitModel{}, 180, 30.0);
  std::vector<long> left, right;
  for (const auto& e : fk.events) (e.side == Side::Left ? left : right).push_back(e.frame_index);
  EXPECT_EQ(left, (std::vector<long>{0, 30, 60, 90, 120, 150}));
  EXPECT_EQ(right, (std::vector<long>{15, 45, 75, 105, 135, 165}));
}

TEST(ForwardKinematics, LeavingImageIsOutOfBounds) {
  GaitModel m;
  m.pelvis_speed_px_per_frame = 20.0;
  try {
    forward_kinematics(m, 180, 30.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
}

TEST(Corrupt, EmptySpecIsIdentity) {
  const auto tr = forward_kinematics(GaitModel{}, 30, 30.0).trajectories;
  const auto out = corrupt(tr, {}, 5);
  EXPECT_EQ(out.trajectories, tr);
  EXPECT_TRUE(out.log.records.empty());
}

TEST(Corrupt, SwapsExchangeLowerLimbsOnly) {
  const auto tr = forward_kinematics(GaitModel{}, 30, 30.0).trajectories;
  CorruptionSpec spec;
  spec.swaps = {5, 6, 7};
  const auto out = corrupt(tr, spec, 0).trajectories;
  for (std::size_t t = 0; t < 30; ++t) {
    const bool swapped = t >= 5 && t <= 7;
    EXPECT_EQ(out.at(JointId::LKnee).x[t], (swapped ? tr.at(JointId::RKnee) : tr.at(JointId::LKnee)).x[t]);
    EXPECT_EQ(out.at(JointId::RBigToe).y[t], (swapped ? tr.at(JointId::LBigToe) : tr.at(JointId::RBigToe)).y[t]);
    EXPECT_EQ(out.at(JointId::LWrist).x[t], tr.at(JointId::LWrist).x[t]);
  }
}

TEST(Corrupt, NoiseHasRequestedSd) {
  CorruptionSpec spec;
  spec.noise_sd_px = 2.0;
  const auto out = corrupt(zeros(5000), spec, 11);
  const auto& s = out.trajectories.at(JointId::LKnee);
  double sum = 0.0, ss = 0.0;
  for (std::size_t t = 0; t < 5000; ++t) {
    sum += s.x[t] + s.y[t];
    ss += s.x[t] * s.x[t] + s.y[t] * s.y[t];
  }
  const double mean = sum / 10000.0;
  const double sd = std::sqrt((ss - 10000.0 * mean * mean) / 9999.0);
  EXPECT_NEAR(sd, 2.0, 0.1);
  EXPECT_EQ(corrupt(zeros(5000), spec, 11).trajectories, out.trajectories);
  EXPECT_NE(corrupt(zeros(5000), spec, 12).trajectories, out.trajectories);
}

TEST(Corrupt, DropoutsTeleportsAndConfidence) {
  CorruptionSpec spec;
  spec.dropouts[JointId::LKnee] = {3, 4};
  spec.teleports = {{8, JointId::LKnee, 60.0, -5.0}};
  spec.confidences = {{9, JointId::LKnee, 0.3}};
  const auto out = corrupt(zeros(12), spec, 0);
  const auto& s = out.trajectories.at(JointId::LKnee);
  EXPECT_FALSE(s.valid(3));
  EXPECT_FALSE(s.valid(4));
  EXPECT_EQ(s.confidence[3], 0.0);
  EXPECT_EQ(s.x[8], 60.0);
  EXPECT_EQ(s.y[8], -5.0);
  EXPECT_EQ(s.confidence[9], 0.3);
  EXPECT_EQ(spec.touched_frames(), (std::set<long>{3, 4, 8, 9}));
  EXPECT_EQ(out.log.frames_of("dropout"), (std::set<long>{3, 4}));
}

TEST(Corrupt, FrameOutsideSequenceIsOutOfBounds) {
  CorruptionSpec spec;
  spec.swaps = {12};
  try {
    corrupt(zeros(12), spec, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
  }
}

TEST(Corrupt, RandomSwapRunsAreSeparated) {
  std::mt19937_64 rng(4);
  const auto frames = random_swap_runs(0, 180, 6, 1, 8, 10, rng);
  ASSERT_FALSE(frames.empty());
  EXPECT_GE(frames.front(), 10);
  EXPECT_LE(frames.back(), 169);
  std::size_t runs = 1;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] != frames[i - 1] + 1) {
      ++runs;
      EXPECT_GE(frames[i] - frames[i - 1], 2);
    }
  }
  EXPECT_EQ(runs, 6u);
}

TEST(Json, SpecAndModelRoundTrip) {
  CorruptionSpec spec;
  spec.dropouts[JointId::RAnkle] = {20};
  spec.noise_sd_px = 1.5;
  spec.noise_joints = {JointId::LKnee, JointId::RKnee};
  spec.swaps = {44, 45};
  spec.confidences = {{90, JointId::LHip, 0.3}};
  spec.teleports = {{10, JointId::LAnkle, 60.0, 0.0}};
  EXPECT_EQ(spec_json(spec_from_json(spec_json(spec))), spec_json(spec));

  GaitModel m;
  m.right.amplitude_scale = 0.8;
  m.right.phase_offset = 0.05;
  m.pelvis_start = {300.0, 280.0};
  EXPECT_EQ(model_json(model_from_json(model_json(m))), model_json(m));
  EXPECT_THROW(spec_from_json({{"swaps", "nope"}}), Error);
}

TEST(Fixture, LayoutAndPoseRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "gaitkit_test_fixture";
  fs::remove_all(dir);
  FixtureOptions opt;
  opt.n_frames = 40;
  CorruptionSpec raw;
  raw.dropouts[JointId::RKnee] = {5};
  opt.variants["raw"] = raw;
  opt.render_frames = true;
  const auto fx = write_fixture(dir, opt);
  for (const char* f : {"model.json", "truth_angles.csv", "events.csv", "raw.corruption.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir / "frames" / "frame_000000000039.png"));
  EXPECT_EQ(edgemap::png_size(dir / "frames" / "frame_000000000000.png"), opt.model.image_size);

  const auto frames = load_pose_directory(dir / "truth", kFixturePosePrefix, 0, 40, opt.model.image_size);
  const auto back = assemble_trajectories(frames);
  for (const auto& [j, s] : fx.truth.trajectories.joints) {
    for (std::size_t t = 0; t < 40; ++t) {
      EXPECT_DOUBLE_EQ(back.at(j).x[t], s.x[t]);
      EXPECT_DOUBLE_EQ(back.at(j).y[t], s.y[t]);
    }
  }
  const auto raw_frames = load_pose_directory(dir / "raw", kFixturePosePrefix, 0, 40, opt.model.image_size);
  EXPECT_FALSE(raw_frames[5].at(JointId::RKnee).valid);
  EXPECT_TRUE(raw_frames[6].at(JointId::RKnee).valid);
  EXPECT_EQ(fx.logs.at("raw").frames_of("dropout"), (std::set<long>{5}));
  fs::remove_all(dir);
}
