#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gaitkit/pipeline/pipeline.hpp"
#include "gaitkit/refine/butterworth.hpp"
#include "gaitkit/refine/gating.hpp"
#include "gaitkit/refine/selection.hpp"
#include "gaitkit/refine/spline.hpp"
#include "gaitkit/refine/swaps.hpp"
#include "gaitkit/synthgait/corrupt.hpp"
#include "gaitkit/synthgait/model.hpp"

using namespace gaitkit;
using namespace gaitkit::refine;

namespace {

TrajectorySet one_joint(std::vector<double> x, std::vector<double> conf, JointId j = JointId::LAnkle) {
  TrajectorySet tr;
  tr.length = x.size();
  JointSeries s(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    s.x[t] = x[t];
    s.y[t] = 2.0 * x[t];
    s.confidence[t] = conf[t];
    s.state[t] = SampleState::Observed;
  }
  tr.joints.emplace(j, std::move(s));
  return tr;
}

TrajectorySet walk(std::size_t n = 180, double noise = 0.0, std::uint64_t seed = 0) {
  auto tr = synthgait::forward_kinematics(synthgait::GaitModel{}, n, 30.0).trajectories;
  if (noise == 0.0) return tr;
  synthgait::CorruptionSpec spec;
  spec.noise_sd_px = noise;
  return synthgait::corrupt(tr, spec, seed).trajectories;
}

std::vector<bool> mask(const JointSeries& s) {
  std::vector<bool> m(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) m[t] = s.valid(t);
  return m;
}

}  // namespace

// ---- gating -------------------------------------------------------------------

TEST(Gating, ThresholdHalf) {
  const auto g = gate_by_confidence(one_joint({1, 2, 3}, {0.9, 0.4, 0.8}), 0.50);
  EXPECT_EQ(mask(g.at(JointId::LAnkle)), (std::vector<bool>{true, false, true}));
}

TEST(Gating, ThresholdZeroKeepsEverything) {
  const auto in = one_joint({1, 2, 3}, {0.0, 0.4, 0.8});
  EXPECT_EQ(gate_by_confidence(in, 0.0), in);
}

TEST(Gating, ExactThresholdIsKept) {
  const auto g = gate_by_confidence(one_joint({1, 2}, {0.5, 0.49}), 0.50);
  EXPECT_EQ(mask(g.at(JointId::LAnkle)), (std::vector<bool>{true, false}));
}

TEST(Gating, AllBelowThresholdLeavesEmptySeries) {
  const auto g = gate_by_confidence(one_joint({1, 2, 3, 4, 5}, {0.49, 0.49, 0.49, 0.49, 0.49}), 0.50);
  EXPECT_EQ(g.at(JointId::LAnkle).valid_count(), 0u);
  const auto r = interpolate_gaps(g, 15);
  EXPECT_EQ(r.empty_series, std::vector<JointId>{JointId::LAnkle});
}

TEST(Gating, PerFrameModeDropsWholeFrame) {
  auto tr = walk(10);
  tr.at(JointId::RKnee).confidence[4] = 0.2;
  const auto per_joint = gate_by_confidence(tr, 0.5, GateMode::PerJoint);
  const auto per_frame = gate_by_confidence(tr, 0.5, GateMode::PerFrame);
  EXPECT_TRUE(per_joint.at(JointId::LAnkle).valid(4));
  EXPECT_FALSE(per_joint.at(JointId::RKnee).valid(4));
  for (const auto& [j, s] : per_frame.joints) {
    EXPECT_FALSE(s.valid(4)) << joint_name(j);
    EXPECT_TRUE(s.valid(3));
  }
}

TEST(Gating, RejectsThresholdOutsideUnitInterval) { EXPECT_THROW(gate_by_confidence(walk(5), 1.5), Error); }

// ---- interpolation ---------------------------------------------------------------

TEST(Spline, LinearDataIsReproduced) {
  std::vector<double> x(20), c(20, 0.9);
  for (std::size_t t = 0; t < 20; ++t) x[t] = 2.0 * static_cast<double>(t) + 1.0;
  auto tr = one_joint(x, c);
  for (std::size_t t = 4; t <= 6; ++t) tr.at(JointId::LAnkle).invalidate(t);
  const auto r = interpolate_gaps(tr, 15).trajectories.at(JointId::LAnkle);
  for (std::size_t t = 4; t <= 6; ++t) {
    EXPECT_NEAR(r.x[t], 2.0 * static_cast<double>(t) + 1.0, 1e-12);
    EXPECT_NEAR(r.y[t], 2.0 * (2.0 * static_cast<double>(t) + 1.0), 1e-12);
    EXPECT_EQ(r.state[t], SampleState::Interpolated);
  }
}

TEST(Spline, LeadingAndTrailingGapsStayMissing) {
  std::vector<double> x(20), c(20, 0.9);
  for (std::size_t t = 0; t < 20; ++t) x[t] = std::sin(0.3 * static_cast<double>(t));
  auto tr = one_joint(x, c);
  for (std::size_t t : {0, 1, 2, 18, 19}) tr.at(JointId::LAnkle).invalidate(t);
  const auto r = interpolate_gaps(tr, 15).trajectories.at(JointId::LAnkle);
  for (std::size_t t : {0, 1, 2, 18, 19}) EXPECT_FALSE(r.valid(t));
}

TEST(Spline, ValidSamplesUntouchedAndLongGapsSkipped) {
  std::vector<double> x(60), c(60, 0.9);
  for (std::size_t t = 0; t < 60; ++t) x[t] = std::cos(0.2 * static_cast<double>(t));
  auto tr = one_joint(x, c);
  for (std::size_t t = 20; t < 40; ++t) tr.at(JointId::LAnkle).invalidate(t);  // 20 > max gap
  tr.at(JointId::LAnkle).invalidate(50);
  const auto r = interpolate_gaps(tr, 15).trajectories.at(JointId::LAnkle);
  for (std::size_t t = 20; t < 40; ++t) EXPECT_FALSE(r.valid(t));
  EXPECT_TRUE(r.valid(50));
  for (std::size_t t = 0; t < 20; ++t) EXPECT_EQ(r.x[t], x[t]);
}

TEST(Spline, SineGapWithinSplineErrorBound) {
  // Reference implementations of natural cubic splines reach about 1e-2 on a
  // one-third-cycle gap; the deviation is bounded by h^4 max|f''''| / 384 with
  // h the gap span in seconds, times a small constant for the natural ends.
  const std::size_t n = 120;
  std::vector<double> x(n), c(n, 0.9);
  for (std::size_t t = 0; t < n; ++t) x[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 30.0);
  auto tr = one_joint(x, c);
  for (std::size_t t = 55; t < 65; ++t) tr.at(JointId::LAnkle).invalidate(t);
  const auto r = interpolate_gaps(tr, 15).trajectories.at(JointId::LAnkle);
  const double h = 11.0 / 30.0;
  const double bound = 5.0 / 384.0 * std::pow(h, 4) * std::pow(2.0 * std::numbers::pi, 4);
  for (std::size_t t = 55; t < 65; ++t) EXPECT_LE(std::abs(r.x[t] - x[t]), bound);
}

TEST(Spline, DirectEvaluationAtKnots) {
  NaturalCubicSpline s({0, 1, 3, 4}, {1, -1, 2, 0});
  EXPECT_DOUBLE_EQ(s(0), 1);
  EXPECT_DOUBLE_EQ(s(1), -1);
  EXPECT_DOUBLE_EQ(s(3), 2);
  EXPECT_DOUBLE_EQ(s(4), 0);
  EXPECT_THROW(NaturalCubicSpline({0, 0}, {1, 1}), Error);
}

// ---- filter -----------------------------------------------------------------------

TEST(Butterworth, ConstantSeriesUnchanged) {
  std::vector<double> c(100, 42.5);
  for (bool zp : {true, false}) {
    const auto y = butterworth_lowpass(c, 30.0, 6.0, 4, zp);
    for (double v : y) EXPECT_NEAR(v, 42.5, 1e-9);
  }
}

TEST(Butterworth, GainAtCutoffIsHalfPower) {
  const auto sos = design_butterworth_lowpass(4, 6.0, 30.0);
  std::vector<double> x(3000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * std::numbers::pi * 6.0 * static_cast<double>(i) / 30.0);
  const auto y = sosfilt(sos, x);
  double peak = 0.0;
  for (std::size_t i = 2000; i < y.size(); ++i) peak = std::max(peak, std::abs(y[i]));
  // Sampled peak of a 5-sample-period tone underestimates the amplitude by at most cos(pi/5).
  EXPECT_LE(peak, 0.7071 + 1e-3);
  EXPECT_GE(peak, 0.7071 * std::cos(std::numbers::pi / 5.0) - 1e-3);
}

TEST(Butterworth, NyquistAnnihilated) {
  const auto sos = design_butterworth_lowpass(4, 6.0, 30.0);
  std::vector<double> x(1001, 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = (i % 2) ? 1.0 : -1.0;
  const auto y = sosfilt(sos, x);
  for (std::size_t i = 500; i < y.size(); ++i) EXPECT_LT(std::abs(y[i]), 1e-9);
}

TEST(Butterworth, ZeroPhasePreservesPeakTiming) {
  std::vector<double> x(200);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::exp(-std::pow((static_cast<double>(i) - 100.0) / 8.0, 2));
  const auto y = butterworth_lowpass(x, 30.0, 6.0, 4, true);
  EXPECT_EQ(std::max_element(y.begin(), y.end()) - y.begin(), 100);
  const auto causal = butterworth_lowpass(x, 30.0, 6.0, 4, false);
  EXPECT_GT(std::max_element(causal.begin(), causal.end()) - causal.begin(), 100);
}

TEST(Butterworth, InvalidDesigns) {
  EXPECT_THROW(design_butterworth_lowpass(3, 6.0, 30.0), Error);
  EXPECT_THROW(design_butterworth_lowpass(4, 15.0, 30.0), Error);
  EXPECT_THROW(design_butterworth_lowpass(4, 0.0, 30.0), Error);
  try {
    butterworth_lowpass(std::vector<double>(12, 1.0), 30.0, 6.0, 4, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpanTooShort);
  }
}

TEST(Butterworth, ShortRunsLeftUnfilteredAndReported) {
  auto tr = walk(60);
  auto& s = tr.at(JointId::LKnee);
  for (std::size_t t = 5; t < 60; ++t) {
    if (t != 10) s.invalidate(t);  // leaves runs [0,5) and [10,11)
  }
  RefineConfig cfg;
  const auto out = filter_trajectories(tr, cfg);
  EXPECT_EQ(out.trajectories.at(JointId::LKnee).x[10], s.x[10]);
  EXPECT_GE(std::count_if(out.unfiltered_runs.begin(), out.unfiltered_runs.end(),
                          [](const auto& r) { return r.first == JointId::LKnee; }),
            2);
}

// ---- swaps --------------------------------------------------------------------------

TEST(Swaps, ShortRunIsFlippedBack) {
  const auto truth = walk();
  synthgait::CorruptionSpec spec;
  spec.swaps = {5, 6, 7};
  const auto bad = synthgait::corrupt(truth, spec, 1).trajectories;
  const auto r = correct_swaps(bad);
  EXPECT_EQ(r.swapped_frames, (std::vector<long>{5, 6, 7}));
  EXPECT_EQ(r.trajectories, truth);
  EXPECT_EQ(r.orientation, SwapOrientation::Seeded);
}

TEST(Swaps, CleanSequenceUnchanged) {
  const auto truth = walk(180, 1.0, 3);
  const auto r = correct_swaps(truth);
  EXPECT_TRUE(r.swapped_frames.empty());
  EXPECT_EQ(r.trajectories, truth);
}

TEST(Swaps, GlobalSwapResolvedByArmCue) {
  const auto truth = walk();
  synthgait::CorruptionSpec spec;
  for (long f = 0; f < 180; ++f) spec.swaps.push_back(f);
  const auto bad = synthgait::corrupt(truth, spec, 1).trajectories;
  const auto r = correct_swaps(bad);
  EXPECT_TRUE(r.swapped_frames.size() == 0 || r.swapped_frames.size() == 180);
  EXPECT_EQ(r.orientation, SwapOrientation::FlippedByArmCue);
  EXPECT_EQ(r.trajectories, truth);
}

TEST(Swaps, GlobalSwapWithoutArmsIsAmbiguous) {
  auto truth = walk();
  truth.joints.erase(JointId::LWrist);
  truth.joints.erase(JointId::RWrist);
  synthgait::CorruptionSpec spec;
  for (long f = 0; f < 180; ++f) spec.swaps.push_back(f);
  spec.noise_joints = {};
  const auto r = correct_swaps(synthgait::corrupt(truth, spec, 1).trajectories);
  EXPECT_EQ(r.orientation, SwapOrientation::Ambiguous);
  EXPECT_TRUE(r.swapped_frames.size() == 0 || r.swapped_frames.size() == 180);
}

TEST(Swaps, NoSeedSkipsCorrection) {
  auto model = synthgait::GaitModel::standing();
  model.hip_offset_px = 0.0;  // both legs project onto the same line
  auto standing = synthgait::forward_kinematics(model, 30, 30.0).trajectories;
  const auto r = correct_swaps(standing);
  EXPECT_FALSE(r.seed_frame.has_value());
  EXPECT_TRUE(r.swapped_frames.empty());
}

TEST(Swaps, SeededSweepAcrossRunLengths) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    synthgait::CorruptionSpec spec;
    spec.noise_sd_px = 1.0;
    spec.swaps = synthgait::random_swap_runs(0, 180, 5, 1, 6, 5, rng);
    const auto r = correct_swaps(synthgait::corrupt(walk(), spec, seed).trajectories);
    EXPECT_EQ(r.swapped_frames, spec.swaps) << "seed " << seed;
  }
}

// ---- selection ------------------------------------------------------------------------

TEST(Selection, CleanSmoothMotionSelectsNothing) {
  auto tr = walk(90);
  const auto sel = select_frames_for_regeneration(tr, RefineConfig{});
  EXPECT_TRUE(sel.frames.empty());
}

TEST(Selection, LowConfidenceFrameSelected) {
  auto tr = walk(90);
  tr.at(JointId::RAnkle).confidence[12] = 0.3;
  const auto sel = select_frames_for_regeneration(tr, RefineConfig{});
  EXPECT_TRUE(sel.frames.count(12));
  EXPECT_TRUE(sel.low_confidence.count(12));
}

TEST(Selection, TeleportSelectedByOutlierRule) {
  auto tr = walk(90);
  tr.at(JointId::LKnee).x[40] += 80.0;
  const auto sel = select_frames_for_regeneration(tr, RefineConfig{});
  EXPECT_TRUE(sel.outliers.count(40));
  EXPECT_TRUE(sel.frames.count(40));
}

TEST(Selection, SwappedFramesFlagged) {
  synthgait::CorruptionSpec spec;
  spec.swaps = {30, 31};
  const auto sel = select_frames_for_regeneration(synthgait::corrupt(walk(90), spec, 0).trajectories, RefineConfig{});
  EXPECT_TRUE(sel.swap_flagged.count(30));
  EXPECT_TRUE(sel.swap_flagged.count(31));
  EXPECT_FALSE(sel.outliers.count(30));
}

TEST(Decimation, Plans) {
  EXPECT_EQ(decimate_plan(180, 1).size(), 180u);
  const auto k3 = decimate_plan(180, 3);
  EXPECT_EQ(k3.size(), 61u);
  EXPECT_EQ(k3[59], 177u);
  EXPECT_EQ(k3.back(), 179u);
  try {
    decimate_plan(10, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewFrames);
  }
}

// ---- full refinement ------------------------------------------------------------------

TEST(Refine, NoisyWalkGetsCloserToTruth) {
  const auto truth = walk();
  synthgait::CorruptionSpec spec;
  spec.noise_sd_px = 2.0;
  spec.swaps = {50, 51, 52};
  spec.dropouts[JointId::LKnee] = {80, 81, 82, 83};
  const auto bad = synthgait::corrupt(truth, spec, 11).trajectories;
  std::vector<FramePose> frames;
  for (std::size_t t = 0; t < bad.length; ++t) frames.push_back(frame_from_trajectories(bad, t, {1280, 720}));
  const auto out = pipeline::refine_poses(frames, RefineConfig{}, 30.0);
  double before = 0, after = 0;
  std::size_t n = 0;
  for (JointId j : kLowerLimbJoints) {
    for (std::size_t t = 0; t < truth.length; ++t) {
      if (!bad.at(j).valid(t)) continue;
      before += std::hypot(bad.at(j).x[t] - truth.at(j).x[t], bad.at(j).y[t] - truth.at(j).y[t]);
      after += std::hypot(out.trajectories.at(j).x[t] - truth.at(j).x[t], out.trajectories.at(j).y[t] - truth.at(j).y[t]);
      ++n;
    }
  }
  EXPECT_LT(after, before);
  for (std::size_t t = 80; t < 84; ++t) EXPECT_TRUE(out.trajectories.at(JointId::LKnee).valid(t));
}
