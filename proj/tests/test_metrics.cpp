#include <gtest/gtest.h>

#include <random>

#include "gaitkit/metrics/report.hpp"

using namespace gaitkit;
using namespace gaitkit::metrics;

namespace {

TrajectorySet track(std::vector<std::pair<double, double>> pts, JointId j = JointId::RAnkle) {
  TrajectorySet tr;
  tr.length = pts.size();
  JointSeries s(pts.size());
  for (std::size_t t = 0; t < pts.size(); ++t) {
    s.x[t] = pts[t].first;
    s.y[t] = pts[t].second;
    s.confidence[t] = 1.0;
    s.state[t] = SampleState::Observed;
  }
  tr.joints[j] = s;
  return tr;
}

const std::vector<JointId> kAnkle = {JointId::RAnkle};

CycleEnsemble flat_ensemble(double hip, double knee, double ankle) {
  CycleEnsemble e;
  e.side = Side::Left;
  e.mean[0].fill(hip);
  e.mean[1].fill(knee);
  e.mean[2].fill(ankle);
  for (auto& c : e.count) c.fill(1);
  return e;
}

FramePose complete_frame(double conf) {
  FramePose p;
  for (JointId j : kTrackedJoints) p.at(j) = {1.0, 1.0, conf, true};
  return p;
}

}  // namespace

TEST(CoordinateMae, IdenticalIsZero) {
  const auto a = track({{1, 2}, {3, 4}, {5, 6}});
  const auto s = coordinate_mae(a, a, kAnkle);
  EXPECT_EQ(s.mae, 0.0);
  EXPECT_EQ(s.n, 3u);
}

TEST(CoordinateMae, ThreeFourFive) {
  const auto s = coordinate_mae(track({{3, 4}, {0, 0}}), track({{0, 0}, {0, 0}}), kAnkle);
  EXPECT_DOUBLE_EQ(s.mae, 2.5);
  EXPECT_EQ(coordinate_errors(track({{3, 4}, {0, 0}}), track({{0, 0}, {0, 0}}), kAnkle), (std::vector<double>{5, 0}));
}

TEST(CoordinateMae, UniformOffset) {
  std::vector<std::pair<double, double>> truth, pred;
  for (int t = 0; t < 20; ++t) {
    truth.emplace_back(t * 3.0, 100.0 - t);
    pred.emplace_back(t * 3.0 + 10.0, 100.0 - t);
  }
  const auto s = coordinate_mae(track(pred), track(truth), kAnkle);
  EXPECT_DOUBLE_EQ(s.mae, 10.0);
  EXPECT_DOUBLE_EQ(s.sd, 0.0);
}

TEST(CoordinateMae, InvalidSamplesExcluded) {
  auto pred = track({{3, 4}, {100, 100}});
  pred.at(JointId::RAnkle).invalidate(1);
  const auto s = coordinate_mae(pred, track({{0, 0}, {0, 0}}), kAnkle);
  EXPECT_DOUBLE_EQ(s.mae, 5.0);
  EXPECT_EQ(s.n, 1u);
  pred.at(JointId::RAnkle).invalidate(0);
  EXPECT_THROW(coordinate_mae(pred, track({{0, 0}, {0, 0}}), kAnkle), Error);
  EXPECT_THROW(coordinate_mae(track({{0, 0}}), track({{0, 0}, {0, 0}}), kAnkle), Error);
}

TEST(CoordinateMae, SymmetricTranslationInvariantAndTriangle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<double, double>> a, b, c, a2, b2;
    for (int t = 0; t < 30; ++t) {
      a.emplace_back(n(rng), n(rng));
      b.emplace_back(n(rng), n(rng));
      c.emplace_back(n(rng), n(rng));
      a2.emplace_back(a.back().first + 17.0, a.back().second - 4.0);
      b2.emplace_back(b.back().first + 17.0, b.back().second - 4.0);
    }
    const double ab = coordinate_mae(track(a), track(b), kAnkle).mae;
    EXPECT_DOUBLE_EQ(ab, coordinate_mae(track(b), track(a), kAnkle).mae);
    EXPECT_NEAR(ab, coordinate_mae(track(a2), track(b2), kAnkle).mae, 1e-9);
    EXPECT_LE(coordinate_mae(track(a), track(c), kAnkle).mae,
              ab + coordinate_mae(track(b), track(c), kAnkle).mae + 1e-12);
  }
}

TEST(AngleMae, IdenticalAndOffset) {
  const std::vector<CycleEnsemble> truth = {flat_ensemble(10, 20, 5)};
  EXPECT_EQ(angle_mae(truth, truth).pooled.mae, 0.0);
  const std::vector<CycleEnsemble> pred = {flat_ensemble(10, 23, 5)};
  const auto m = angle_mae(pred, truth);
  EXPECT_DOUBLE_EQ(m.per_joint.at(AngleJoint::Knee).mae, 3.0);
  EXPECT_DOUBLE_EQ(m.per_joint.at(AngleJoint::Knee).sd, 0.0);
  EXPECT_DOUBLE_EQ(m.per_joint.at(AngleJoint::Hip).mae, 0.0);
  EXPECT_DOUBLE_EQ(m.pooled.mae, 1.0);
  EXPECT_EQ(m.pooled.n, 303u);
}

TEST(AngleMae, SideMismatchAndEmpty) {
  std::vector<CycleEnsemble> a = {flat_ensemble(0, 0, 0)}, b = {flat_ensemble(0, 0, 0)};
  b[0].side = Side::Right;
  EXPECT_THROW(angle_mae(a, b), Error);
  EXPECT_THROW(angle_mae(std::span<const CycleEnsemble>{}, std::span<const CycleEnsemble>{}), Error);
}

TEST(Failures, EighteenOfOneEighty) {
  std::vector<FramePose> frames(180, complete_frame(0.9));
  for (int i = 0; i < 18; ++i) frames[static_cast<std::size_t>(i * 10)].at(JointId::LAnkle) = Keypoint2D::invalid();
  const auto stats = failure_frame_stats({{CameraView::RightSagittal, frames}}, 0.5);
  EXPECT_DOUBLE_EQ(stats.at(CameraView::RightSagittal).percent(), 10.0);
  const auto clean = failure_frame_stats({{CameraView::LeftSagittal, std::vector<FramePose>(180, complete_frame(0.9))}}, 0.5);
  EXPECT_DOUBLE_EQ(clean.at(CameraView::LeftSagittal).percent(), 0.0);
}

TEST(Failures, OneLowJointFailsFrame) {
  auto f = complete_frame(0.9);
  EXPECT_FALSE(frame_failed(f, 0.5));
  f.at(JointId::RBigToe).confidence = 0.49;
  EXPECT_TRUE(frame_failed(f, 0.5));
  f = complete_frame(0.9);
  f.at(JointId::LWrist) = Keypoint2D::invalid();  // upper body does not count
  EXPECT_FALSE(frame_failed(f, 0.5));
  EXPECT_THROW(failure_frame_stats({}, 1.5), Error);
}

TEST(Improvement, ReportedReductions) {
  EXPECT_EQ(display_percent(improvement_percent(24.07, 15.18)), "37%");
  EXPECT_NEAR(improvement_percent(100, 23.7), 76.3, 1e-9);
  EXPECT_EQ(display_percent(improvement_percent(100, 23.7)), "76%");
  EXPECT_DOUBLE_EQ(improvement_percent(5, 5), 0.0);
  EXPECT_THROW(improvement_percent(0, 1), Error);
}

TEST(Display, SaturatesAboveHundredPixels) {
  EXPECT_EQ(display_pixels({100.5, 3.0, 10}), ">100");
  EXPECT_EQ(display_pixels({12.345, 1.5, 10}), "12.35 (1.50)");
}

TEST(Scale, SubjectHeight) {
  EXPECT_DOUBLE_EQ(estimate_scale(180, 600).cm_per_pixel, 0.30);
  EXPECT_DOUBLE_EQ(estimate_scale(170, 170).cm_per_pixel, 1.0);
  EXPECT_THROW(estimate_scale(180, 0), Error);
  EXPECT_THROW(estimate_scale(0, 600), Error);
}

TEST(Scale, ApparentHeightFromNeckToToe) {
  TrajectorySet tr = track({{0, 100}, {0, 100}, {0, 100}}, JointId::Neck);
  tr.joints[JointId::LBigToe] = track({{0, 600}, {0, 600}, {0, 600}}).at(JointId::RAnkle);
  EXPECT_DOUBLE_EQ(*apparent_height_px(tr), 600.0);
  EXPECT_FALSE(apparent_height_px(track({{0, 0}})).has_value());
}

TEST(Report, JsonAndTable) {
  ErrorReport r;
  r.n_frames = 180;
  r.errors[Method::RawPose][LimbRole::Prosthetic].coordinates_px[Segment::Knee] = {20.0, 28.14};
  r.errors[Method::ZeroShot][LimbRole::Prosthetic].coordinates_px[Segment::Knee] = {15.18, 15.18};
  r.errors[Method::RawPose][LimbRole::Intact].angles_deg[AngleJoint::Hip] = {2.0, 4.0};
  r.errors[Method::ZeroShot][LimbRole::Intact].angles_deg[AngleJoint::Hip] = {2.0, 4.0};
  r.failures[Method::RawPose][CameraView::RightSagittal] = {18, 180};
  r.scale = estimate_scale(180, 600);

  const auto j = report_json(r);
  EXPECT_EQ(j["schema_version"], "1");
  EXPECT_DOUBLE_EQ(j["methods"]["RawPose"]["Prosthetic"]["coordinates_px"]["mae"].get<double>(), 24.07);
  EXPECT_NEAR(j["methods"]["ZeroShot"]["Prosthetic"]["coordinates_cm"]["mae"].get<double>(), 15.18 * 0.3, 1e-12);
  EXPECT_NEAR(j["improvement_percent"]["Prosthetic"]["coordinates"].get<double>(), 36.934, 1e-3);
  EXPECT_DOUBLE_EQ(j["improvement_percent"]["Intact"]["kinematics"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j["failure_frames"]["RawPose"]["RightSagittal"]["percent"].get<double>(), 10.0);

  const auto table = render_report_table(r);
  EXPECT_NE(table.find("37%"), std::string::npos) << table;
  EXPECT_NE(table.find("10.0 (18/180)"), std::string::npos) << table;
  EXPECT_NE(table.find("0.300 cm/px"), std::string::npos) << table;
}

TEST(Report, RoleOfSide) {
  EXPECT_EQ(role_of(Side::Right, Side::Right), LimbRole::Prosthetic);
  EXPECT_EQ(role_of(Side::Left, Side::Right), LimbRole::Intact);
}
