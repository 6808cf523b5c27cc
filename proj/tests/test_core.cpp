#include <gtest/gtest.h>

#include <filesystem>

#include "gaitkit/core/pose_io.hpp"
#include "gaitkit/core/trajectory_io.hpp"
#include "gaitkit/util/csv.hpp"
#include "gaitkit/util/fs.hpp"
#include "gaitkit/util/parallel.hpp"

using namespace gaitkit;
namespace fs = std::filesystem;

namespace {

nlohmann::json person_with(std::map<JointId, std::array<double, 3>> set) {
  std::vector<double> flat(75, 0.0);
  for (const auto& [j, v] : set) {
    for (std::size_t c = 0; c < 3; ++c) flat[3 * index_of(j) + c] = v[c];
  }
  return {{"pose_keypoints_2d", flat}};
}

std::string doc_of(std::vector<nlohmann::json> people) {
  return nlohmann::json{{"version", 1.3}, {"people", people}}.dump();
}

FramePose pose_at(long f, std::initializer_list<JointId> missing = {}) {
  FramePose p;
  p.frame_index = f;
  p.image_size = {640, 480};
  for (JointId j : kTrackedJoints) p.at(j) = {10.0 * index_of(j) + f, 5.0 * f + 1, 0.9, true};
  for (JointId j : missing) p.at(j) = Keypoint2D::invalid();
  return p;
}

}  // namespace

TEST(PoseDocument, MapsTriplesToKeypoints) {
  const auto p = parse_pose_file(doc_of({person_with({{JointId::RKnee, {320.0, 410.5, 0.91}}})}), 4, {640, 480});
  const auto& k = p.at(JointId::RKnee);
  EXPECT_TRUE(k.valid);
  EXPECT_DOUBLE_EQ(k.x, 320.0);
  EXPECT_DOUBLE_EQ(k.y, 410.5);
  EXPECT_DOUBLE_EQ(k.confidence, 0.91);
  EXPECT_EQ(p.frame_index, 4);
}

TEST(PoseDocument, ZeroPeopleIsNoPersonDetected) {
  try {
    parse_pose_file(doc_of({}), 0, {640, 480});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPersonDetected);
  }
}

TEST(PoseDocument, ZeroTripleIsInvalid) {
  const auto p = parse_pose_file(doc_of({person_with({{JointId::RAnkle, {0, 0, 0}}, {JointId::LAnkle, {1, 2, 0.5}}})}), 0,
                                 {640, 480});
  EXPECT_FALSE(p.at(JointId::RAnkle).valid);
  EXPECT_TRUE(p.at(JointId::LAnkle).valid);
}

TEST(PoseDocument, WrongTripleCountAndMalformed) {
  auto bad = nlohmann::json{{"people", {{{"pose_keypoints_2d", std::vector<double>(74, 0.0)}}}}}.dump();
  try {
    parse_pose_file(bad, 0, {10, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongTripleCount);
  }
  try {
    parse_pose_file("{not json", 0, {10, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedDocument);
  }
}

TEST(PoseDocument, PersonSelection) {
  auto small = person_with({{JointId::Neck, {10, 10, 0.9}}, {JointId::LAnkle, {20, 30, 0.9}}});
  auto large = person_with({{JointId::Neck, {100, 10, 0.9}}, {JointId::LAnkle, {300, 400, 0.9}}});
  const auto doc = doc_of({small, large});
  EXPECT_DOUBLE_EQ(parse_pose_file(doc, 0, {640, 480}).at(JointId::Neck).x, 100.0);
  EXPECT_DOUBLE_EQ(parse_pose_file(doc, 0, {640, 480}, PersonSelection::by_index(0)).at(JointId::Neck).x, 10.0);
  EXPECT_THROW(parse_pose_file(doc, 0, {640, 480}, PersonSelection::require_single()), Error);
}

TEST(PoseDocument, RoundTripIsIdentity) {
  const auto p = pose_at(12, {JointId::RBigToe});
  const auto again = parse_pose_file(serialize_pose_document(p), 12, {640, 480});
  EXPECT_EQ(again, p);
  const auto third = parse_pose_file(serialize_pose_document(again), 12, {640, 480});
  EXPECT_EQ(third, again);
}

TEST(PoseDocument, FilenameIsOrdinal) {
  EXPECT_EQ(pose_filename("frame", 42), "frame_000000000042_keypoints.json");
  EXPECT_EQ(util::ordinal_from_name("frame_000000000042_keypoints.json"), 42);
  EXPECT_EQ(util::ordinal_from_name("frame_000000000007.png"), 7);
}

TEST(Trajectories, AllValid) {
  std::vector<FramePose> frames = {pose_at(0), pose_at(1), pose_at(2)};
  const auto tr = assemble_trajectories(frames);
  EXPECT_EQ(tr.length, 3u);
  for (const auto& [j, s] : tr.joints) {
    for (std::size_t t = 0; t < 3; ++t) EXPECT_TRUE(s.valid(t));
  }
}

TEST(Trajectories, MissingJointMask) {
  std::vector<FramePose> frames = {pose_at(0), pose_at(1, {JointId::LAnkle}), pose_at(2)};
  const auto tr = assemble_trajectories(frames);
  const auto& s = tr.at(JointId::LAnkle);
  EXPECT_TRUE(s.valid(0));
  EXPECT_FALSE(s.valid(1));
  EXPECT_TRUE(s.valid(2));
}

TEST(Trajectories, SixSecondsAtThirtyFps) {
  std::vector<FramePose> frames;
  for (long f = 0; f < 180; ++f) frames.push_back(pose_at(f));
  EXPECT_DOUBLE_EQ(assemble_trajectories(frames, 30.0).duration_s(), 6.0);
}

TEST(Trajectories, GapAndEmptyAreErrors) {
  std::vector<FramePose> gap = {pose_at(0), pose_at(2)};
  try {
    assemble_trajectories(gap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameGap);
  }
  EXPECT_THROW(assemble_trajectories(std::vector<FramePose>{}), Error);
}

TEST(Trajectories, FrameRoundTrip) {
  std::vector<FramePose> frames = {pose_at(5), pose_at(6, {JointId::RKnee})};
  const auto tr = assemble_trajectories(frames);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(frame_from_trajectories(tr, t, {640, 480}), frames[t]);
}

TEST(Trajectories, CsvRoundTrip) {
  std::vector<FramePose> frames = {pose_at(3), pose_at(4, {JointId::LHip}), pose_at(5)};
  auto tr = assemble_trajectories(frames, 25.0);
  tr.at(JointId::LHip).state[1] = SampleState::Interpolated;
  tr.at(JointId::LHip).x[1] = 1.0 / 3.0;
  const auto back = parse_trajectories_csv(format_trajectories_csv(tr));
  EXPECT_EQ(back, tr);
}

TEST(PoseDirectory, MissingFilesBecomeInvalidFrames) {
  const fs::path dir = fs::temp_directory_path() / "gaitkit_test_posedir";
  fs::remove_all(dir);
  util::write_file(dir / pose_filename("frame", 0), serialize_pose_document(pose_at(0)));
  util::write_file(dir / pose_filename("frame", 2), empty_pose_document());
  std::vector<long> failed;
  const auto frames = load_pose_directory(dir, "frame", 0, 3, {640, 480}, PersonSelection::largest(), &failed);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_TRUE(frames[0].at(JointId::Neck).valid);
  EXPECT_FALSE(frames[1].at(JointId::Neck).valid);
  EXPECT_FALSE(frames[2].at(JointId::Neck).valid);
  EXPECT_EQ(failed, std::vector<long>{1});
  fs::remove_all(dir);
}

TEST(Util, CsvParsesNumbers) {
  const auto t = util::parse_csv("a,b\n1,2.5\n3,-4\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(util::parse_long(t.rows[1][0]), 3);
  EXPECT_DOUBLE_EQ(util::parse_double(t.rows[0][1]), 2.5);
  EXPECT_THROW(util::parse_double("x"), Error);
}

TEST(Util, ShortestRoundTripDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -123.456e-7, 1e300}) EXPECT_EQ(util::parse_double(util::fmt_double(v)), v);
}

TEST(Util, ParallelForVisitsEveryIndexAndRethrows) {
  std::vector<int> hits(100, 0);
  util::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(util::parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::Io, "boom");
               }),
               Error);
}

TEST(Util, Fnv1aIsStable) {
  EXPECT_EQ(util::hex64(util::fnv1a("")), "cbf29ce484222325");
  EXPECT_NE(util::fnv1a("a"), util::fnv1a("b"));
}
