#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitkit/core/error.hpp"

namespace gaitkit {

inline constexpr std::size_t kBody25Count = 25;
inline constexpr double kDefaultSampleRate = 30.0;

/// BODY_25 indices the toolkit reads. Values are fixed by the BODY_25 layout.
enum class JointId : std::uint8_t {
  Neck = 1,
  RWrist = 4,
  LWrist = 7,
  MidHip = 8,
  RHip = 9,
  RKnee = 10,
  RAnkle = 11,
  LHip = 12,
  LKnee = 13,
  LAnkle = 14,
  LBigToe = 19,
  RBigToe = 22,
};

inline constexpr std::array<JointId, 12> kTrackedJoints = {
    JointId::Neck,   JointId::RWrist, JointId::LWrist, JointId::MidHip,
    JointId::RHip,   JointId::RKnee,  JointId::RAnkle, JointId::LHip,
    JointId::LKnee,  JointId::LAnkle, JointId::LBigToe, JointId::RBigToe};

/// The eight analysis joints: left and right hip, knee, ankle, toe.
inline constexpr std::array<JointId, 8> kLowerLimbJoints = {
    JointId::LHip, JointId::LKnee, JointId::LAnkle, JointId::LBigToe,
    JointId::RHip, JointId::RKnee, JointId::RAnkle, JointId::RBigToe};

constexpr std::size_t index_of(JointId j) { return static_cast<std::size_t>(j); }

constexpr std::string_view joint_name(JointId j) {
  switch (j) {
    case JointId::Neck: return "Neck";
    case JointId::RWrist: return "RWrist";
    case JointId::LWrist: return "LWrist";
    case JointId::MidHip: return "MidHip";
    case JointId::RHip: return "RHip";
    case JointId::RKnee: return "RKnee";
    case JointId::RAnkle: return "RAnkle";
    case JointId::LHip: return "LHip";
    case JointId::LKnee: return "LKnee";
    case JointId::LAnkle: return "LAnkle";
    case JointId::LBigToe: return "LBigToe";
    case JointId::RBigToe: return "RBigToe";
  }
  return "?";
}

inline JointId joint_from_name(std::string_view name) {
  for (JointId j : kTrackedJoints) {
    if (joint_name(j) == name) return j;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown joint '" + std::string(name) + "'");
}

enum class Side : std::uint8_t { Left, Right };

constexpr Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
constexpr std::string_view side_name(Side s) { return s == Side::Left ? "L" : "R"; }

inline Side side_from_name(std::string_view s) {
  if (s == "L" || s == "Left" || s == "left") return Side::Left;
  if (s == "R" || s == "Right" || s == "right") return Side::Right;
  throw Error(ErrorCode::UnknownEventField, "unknown side '" + std::string(s) + "'");
}

enum class Segment : std::uint8_t { Hip, Knee, Ankle, Toe };

constexpr JointId joint_of(Side side, Segment seg) {
  const bool left = side == Side::Left;
  switch (seg) {
    case Segment::Hip: return left ? JointId::LHip : JointId::RHip;
    case Segment::Knee: return left ? JointId::LKnee : JointId::RKnee;
    case Segment::Ankle: return left ? JointId::LAnkle : JointId::RAnkle;
    case Segment::Toe: return left ? JointId::LBigToe : JointId::RBigToe;
  }
  return JointId::MidHip;
}

constexpr JointId wrist_of(Side side) {
  return side == Side::Left ? JointId::LWrist : JointId::RWrist;
}

inline constexpr std::array<Segment, 4> kLimbSegments = {Segment::Hip, Segment::Knee,
                                                         Segment::Ankle, Segment::Toe};

/// Image coordinates in pixels, y pointing down.
struct Keypoint2D {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
  bool valid = false;

  static Keypoint2D invalid() { return {}; }

  static Keypoint2D make(double x, double y, double confidence) {
    if (!std::isfinite(x) || !std::isfinite(y) || !(confidence >= 0.0 && confidence <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "keypoint must be finite with confidence in [0,1]");
    }
    return {x, y, confidence, true};
  }

  friend bool operator==(const Keypoint2D&, const Keypoint2D&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// One person's BODY_25 keypoints in one frame. All 25 slots are stored so a
/// document round-trips; absent slots are invalid keypoints.
struct FramePose {
  long frame_index = 0;
  std::array<Keypoint2D, kBody25Count> keypoints{};
  ImageSize image_size{};

  [[nodiscard]] const Keypoint2D& at(JointId j) const { return keypoints[index_of(j)]; }
  Keypoint2D& at(JointId j) { return keypoints[index_of(j)]; }

  friend bool operator==(const FramePose&, const FramePose&) = default;
};

enum class SampleState : std::uint8_t { Missing, Observed, Interpolated };

struct JointSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> confidence;
  std::vector<SampleState> state;

  explicit JointSeries(std::size_t n = 0)
      : x(n, 0.0), y(n, 0.0), confidence(n, 0.0), state(n, SampleState::Missing) {}

  [[nodiscard]] std::size_t size() const { return state.size(); }
  [[nodiscard]] bool valid(std::size_t t) const { return state[t] != SampleState::Missing; }
  [[nodiscard]] std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto s : state) n += s != SampleState::Missing;
    return n;
  }
  void invalidate(std::size_t t) { state[t] = SampleState::Missing; }

  friend bool operator==(const JointSeries&, const JointSeries&) = default;
};

/// Per-joint time series over a contiguous frame range.
struct TrajectorySet {
  double sample_rate = kDefaultSampleRate;
  long first_frame = 0;
  std::size_t length = 0;
  std::map<JointId, JointSeries> joints;

  [[nodiscard]] long frame_at(std::size_t t) const { return first_frame + static_cast<long>(t); }
  [[nodiscard]] double duration_s() const { return static_cast<double>(length) / sample_rate; }
  [[nodiscard]] bool has(JointId j) const { return joints.count(j) != 0; }
  [[nodiscard]] const JointSeries& at(JointId j) const {
    auto it = joints.find(j);
    if (it == joints.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  "trajectory has no joint " + std::string(joint_name(j)));
    }
    return it->second;
  }
  JointSeries& at(JointId j) {
    return const_cast<JointSeries&>(static_cast<const TrajectorySet&>(*this).at(j));
  }
  [[nodiscard]] Keypoint2D keypoint(JointId j, std::size_t t) const {
    auto it = joints.find(j);
    if (it == joints.end() || !it->second.valid(t)) return Keypoint2D::invalid();
    const auto& s = it->second;
    return {s.x[t], s.y[t], s.confidence[t], true};
  }

  friend bool operator==(const TrajectorySet&, const TrajectorySet&) = default;
};

enum class EventKind : std::uint8_t { HeelStrike };

struct GaitEvent {
  long frame_index = 0;
  Side side = Side::Left;
  EventKind kind = EventKind::HeelStrike;
  friend bool operator==(const GaitEvent&, const GaitEvent&) = default;
};

enum class CameraView : std::uint8_t { AnteriorFrontal, PosteriorFrontal, LeftSagittal, RightSagittal };
enum class WalkingDirection : std::uint8_t { ImagePlusX, ImageMinusX, Auto };

constexpr std::string_view view_name(CameraView v) {
  switch (v) {
    case CameraView::AnteriorFrontal: return "AnteriorFrontal";
    case CameraView::PosteriorFrontal: return "PosteriorFrontal";
    case CameraView::LeftSagittal: return "LeftSagittal";
    case CameraView::RightSagittal: return "RightSagittal";
  }
  return "?";
}

inline CameraView view_from_name(std::string_view s) {
  for (auto v : {CameraView::AnteriorFrontal, CameraView::PosteriorFrontal,
                 CameraView::LeftSagittal, CameraView::RightSagittal}) {
    if (view_name(v) == s) return v;
  }
  throw Error(ErrorCode::Config, "unknown camera view '" + std::string(s) + "'");
}

constexpr bool is_sagittal(CameraView v) {
  return v == CameraView::LeftSagittal || v == CameraView::RightSagittal;
}

constexpr std::string_view direction_name(WalkingDirection d) {
  switch (d) {
    case WalkingDirection::ImagePlusX: return "ImagePlusX";
    case WalkingDirection::ImageMinusX: return "ImageMinusX";
    case WalkingDirection::Auto: return "Auto";
  }
  return "?";
}

inline WalkingDirection direction_from_name(std::string_view s) {
  for (auto d : {WalkingDirection::ImagePlusX, WalkingDirection::ImageMinusX, WalkingDirection::Auto}) {
    if (direction_name(d) == s) return d;
  }
  throw Error(ErrorCode::Config, "unknown walking direction '" + std::string(s) + "'");
}

struct SequenceMeta {
  CameraView camera_view = CameraView::RightSagittal;
  Side prosthetic_side = Side::Right;
  WalkingDirection walking_direction = WalkingDirection::Auto;
  std::optional<double> subject_height_cm;

  /// Limb closest to the camera; only defined for sagittal views.
  [[nodiscard]] std::optional<Side> near_side() const {
    if (camera_view == CameraView::LeftSagittal) return Side::Left;
    if (camera_view == CameraView::RightSagittal) return Side::Right;
    return std::nullopt;
  }
};

}  // namespace gaitkit
