#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "gaitkit/core/types.hpp"

// Conventions
// -----------
// Image y points DOWN. "Vertical" below the hip is the +y direction, and a
// cross product (a.x*b.y - a.y*b.x) is positive for a clockwise turn on
// screen. Every signed angle is atan2(cross, dot) scaled by the anterior sign
// (+1 when walking toward +x, -1 toward -x), which makes all results
// independent of the walking direction:
//   hip   > 0  knee anterior of the vertical through the hip   (flexion)
//   knee  > 0  ankle posterior of the extended thigh line      (flexion)
//   ankle > 0  toe rotated from the anterior perpendicular to the shank
//              toward the shank                                (dorsiflexion)

namespace gaitkit::kinematics {

struct AnteriorDirection {
  int sign = +1;  // +1: anterior is image +x, -1: image -x
  static AnteriorDirection plus_x() { return {+1}; }
  static AnteriorDirection minus_x() { return {-1}; }
  friend bool operator==(const AnteriorDirection&, const AnteriorDirection&) = default;
};

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kDirectionMarginPxPerFrame = 2.0 * 0.1;

/// Sign of the mean per-frame horizontal displacement of the pelvis
/// (MidHip, falling back to the mean of both hips). An explicit direction in
/// `override_dir` always wins.
inline AnteriorDirection infer_walking_direction(const TrajectorySet& traj,
                                                 WalkingDirection override_dir = WalkingDirection::Auto) {
  if (override_dir == WalkingDirection::ImagePlusX) return AnteriorDirection::plus_x();
  if (override_dir == WalkingDirection::ImageMinusX) return AnteriorDirection::minus_x();

  std::vector<std::optional<double>> pelvis(traj.length);
  std::size_t valid = 0;
  for (std::size_t t = 0; t < traj.length; ++t) {
    const auto mid = traj.keypoint(JointId::MidHip, t);
    const auto lh = traj.keypoint(JointId::LHip, t);
    const auto rh = traj.keypoint(JointId::RHip, t);
    if (mid.valid) {
      pelvis[t] = mid.x;
    } else if (lh.valid && rh.valid) {
      pelvis[t] = 0.5 * (lh.x + rh.x);
    }
    valid += pelvis[t].has_value();
  }
  if (traj.length == 0 || 2 * valid < traj.length) {
    throw Error(ErrorCode::DirectionAmbiguous, "hip keypoint valid in fewer than half the frames");
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t t = 1; t < traj.length; ++t) {
    if (pelvis[t] && pelvis[t - 1]) {
      sum += *pelvis[t] - *pelvis[t - 1];
      ++pairs;
    }
  }
  const double mean = pairs ? sum / static_cast<double>(pairs) : 0.0;
  if (std::abs(mean) <= kDirectionMarginPxPerFrame) {
    throw Error(ErrorCode::DirectionAmbiguous, "mean pelvis displacement below margin; set walking direction explicitly");
  }
  return {mean > 0.0 ? +1 : -1};
}

namespace detail {

struct Vec {
  double x, y;
};

inline Vec segment(const Keypoint2D& from, const Keypoint2D& to) {
  if (!from.valid || !to.valid) throw Error(ErrorCode::InvalidArgument, "angle needs valid keypoints");
  const Vec v{to.x - from.x, to.y - from.y};
  if (std::hypot(v.x, v.y) <= 1e-12) throw Error(ErrorCode::DegenerateSegment, "coincident keypoints");
  return v;
}

inline double cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }

}  // namespace detail

/// Thigh (hip->knee) against the downward vertical through the hip.
inline double hip_angle(const Keypoint2D& hip, const Keypoint2D& knee, AnteriorDirection anterior) {
  const auto thigh = detail::segment(hip, knee);
  return std::atan2(anterior.sign * thigh.x, thigh.y) * kRadToDeg;
}

/// Shank (knee->ankle) against the extension of the thigh line.
inline double knee_angle(const Keypoint2D& hip, const Keypoint2D& knee, const Keypoint2D& ankle,
                         AnteriorDirection anterior) {
  const auto thigh = detail::segment(hip, knee);
  const auto shank = detail::segment(knee, ankle);
  if (std::hypot(ankle.x - hip.x, ankle.y - hip.y) <= 1e-12) {
    throw Error(ErrorCode::DegenerateSegment, "coincident keypoints");
  }
  return anterior.sign * std::atan2(detail::cross(thigh, shank), detail::dot(thigh, shank)) * kRadToDeg;
}

/// Foot (ankle->toe) against the anterior-pointing perpendicular to the shank.
inline double ankle_angle(const Keypoint2D& knee, const Keypoint2D& ankle, const Keypoint2D& toe,
                          AnteriorDirection anterior) {
  const auto shank = detail::segment(knee, ankle);
  const auto foot = detail::segment(ankle, toe);
  if (std::hypot(toe.x - knee.x, toe.y - knee.y) <= 1e-12) {
    throw Error(ErrorCode::DegenerateSegment, "coincident keypoints");
  }
  const detail::Vec perp{anterior.sign * shank.y, -anterior.sign * shank.x};
  return -anterior.sign * std::atan2(detail::cross(perp, foot), detail::dot(perp, foot)) * kRadToDeg;
}

enum class AngleJoint : std::uint8_t { Hip = 0, Knee = 1, Ankle = 2 };
inline constexpr std::array<AngleJoint, 3> kAngleJoints = {AngleJoint::Hip, AngleJoint::Knee, AngleJoint::Ankle};

constexpr std::string_view angle_joint_name(AngleJoint j) {
  switch (j) {
    case AngleJoint::Hip: return "hip";
    case AngleJoint::Knee: return "knee";
    case AngleJoint::Ankle: return "ankle";
  }
  return "?";
}

inline AngleJoint angle_joint_from_name(std::string_view s) {
  for (auto j : kAngleJoints) {
    if (angle_joint_name(j) == s) return j;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown angle joint '" + std::string(s) + "'");
}

/// Hip, knee and ankle angles of one side over time, in degrees.
struct JointAngleSeries {
  Side side = Side::Left;
  long first_frame = 0;
  bool near_side = false;  // limb closest to the camera; far-side values are reduced confidence
  std::array<std::vector<double>, 3> degrees;
  std::array<std::vector<bool>, 3> valid;

  [[nodiscard]] std::size_t size() const { return degrees[0].size(); }
  [[nodiscard]] const std::vector<double>& of(AngleJoint j) const { return degrees[static_cast<std::size_t>(j)]; }
  std::vector<double>& of(AngleJoint j) { return degrees[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const std::vector<bool>& valid_of(AngleJoint j) const { return valid[static_cast<std::size_t>(j)]; }
  std::vector<bool>& valid_of(AngleJoint j) { return valid[static_cast<std::size_t>(j)]; }

  void resize(std::size_t n) {
    for (auto& d : degrees) d.assign(n, 0.0);
    for (auto& v : valid) v.assign(n, false);
  }
};

struct JointAngles {
  JointAngleSeries left;
  JointAngleSeries right;
  AnteriorDirection anterior;

  [[nodiscard]] const JointAngleSeries& of(Side s) const { return s == Side::Left ? left : right; }
  JointAngleSeries& of(Side s) { return s == Side::Left ? left : right; }
};

/// Angles for a known anterior direction; any view is accepted.
inline JointAngles joint_angles(const TrajectorySet& traj, AnteriorDirection anterior, std::optional<Side> near) {
  JointAngles out;
  out.anterior = anterior;
  for (Side side : {Side::Left, Side::Right}) {
    auto& series = out.of(side);
    series.side = side;
    series.first_frame = traj.first_frame;
    series.near_side = near && *near == side;
    series.resize(traj.length);
    for (std::size_t t = 0; t < traj.length; ++t) {
      const auto hip = traj.keypoint(joint_of(side, Segment::Hip), t);
      const auto knee = traj.keypoint(joint_of(side, Segment::Knee), t);
      const auto ankle = traj.keypoint(joint_of(side, Segment::Ankle), t);
      const auto toe = traj.keypoint(joint_of(side, Segment::Toe), t);
      auto put = [&](AngleJoint j, auto&& compute) {
        try {
          series.of(j)[t] = compute();
          series.valid_of(j)[t] = true;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateSegment) throw;
        }
      };
      if (hip.valid && knee.valid) put(AngleJoint::Hip, [&] { return hip_angle(hip, knee, anterior); });
      if (hip.valid && knee.valid && ankle.valid) {
        put(AngleJoint::Knee, [&] { return knee_angle(hip, knee, ankle, anterior); });
      }
      if (knee.valid && ankle.valid && toe.valid) {
        put(AngleJoint::Ankle, [&] { return ankle_angle(knee, ankle, toe, anterior); });
      }
    }
  }
  return out;
}

/// Sagittal-plane angles for both sides. The camera-near side is flagged.
inline JointAngles compute_joint_angles(const TrajectorySet& traj, const SequenceMeta& meta) {
  if (!is_sagittal(meta.camera_view)) {
    throw Error(ErrorCode::ViewUnsupported, "joint angles need a sagittal camera view, got " +
                                                std::string(view_name(meta.camera_view)));
  }
  return joint_angles(traj, infer_walking_direction(traj, meta.walking_direction), meta.near_side());
}

}  // namespace gaitkit::kinematics
