#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/gaitcycle/cycles.hpp"

namespace gaitkit::metrics {

using gaitcycle::CycleEnsemble;
using kinematics::AngleJoint;

/// Mean and sample SD of a set of non-negative errors.
struct ErrorStat {
  double mae = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

inline ErrorStat summarize(std::span<const double> errors) {
  ErrorStat s;
  s.n = errors.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mae = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double e : errors) ss += (e - s.mae) * (e - s.mae);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

/// Euclidean distances between predicted and true keypoints over samples
/// valid in both. Both sets must cover the same frames.
inline std::vector<double> coordinate_errors(const TrajectorySet& pred, const TrajectorySet& truth,
                                             std::span<const JointId> joints) {
  if (pred.first_frame != truth.first_frame || pred.length != truth.length) {
    throw Error(ErrorCode::MismatchedStructure, "prediction and truth cover different frames");
  }
  std::vector<double> d;
  for (JointId j : joints) {
    if (!pred.has(j) || !truth.has(j)) continue;
    const auto& p = pred.at(j);
    const auto& g = truth.at(j);
    for (std::size_t t = 0; t < pred.length; ++t) {
      if (p.valid(t) && g.valid(t)) d.push_back(std::hypot(p.x[t] - g.x[t], p.y[t] - g.y[t]));
    }
  }
  return d;
}

/// Coordinate MAE in pixels: mean and SD of per-sample Euclidean distances.
inline ErrorStat coordinate_mae(const TrajectorySet& pred, const TrajectorySet& truth, std::span<const JointId> joints) {
  const auto d = coordinate_errors(pred, truth, joints);
  if (d.empty()) throw Error(ErrorCode::NoJointSamples, "no sample valid in both prediction and truth");
  return summarize(d);
}

/// |pred - truth| over the 101 points where both mean curves are defined.
inline std::vector<double> angle_errors(const CycleEnsemble& pred, const CycleEnsemble& truth, AngleJoint joint) {
  if (pred.side != truth.side) throw Error(ErrorCode::MismatchedStructure, "ensembles describe different sides");
  std::vector<double> d;
  const auto ji = static_cast<std::size_t>(joint);
  for (std::size_t k = 0; k < gaitcycle::kCyclePoints; ++k) {
    if (pred.count[ji][k] > 0 && truth.count[ji][k] > 0) d.push_back(std::abs(pred.mean[ji][k] - truth.mean[ji][k]));
  }
  return d;
}

struct AngleMae {
  std::map<AngleJoint, ErrorStat> per_joint;
  ErrorStat pooled;
  std::vector<double> errors;  // pooled absolute differences, for further pooling
};

/// Kinematic MAE over mean curves, per joint and pooled across joints and
/// ensemble pairs. Pairs are matched by position and must share a side.
inline AngleMae angle_mae(std::span<const CycleEnsemble> pred, std::span<const CycleEnsemble> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw Error(ErrorCode::MismatchedStructure, "ensemble lists differ in length or are empty");
  }
  AngleMae out;
  std::map<AngleJoint, std::vector<double>> per;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (AngleJoint j : kinematics::kAngleJoints) {
      auto d = angle_errors(pred[i], truth[i], j);
      per[j].insert(per[j].end(), d.begin(), d.end());
      out.errors.insert(out.errors.end(), d.begin(), d.end());
    }
  }
  for (auto& [j, d] : per) out.per_joint[j] = summarize(d);
  out.pooled = summarize(out.errors);
  if (out.pooled.n == 0) throw Error(ErrorCode::MismatchedStructure, "no point defined in both ensembles");
  return out;
}

/// Whether a frame lacks any of the eight lower-limb joints or has one below
/// `threshold` confidence.
inline bool frame_failed(const FramePose& pose, double threshold) {
  for (JointId j : kLowerLimbJoints) {
    const auto& k = pose.at(j);
    if (!k.valid || k.confidence < threshold) return true;
  }
  return false;
}

struct FailureStat {
  std::size_t failed = 0;
  std::size_t total = 0;
  [[nodiscard]] double percent() const {
    return total ? 100.0 * static_cast<double>(failed) / static_cast<double>(total) : 0.0;
  }
};

/// Percentage of frames with incomplete lower-limb keypoints, per camera view.
inline std::map<CameraView, FailureStat> failure_frame_stats(
    const std::vector<std::pair<CameraView, std::vector<FramePose>>>& sequences, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
  std::map<CameraView, FailureStat> out;
  for (const auto& [view, frames] : sequences) {
    auto& s = out[view];
    for (const auto& f : frames) {
      ++s.total;
      s.failed += frame_failed(f, threshold);
    }
  }
  return out;
}

/// 100 (before - after) / before, full precision.
inline double improvement_percent(double mae_before, double mae_after) {
  if (!(mae_before > 0.0)) throw Error(ErrorCode::InvalidArgument, "baseline MAE must be positive");
  return 100.0 * (mae_before - mae_after) / mae_before;
}

/// Rounded to the nearest integer, e.g. "37%".
inline std::string display_percent(double percent) {
  return std::to_string(static_cast<long>(std::lround(percent))) + "%";
}

/// Pixel errors above 100 render as ">100", mirroring the reference table.
inline std::string display_pixels(const ErrorStat& s) {
  if (s.mae > 100.0) return ">100";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", s.mae, s.sd);
  return buf;
}

enum class ScaleSource { SubjectHeight, None };

struct ScaleEstimate {
  double cm_per_pixel = 0.0;
  ScaleSource source = ScaleSource::None;
};

inline ScaleEstimate estimate_scale(double subject_height_cm, double subject_height_px) {
  if (!(subject_height_cm > 0.0) || !(subject_height_px > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "subject height must be positive in both units");
  }
  return {subject_height_cm / subject_height_px, ScaleSource::SubjectHeight};
}

/// Apparent subject height in pixels: median over frames of the vertical span
/// from the neck to the lower toe, scaled by 1.2 for the head above the neck.
inline std::optional<double> apparent_height_px(const TrajectorySet& traj) {
  std::vector<double> spans;
  for (std::size_t t = 0; t < traj.length; ++t) {
    const auto neck = traj.keypoint(JointId::Neck, t);
    const auto lt = traj.keypoint(JointId::LBigToe, t);
    const auto rt = traj.keypoint(JointId::RBigToe, t);
    if (!neck.valid || (!lt.valid && !rt.valid)) continue;
    double foot = -1e300;
    if (lt.valid) foot = std::max(foot, lt.y);
    if (rt.valid) foot = std::max(foot, rt.y);
    spans.push_back((foot - neck.y) * 1.2);
  }
  if (spans.empty()) return std::nullopt;
  std::nth_element(spans.begin(), spans.begin() + static_cast<std::ptrdiff_t>(spans.size() / 2), spans.end());
  const double h = spans[spans.size() / 2];
  return h > 0.0 ? std::optional<double>(h) : std::nullopt;
}

}  // namespace gaitkit::metrics
