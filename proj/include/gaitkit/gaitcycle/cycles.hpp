#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/kinematics/angles.hpp"

namespace gaitkit::gaitcycle {

using kinematics::AngleJoint;
using kinematics::JointAngleSeries;
using kinematics::kAngleJoints;

inline constexpr std::size_t kCyclePoints = 101;  // 0%, 1%, ..., 100%
inline constexpr double kMinCycleValidity = 0.90;

struct NormalizedCycle {
  Side side = Side::Left;
  long start_frame = 0;
  long end_frame = 0;
  std::array<std::array<double, kCyclePoints>, 3> degrees{};
  std::array<std::array<bool, kCyclePoints>, 3> valid{};

  [[nodiscard]] const std::array<double, kCyclePoints>& of(AngleJoint j) const {
    return degrees[static_cast<std::size_t>(j)];
  }
  [[nodiscard]] const std::array<bool, kCyclePoints>& valid_of(AngleJoint j) const {
    return valid[static_cast<std::size_t>(j)];
  }
};

/// Fraction of frames in [start, end] at which `joint` is valid.
inline double cycle_validity(const JointAngleSeries& angles, AngleJoint joint, long start, long end) {
  const auto& v = angles.valid_of(joint);
  std::size_t ok = 0, total = 0;
  for (long f = start; f <= end; ++f) {
    const long t = f - angles.first_frame;
    ++total;
    if (t >= 0 && static_cast<std::size_t>(t) < v.size() && v[static_cast<std::size_t>(t)]) ++ok;
  }
  return total ? static_cast<double>(ok) / static_cast<double>(total) : 0.0;
}

/// Linearly resamples one cycle onto 101 points t_k = start + k (end - start) / 100.
/// A point is invalid when an interpolation neighbour with nonzero weight is.
/// Throws CycleRejected when any joint is valid over less than 90% of the span.
inline NormalizedCycle normalize_cycle(const JointAngleSeries& angles, std::pair<long, long> cycle) {
  const auto [start, end] = cycle;
  if (end <= start) throw Error(ErrorCode::InvalidArgument, "cycle end must follow start");
  for (AngleJoint j : kAngleJoints) {
    const double frac = cycle_validity(angles, j, start, end);
    if (frac < kMinCycleValidity) {
      throw Error(ErrorCode::CycleRejected, std::string(kinematics::angle_joint_name(j)) + " valid over " +
                                                std::to_string(frac * 100.0) + "% of cycle [" + std::to_string(start) +
                                                "," + std::to_string(end) + "]");
    }
  }
  NormalizedCycle out;
  out.side = angles.side;
  out.start_frame = start;
  out.end_frame = end;
  const double span = static_cast<double>(end - start);
  const auto n = static_cast<long>(angles.size());
  for (AngleJoint j : kAngleJoints) {
    const auto ji = static_cast<std::size_t>(j);
    const auto& deg = angles.of(j);
    const auto& ok = angles.valid_of(j);
    for (std::size_t k = 0; k < kCyclePoints; ++k) {
      const double pos = static_cast<double>(start) + static_cast<double>(k) * span / 100.0 -
                         static_cast<double>(angles.first_frame);
      const double base = std::floor(pos);
      const double w = pos - base;
      const long i0 = static_cast<long>(base);
      const long i1 = w > 0.0 ? i0 + 1 : i0;
      if (i0 < 0 || i1 >= n || !ok[static_cast<std::size_t>(i0)] || !ok[static_cast<std::size_t>(i1)]) continue;
      out.degrees[ji][k] = deg[static_cast<std::size_t>(i0)] * (1.0 - w) + deg[static_cast<std::size_t>(i1)] * w;
      out.valid[ji][k] = true;
    }
  }
  return out;
}

/// Pointwise mean and sample SD over the cycles valid at each point.
struct CycleEnsemble {
  Side side = Side::Left;
  std::vector<NormalizedCycle> cycles;
  std::array<std::array<double, kCyclePoints>, 3> mean{};
  std::array<std::array<double, kCyclePoints>, 3> sd{};
  std::array<std::array<std::size_t, kCyclePoints>, 3> count{};

  [[nodiscard]] const std::array<double, kCyclePoints>& mean_of(AngleJoint j) const {
    return mean[static_cast<std::size_t>(j)];
  }
  [[nodiscard]] const std::array<double, kCyclePoints>& sd_of(AngleJoint j) const {
    return sd[static_cast<std::size_t>(j)];
  }
  [[nodiscard]] bool defined(AngleJoint j, std::size_t k) const { return count[static_cast<std::size_t>(j)][k] > 0; }
};

inline CycleEnsemble ensemble_stats(std::span<const NormalizedCycle> cycles) {
  if (cycles.empty()) throw Error(ErrorCode::NoCycles, "no accepted gait cycles");
  CycleEnsemble e;
  e.side = cycles.front().side;
  e.cycles.assign(cycles.begin(), cycles.end());
  for (AngleJoint j : kAngleJoints) {
    const auto ji = static_cast<std::size_t>(j);
    for (std::size_t k = 0; k < kCyclePoints; ++k) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& c : cycles) {
        if (c.valid[ji][k]) {
          sum += c.degrees[ji][k];
          ++n;
        }
      }
      e.count[ji][k] = n;
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (const auto& c : cycles) {
        if (c.valid[ji][k]) ss += (c.degrees[ji][k] - mean) * (c.degrees[ji][k] - mean);
      }
      e.mean[ji][k] = mean;
      e.sd[ji][k] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
  }
  return e;
}

struct CycleAnalysis {
  std::vector<NormalizedCycle> accepted;
  std::vector<std::pair<long, long>> rejected;
  std::vector<std::string> reasons;
};

/// Normalizes every cycle of one side, collecting rejections instead of
/// throwing on them.
inline CycleAnalysis normalize_all(const JointAngleSeries& angles, const std::vector<std::pair<long, long>>& cycles) {
  CycleAnalysis out;
  for (const auto& c : cycles) {
    try {
      out.accepted.push_back(normalize_cycle(angles, c));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CycleRejected) throw;
      out.rejected.push_back(c);
      out.reasons.emplace_back(e.what());
    }
  }
  return out;
}

}  // namespace gaitkit::gaitcycle
