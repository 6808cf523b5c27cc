#pragma once

#include "gaitkit/core/types.hpp"
#include "gaitkit/refine/config.hpp"

namespace gaitkit::refine {

/// Marks observed samples whose confidence falls below `threshold` as missing.
/// Coordinates are left untouched. In PerFrame mode a single sub-threshold
/// lower-limb joint invalidates every joint of that frame.
inline TrajectorySet gate_by_confidence(TrajectorySet traj, double threshold,
                                        GateMode mode = GateMode::PerJoint) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");
  }
  auto below = [threshold](const JointSeries& s, std::size_t t) {
    return s.state[t] == SampleState::Observed && s.confidence[t] < threshold;
  };
  if (mode == GateMode::PerJoint) {
    for (auto& [j, s] : traj.joints) {
      for (std::size_t t = 0; t < s.size(); ++t) {
        if (below(s, t)) s.invalidate(t);
      }
    }
    return traj;
  }
  for (std::size_t t = 0; t < traj.length; ++t) {
    bool drop = false;
    for (JointId j : kLowerLimbJoints) {
      if (traj.has(j)) {
        const auto& s = traj.at(j);
        drop = drop || below(s, t) || !s.valid(t);
      }
    }
    for (auto& [j, s] : traj.joints) {
      if (drop || below(s, t)) s.invalidate(t);
    }
  }
  return traj;
}

}  // namespace gaitkit::refine
