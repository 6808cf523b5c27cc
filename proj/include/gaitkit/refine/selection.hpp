#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/refine/config.hpp"
#include "gaitkit/refine/gating.hpp"
#include "gaitkit/refine/swaps.hpp"

namespace gaitkit::refine {

struct FrameSelection {
  std::set<long> frames;          // union of the three reasons below
  std::set<long> low_confidence;  // a lower-limb joint missing or under threshold
  std::set<long> swap_flagged;    // flipped or put up for review by correct_swaps
  std::set<long> outliers;        // residual against the 5-frame median above cfg.outlier_px
};

/// Frames whose coordinate deviates from the median of the 5-frame window
/// centred on it by more than `threshold_px`, in either axis. Windows with
/// fewer than 3 valid samples are skipped.
inline std::set<long> median_outliers(const TrajectorySet& traj, double threshold_px) {
  std::set<long> out;
  for (JointId j : kLowerLimbJoints) {
    if (!traj.has(j)) continue;
    const auto& s = traj.at(j);
    for (const auto* coord : {&s.x, &s.y}) {
      for (std::size_t t = 0; t < s.size(); ++t) {
        if (!s.valid(t)) continue;
        std::vector<double> win;
        const std::size_t lo = t >= 2 ? t - 2 : 0;
        const std::size_t hi = std::min(s.size() - 1, t + 2);
        for (std::size_t u = lo; u <= hi; ++u) {
          if (s.valid(u)) win.push_back((*coord)[u]);
        }
        if (win.size() < 3) continue;
        std::sort(win.begin(), win.end());
        const double med = win.size() % 2 ? win[win.size() / 2]
                                           : 0.5 * (win[win.size() / 2 - 1] + win[win.size() / 2]);
        if (std::abs((*coord)[t] - med) > threshold_px) out.insert(traj.frame_at(t));
      }
    }
  }
  return out;
}

/// Picks the frames worth sending through image regeneration: frames with a
/// missing or low-confidence lower-limb joint, frames touched by swap
/// correction, and kinematic outliers. Outliers are measured after gating and
/// swap correction so a label exchange is not double counted as a jump.
inline FrameSelection select_frames_for_regeneration(const TrajectorySet& raw, const RefineConfig& cfg) {
  FrameSelection sel;
  for (std::size_t t = 0; t < raw.length; ++t) {
    for (JointId j : kLowerLimbJoints) {
      const bool bad = !raw.has(j) || !raw.at(j).valid(t) || raw.at(j).confidence[t] < cfg.confidence_threshold;
      if (bad) {
        sel.low_confidence.insert(raw.frame_at(t));
        break;
      }
    }
  }
  const TrajectorySet gated = gate_by_confidence(raw, cfg.confidence_threshold, cfg.gate_mode);
  const SwapResult swaps = correct_swaps(gated, cfg);
  sel.swap_flagged.insert(swaps.swapped_frames.begin(), swaps.swapped_frames.end());
  sel.swap_flagged.insert(swaps.review_frames.begin(), swaps.review_frames.end());
  sel.outliers = median_outliers(swaps.trajectories, cfg.outlier_px);

  for (const auto* part : {&sel.low_confidence, &sel.swap_flagged, &sel.outliers}) {
    sel.frames.insert(part->begin(), part->end());
  }
  return sel;
}

/// Frames kept when processing only every k-th frame: 0, k, 2k, ... plus the
/// last frame. Dropped frames are restored later by interpolate_gaps.
inline std::vector<std::size_t> decimate_plan(std::size_t n_frames, std::size_t keep_every_k) {
  if (keep_every_k < 1) throw Error(ErrorCode::InvalidArgument, "decimation factor must be >= 1");
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < n_frames; t += keep_every_k) kept.push_back(t);
  if (n_frames > 0 && kept.back() != n_frames - 1) kept.push_back(n_frames - 1);
  if (kept.size() < 4) {
    throw Error(ErrorCode::TooFewFrames, "decimation keeps " + std::to_string(kept.size()) + " frames, need 4");
  }
  return kept;
}

}  // namespace gaitkit::refine
