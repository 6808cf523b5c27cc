#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/refine/config.hpp"

namespace gaitkit::refine {

enum class SwapOrientation {
  Seeded,           // seed-frame labelling kept, confirmed by the arm-leg cue
  FlippedByArmCue,  // arm-leg cue showed the seed labelling to be inverted
  Ambiguous,        // cue unavailable or weak; majority labelling kept
};

struct SwapResult {
  TrajectorySet trajectories;
  std::vector<long> swapped_frames;  // frames whose left/right lower-limb labels were exchanged
  std::vector<long> review_frames;   // frames inside windows where the arm-leg cue disagrees
  SwapOrientation orientation = SwapOrientation::Ambiguous;
  std::optional<long> seed_frame;    // empty: SwapSeedNotFound, correction skipped
  double arm_correlation = 0.0;      // mean wrist/ankle velocity correlation after correction
};

namespace detail {

struct Pt {
  double x, y;
};

inline double dist(Pt a, Pt b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline void swap_lower_limbs(TrajectorySet& traj, std::size_t t) {
  for (Segment seg : kLimbSegments) {
    const JointId l = joint_of(Side::Left, seg);
    const JointId r = joint_of(Side::Right, seg);
    if (!traj.has(l) || !traj.has(r)) continue;
    auto& a = traj.at(l);
    auto& b = traj.at(r);
    std::swap(a.x[t], b.x[t]);
    std::swap(a.y[t], b.y[t]);
    std::swap(a.confidence[t], b.confidence[t]);
    std::swap(a.state[t], b.state[t]);
  }
}

/// Constant-velocity predictor over the last two accepted observations of one
/// labelled joint.
struct Track {
  std::optional<std::pair<double, Pt>> last, prev;

  void accept(double t, Pt p) {
    prev = last;
    last = std::make_pair(t, p);
  }
  [[nodiscard]] std::optional<Pt> predict(double t) const {
    if (!last) return std::nullopt;
    if (!prev) return last->second;
    const double dt = last->first - prev->first;
    const double k = (t - last->first) / dt;
    return Pt{last->second.x + k * (last->second.x - prev->second.x),
              last->second.y + k * (last->second.y - prev->second.y)};
  }
};

inline std::optional<Pt> observed(const TrajectorySet& traj, JointId j, std::size_t t) {
  if (!traj.has(j)) return std::nullopt;
  const auto& s = traj.at(j);
  if (!s.valid(t)) return std::nullopt;
  return Pt{s.x[t], s.y[t]};
}

/// Walks from the seed in one direction, deciding per frame whether the
/// labels must be exchanged. Returns the frames decided as flipped.
inline std::vector<std::size_t> propagate(const TrajectorySet& traj, std::size_t seed, int step) {
  std::array<Track, 4> left{}, right{};
  auto accept = [&](std::size_t t, bool flip) {
    for (std::size_t k = 0; k < kLimbSegments.size(); ++k) {
      auto pl = observed(traj, joint_of(Side::Left, kLimbSegments[k]), t);
      auto pr = observed(traj, joint_of(Side::Right, kLimbSegments[k]), t);
      if (flip) std::swap(pl, pr);
      if (pl) left[k].accept(static_cast<double>(t), *pl);
      if (pr) right[k].accept(static_cast<double>(t), *pr);
    }
  };
  accept(seed, false);
  std::vector<std::size_t> flipped;
  for (long t = static_cast<long>(seed) + step; t >= 0 && t < static_cast<long>(traj.length); t += step) {
    const auto ut = static_cast<std::size_t>(t);
    double keep = 0.0, swap = 0.0;
    for (std::size_t k = 0; k < kLimbSegments.size(); ++k) {
      const auto predl = left[k].predict(static_cast<double>(t));
      const auto predr = right[k].predict(static_cast<double>(t));
      if (!predl || !predr) continue;
      const auto pl = observed(traj, joint_of(Side::Left, kLimbSegments[k]), ut);
      const auto pr = observed(traj, joint_of(Side::Right, kLimbSegments[k]), ut);
      if (pl) {
        keep += dist(*pl, *predl);
        swap += dist(*pl, *predr);
      }
      if (pr) {
        keep += dist(*pr, *predr);
        swap += dist(*pr, *predl);
      }
    }
    const bool flip = swap < keep;
    if (flip) flipped.push_back(ut);
    accept(ut, flip);
  }
  return flipped;
}

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 3) return std::nullopt;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 1e-12 || sbb <= 1e-12) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

/// Horizontal position relative to the pelvis (MidHip, else mean of hips).
inline std::optional<double> relative_x(const TrajectorySet& traj, JointId j, std::size_t t) {
  const auto p = observed(traj, j, t);
  if (!p) return std::nullopt;
  if (auto mid = observed(traj, JointId::MidHip, t)) return p->x - mid->x;
  auto lh = observed(traj, JointId::LHip, t);
  auto rh = observed(traj, JointId::RHip, t);
  if (lh && rh) return p->x - 0.5 * (lh->x + rh->x);
  return std::nullopt;
}

/// Correlation between pelvis-relative horizontal velocities of a wrist and
/// the ipsilateral ankle over frames [begin, end). In normal gait the arm
/// swings against the same-side leg, so a correct labelling correlates
/// negatively.
inline std::optional<double> arm_leg_correlation(const TrajectorySet& traj, Side side, std::size_t begin,
                                                 std::size_t end) {
  std::vector<double> vw, va;
  const JointId wrist = wrist_of(side);
  const JointId ankle = joint_of(side, Segment::Ankle);
  for (std::size_t t = begin + 1; t < end; ++t) {
    auto w0 = relative_x(traj, wrist, t - 1), w1 = relative_x(traj, wrist, t);
    auto a0 = relative_x(traj, ankle, t - 1), a1 = relative_x(traj, ankle, t);
    if (!w0 || !w1 || !a0 || !a1) continue;
    vw.push_back(*w1 - *w0);
    va.push_back(*a1 - *a0);
  }
  return pearson(vw, va);
}

inline std::optional<double> mean_arm_leg_correlation(const TrajectorySet& traj, std::size_t begin, std::size_t end) {
  double sum = 0;
  int n = 0;
  for (Side s : {Side::Left, Side::Right}) {
    if (auto c = arm_leg_correlation(traj, s, begin, end)) {
      sum += *c;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace detail

/// Repairs left/right label exchanges of the lower limbs.
///
/// Tracking is seeded at the frame of largest left-right ankle separation and
/// walks outward in both directions; at each frame the two labellings of
/// (hip, knee, ankle, toe) are scored by summed distance to a constant-velocity
/// prediction from the last accepted frames, and the cheaper one is kept. The
/// overall orientation is then checked with the arm-leg cue: ipsilateral wrist
/// and ankle move in anti-phase, so a positive correlation means the seed
/// labelling itself was inverted. Without a usable cue the labelling that
/// flips fewer frames wins and the result is reported ambiguous.
inline SwapResult correct_swaps(const TrajectorySet& input, const RefineConfig& cfg = {}) {
  SwapResult result;
  result.trajectories = input;
  TrajectorySet& traj = result.trajectories;

  std::optional<std::size_t> seed;
  double best = -1.0;
  for (std::size_t t = 0; t < traj.length; ++t) {
    auto l = detail::observed(traj, JointId::LAnkle, t);
    auto r = detail::observed(traj, JointId::RAnkle, t);
    if (!l || !r) continue;
    const double d = detail::dist(*l, *r);
    if (d > best) {
      best = d;
      seed = t;
    }
  }
  if (!seed || best <= cfg.swap_noise_floor_px) return result;
  result.seed_frame = traj.frame_at(*seed);

  std::vector<bool> flip(traj.length, false);
  for (int step : {1, -1}) {
    for (auto t : detail::propagate(input, *seed, step)) flip[t] = true;
  }

  auto apply = [&](const std::vector<bool>& f) {
    TrajectorySet out = input;
    for (std::size_t t = 0; t < out.length; ++t) {
      if (f[t]) detail::swap_lower_limbs(out, t);
    }
    return out;
  };
  traj = apply(flip);

  bool invert = false;
  const auto corr = detail::mean_arm_leg_correlation(traj, 0, traj.length);
  if (corr && std::abs(*corr) >= cfg.arm_cue_margin) {
    invert = *corr > 0.0;
    result.orientation = invert ? SwapOrientation::FlippedByArmCue : SwapOrientation::Seeded;
  } else {
    std::size_t labelled = 0, flipped = 0;
    for (std::size_t t = 0; t < traj.length; ++t) {
      bool any = false;
      for (JointId j : kLowerLimbJoints) any = any || (input.has(j) && input.at(j).valid(t));
      labelled += any;
      flipped += any && flip[t];
    }
    invert = 2 * flipped > labelled;
    result.orientation = SwapOrientation::Ambiguous;
  }
  if (invert) {
    for (std::size_t t = 0; t < flip.size(); ++t) flip[t] = !flip[t];
    traj = apply(flip);
  }
  result.arm_correlation = corr ? (invert ? -*corr : *corr) : 0.0;

  for (std::size_t t = 0; t < traj.length; ++t) {
    if (flip[t]) result.swapped_frames.push_back(traj.frame_at(t));
  }

  // Windowed arm-leg check on the corrected labels.
  const std::size_t win = std::min(cfg.arm_cue_window, traj.length);
  std::set<long> review;
  if (win >= 3) {
    for (std::size_t begin = 0; begin + win <= traj.length; begin += std::max<std::size_t>(1, win / 2)) {
      const auto c = detail::mean_arm_leg_correlation(traj, begin, begin + win);
      if (c && *c > cfg.arm_cue_margin) {
        for (std::size_t t = begin; t < begin + win; ++t) review.insert(traj.frame_at(t));
      }
    }
  }
  result.review_frames.assign(review.begin(), review.end());
  return result;
}

}  // namespace gaitkit::refine
