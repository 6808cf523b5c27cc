#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "gaitkit/core/types.hpp"
#include "gaitkit/refine/config.hpp"

namespace gaitkit::refine {

/// One biquad, normalized so a0 = 1.
struct Biquad {
  double b0, b1, b2, a1, a2;

  [[nodiscard]] double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Low-pass Butterworth as cascaded second-order sections, designed with the
/// bilinear transform and frequency prewarping.
inline std::vector<Biquad> design_butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
  if (order <= 0 || order % 2 != 0) throw Error(ErrorCode::InvalidArgument, "order must be positive and even");
  if (!(sample_rate > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "cutoff must lie strictly between 0 and Nyquist");
  }
  const double w = std::tan(std::numbers::pi * cutoff_hz / sample_rate);  // prewarped, units of 2*fs
  const double w2 = w * w;
  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double zeta = std::sin(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order));
    const double a0 = 1.0 + 2.0 * zeta * w + w2;
    sections.push_back({w2 / a0, 2.0 * w2 / a0, w2 / a0, (2.0 * w2 - 2.0) / a0, (1.0 - 2.0 * zeta * w + w2) / a0});
  }
  return sections;
}

/// Causal cascade filter. The state starts at the steady state for a constant
/// input equal to the first sample, so a constant series passes unchanged.
inline std::vector<double> sosfilt(std::span<const Biquad> sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  double level = y.front();
  for (const auto& s : sections) {
    const double out_level = level * s.dc_gain();
    double z2 = s.b2 * level - s.a2 * out_level;
    double z1 = s.b1 * level - s.a1 * out_level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = out_level;
  }
  return y;
}

inline std::size_t filtfilt_padding(int order) { return 3 * static_cast<std::size_t>(order); }

/// Forward-backward filtering with odd reflective padding of 3*order samples
/// at each end. Zero phase; squared magnitude response.
inline std::vector<double> sosfiltfilt(std::span<const Biquad> sections, std::span<const double> x, int order) {
  const std::size_t pad = filtfilt_padding(order);
  const std::size_t n = x.size();
  if (n <= pad) {
    throw Error(ErrorCode::SpanTooShort,
                "series of " + std::to_string(n) + " samples needs more than " + std::to_string(pad));
  }
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto fwd = sosfilt(sections, ext);
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = sosfilt(sections, fwd);
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad), bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

/// Low-pass filters a fully valid series.
inline std::vector<double> butterworth_lowpass(std::span<const double> series, double sample_rate, double cutoff_hz,
                                               int order, bool zero_phase) {
  const auto sections = design_butterworth_lowpass(order, cutoff_hz, sample_rate);
  if (zero_phase) return sosfiltfilt(sections, series, order);
  if (series.empty()) throw Error(ErrorCode::SpanTooShort, "empty series");
  return sosfilt(sections, series);
}

/// Result of filtering every contiguous valid run of every coordinate.
struct FilterResult {
  TrajectorySet trajectories;
  std::vector<std::pair<JointId, long>> unfiltered_runs;  // (joint, first frame of a run too short to filter)
};

inline FilterResult filter_trajectories(TrajectorySet traj, const RefineConfig& cfg) {
  FilterResult result;
  const auto sections = design_butterworth_lowpass(cfg.butterworth_order, cfg.cutoff_hz, traj.sample_rate);
  const std::size_t min_len = cfg.zero_phase ? filtfilt_padding(cfg.butterworth_order) + 1 : 1;
  for (auto& [joint, s] : traj.joints) {
    std::size_t t = 0;
    while (t < s.size()) {
      if (!s.valid(t)) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end < s.size() && s.valid(end)) ++end;
      if (end - t < min_len) {
        result.unfiltered_runs.emplace_back(joint, traj.frame_at(t));
      } else {
        for (auto* coord : {&s.x, &s.y}) {
          std::span<const double> run(coord->data() + t, end - t);
          auto out = cfg.zero_phase ? sosfiltfilt(sections, run, cfg.butterworth_order) : sosfilt(sections, run);
          std::copy(out.begin(), out.end(), coord->begin() + static_cast<std::ptrdiff_t>(t));
        }
      }
      t = end;
    }
  }
  result.trajectories = std::move(traj);
  return result;
}

}  // namespace gaitkit::refine
