#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "gaitkit/core/types.hpp"

namespace gaitkit::refine {

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing knots.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> knots, std::vector<double> values)
      : t_(std::move(knots)), v_(std::move(values)) {
    const std::size_t n = t_.size();
    if (n < 2 || v_.size() != n) throw Error(ErrorCode::InvalidArgument, "spline needs matching knots and values");
    for (std::size_t i = 1; i < n; ++i) {
      if (!(t_[i] > t_[i - 1])) throw Error(ErrorCode::InvalidArgument, "spline knots must increase");
    }
    m_.assign(n, 0.0);
    if (n == 2) return;
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = t_[i] - t_[i - 1];
      const double h1 = t_[i + 1] - t_[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((v_[i + 1] - v_[i]) / h1 - (v_[i] - v_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double lower = t_[i + 1] - t_[i];  // h_{i} of row i, equals upper of row i-1
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
      m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
    }
  }

  [[nodiscard]] double operator()(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    i = std::min(i, t_.size() - 2);
    const double h = t_[i + 1] - t_[i];
    const double a = (t_[i + 1] - t) / h;
    const double b = (t - t_[i]) / h;
    return a * v_[i] + b * v_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h) / 6.0;
  }

 private:
  std::vector<double> t_, v_, m_;
};

struct InterpolationResult {
  TrajectorySet trajectories;
  std::vector<JointId> empty_series;  // joints with fewer than 4 valid samples
};

/// Fills interior runs of missing samples no longer than `max_gap` with a
/// natural cubic spline through the valid samples of that coordinate. Leading
/// and trailing runs are never extrapolated. Valid samples are not modified.
inline InterpolationResult interpolate_gaps(TrajectorySet traj, std::size_t max_gap) {
  InterpolationResult result;
  for (auto& [joint, s] : traj.joints) {
    std::vector<double> knots, xs, ys;
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (!s.valid(t)) continue;
      knots.push_back(static_cast<double>(t));
      xs.push_back(s.x[t]);
      ys.push_back(s.y[t]);
    }
    if (knots.size() < 4) {
      result.empty_series.push_back(joint);
      continue;
    }
    const NaturalCubicSpline sx(knots, std::move(xs));
    const NaturalCubicSpline sy(std::move(knots), std::move(ys));
    std::size_t t = 0;
    while (t < s.size() && !s.valid(t)) ++t;  // leading run stays missing
    while (t < s.size()) {
      if (s.valid(t)) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end < s.size() && !s.valid(end)) ++end;
      if (end < s.size() && end - t <= max_gap) {
        for (std::size_t u = t; u < end; ++u) {
          s.x[u] = sx(static_cast<double>(u));
          s.y[u] = sy(static_cast<double>(u));
          s.confidence[u] = 0.0;
          s.state[u] = SampleState::Interpolated;
        }
      }
      t = end;
    }
  }
  result.trajectories = std::move(traj);
  return result;
}

}  // namespace gaitkit::refine
