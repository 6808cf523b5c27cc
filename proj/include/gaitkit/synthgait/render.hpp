#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "gaitkit/core/types.hpp"
#include "gaitkit/edgemap/image.hpp"

namespace gaitkit::synthgait {

/// Stick-figure frame: dark limbs of `thickness_px` on a light background.
/// Enough structure for edge detection to produce a figure outline.
inline edgemap::RgbImage render_stick_figure(const TrajectorySet& traj, std::size_t t, ImageSize size,
                                             double thickness_px = 6.0) {
  edgemap::RgbImage img(size.width, size.height, 205);
  auto draw = [&](JointId a, JointId b, std::uint8_t shade) {
    const auto p = traj.keypoint(a, t), q = traj.keypoint(b, t);
    if (!p.valid || !q.valid) return;
    const double r = thickness_px / 2.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(p.x, q.x) - r)));
    const int x1 = std::min(size.width - 1, static_cast<int>(std::ceil(std::max(p.x, q.x) + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(p.y, q.y) - r)));
    const int y1 = std::min(size.height - 1, static_cast<int>(std::ceil(std::max(p.y, q.y) + r)));
    const double dx = q.x - p.x, dy = q.y - p.y, len2 = dx * dx + dy * dy;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double u = len2 > 0 ? ((x - p.x) * dx + (y - p.y) * dy) / len2 : 0.0;
        u = std::clamp(u, 0.0, 1.0);
        const double ex = p.x + u * dx - x, ey = p.y + u * dy - y;
        if (ex * ex + ey * ey <= r * r) {
          for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = shade;
        }
      }
    }
  };
  draw(JointId::Neck, JointId::MidHip, 40);
  for (Side s : {Side::Right, Side::Left}) {
    const std::uint8_t shade = s == Side::Left ? 30 : 80;
    draw(JointId::MidHip, joint_of(s, Segment::Hip), shade);
    draw(joint_of(s, Segment::Hip), joint_of(s, Segment::Knee), shade);
    draw(joint_of(s, Segment::Knee), joint_of(s, Segment::Ankle), shade);
    draw(joint_of(s, Segment::Ankle), joint_of(s, Segment::Toe), shade);
    draw(JointId::Neck, wrist_of(s), shade);
  }
  return img;
}

}  // namespace gaitkit::synthgait
