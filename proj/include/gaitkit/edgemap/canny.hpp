#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gaitkit/edgemap/image.hpp"

namespace gaitkit::edgemap {

struct CannyParams {
  double low_threshold = 100.0;   // gradient magnitude, intensity units
  double high_threshold = 200.0;
  double sigma = 1.4;
  int kernel_size = 5;

  void validate() const {
    if (!(low_threshold > 0.0) || !(low_threshold <= high_threshold)) {
      throw Error(ErrorCode::InvalidArgument, "canny thresholds must satisfy 0 < low <= high");
    }
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "canny sigma must be positive");
    if (kernel_size < 3 || kernel_size % 2 == 0) {
      throw Error(ErrorCode::InvalidArgument, "canny kernel size must be odd and >= 3");
    }
  }
};

namespace detail {

// Integer Gaussian taps (scaled by 256). Integer arithmetic makes the whole
// gradient stage exact, so a constant intensity offset cancels bit-for-bit.
inline std::vector<std::int64_t> gaussian_taps(double sigma, int size) {
  const int r = size / 2;
  std::vector<std::int64_t> taps(static_cast<std::size_t>(size));
  for (int i = -r; i <= r; ++i) {
    taps[static_cast<std::size_t>(i + r)] =
        std::max<std::int64_t>(1, std::llround(256.0 * std::exp(-(i * i) / (2.0 * sigma * sigma))));
  }
  return taps;
}

inline int clamp_index(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace detail

/// Gradient magnitude (L2 of 3x3 Sobel responses after Gaussian smoothing),
/// in intensity units. Exposed for diagnostics and tests.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<std::int64_t> gx, gy;
  std::vector<double> magnitude;
};

inline GradientField gradient_field(const GrayImage& gray, double sigma, int kernel_size) {
  const int w = gray.width();
  const int h = gray.height();
  const auto taps = detail::gaussian_taps(sigma, kernel_size);
  const int r = kernel_size / 2;
  std::int64_t tap_sum = 0;
  for (auto t : taps) tap_sum += t;
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

  std::vector<std::int64_t> horiz(n), blur(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int64_t acc = 0;
      for (int k = -r; k <= r; ++k) acc += taps[static_cast<std::size_t>(k + r)] * gray.at(detail::clamp_index(x + k, w), y);
      horiz[idx(x, y)] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::int64_t acc = 0;
      for (int k = -r; k <= r; ++k) acc += taps[static_cast<std::size_t>(k + r)] * horiz[idx(x, detail::clamp_index(y + k, h))];
      blur[idx(x, y)] = acc;
    }
  }

  GradientField g;
  g.width = w;
  g.height = h;
  g.gx.resize(n);
  g.gy.resize(n);
  g.magnitude.resize(n);
  const double norm = static_cast<double>(tap_sum) * static_cast<double>(tap_sum);
  auto b = [&](int x, int y) { return blur[idx(detail::clamp_index(x, w), detail::clamp_index(y, h))]; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int64_t gx = (b(x + 1, y - 1) + 2 * b(x + 1, y) + b(x + 1, y + 1)) -
                              (b(x - 1, y - 1) + 2 * b(x - 1, y) + b(x - 1, y + 1));
      const std::int64_t gy = (b(x - 1, y + 1) + 2 * b(x, y + 1) + b(x + 1, y + 1)) -
                              (b(x - 1, y - 1) + 2 * b(x, y - 1) + b(x + 1, y - 1));
      const auto i = idx(x, y);
      g.gx[i] = gx;
      g.gy[i] = gy;
      const double fx = static_cast<double>(gx) / norm;
      const double fy = static_cast<double>(gy) / norm;
      g.magnitude[i] = std::sqrt(fx * fx + fy * fy);
    }
  }
  return g;
}

/// Canny edge detection: Gaussian blur, Sobel gradients, non-maximum
/// suppression over four direction bins, then hysteresis with 8-connectivity.
/// The outermost pixel ring is never an edge.
inline EdgeMap canny(const GrayImage& gray, const CannyParams& params = {}) {
  params.validate();
  if (gray.width() < params.kernel_size || gray.height() < params.kernel_size) {
    throw Error(ErrorCode::ImageTooSmall, "image smaller than the blur kernel");
  }
  const int w = gray.width();
  const int h = gray.height();
  const GradientField g = gradient_field(gray, params.sigma, params.kernel_size);
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

  // 0: weak/no, 1: weak candidate, 2: strong.
  std::vector<std::uint8_t> cls(g.magnitude.size(), 0);
  constexpr double kTan22 = 0.41421356237309503;  // tan(22.5 deg)
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const auto i = idx(x, y);
      const double m = g.magnitude[i];
      if (m < params.low_threshold) continue;
      const double ax = std::abs(static_cast<double>(g.gx[i]));
      const double ay = std::abs(static_cast<double>(g.gy[i]));
      int dx = 0, dy = 0;
      if (ay <= ax * kTan22) {
        dx = 1;
      } else if (ax <= ay * kTan22) {
        dy = 1;
      } else {
        dx = 1;
        dy = ((g.gx[i] > 0) == (g.gy[i] > 0)) ? 1 : -1;
      }
      // Ties along the gradient keep the pixel on the negative side, so a
      // symmetric ridge yields exactly one pixel.
      const double before = g.magnitude[idx(x - dx, y - dy)];
      const double after = g.magnitude[idx(x + dx, y + dy)];
      if (m > before && m >= after) cls[i] = m >= params.high_threshold ? 2 : 1;
    }
  }

  EdgeMap edges(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (cls[idx(x, y)] == 2 && !edges.is_edge(x, y)) {
        edges.set(x, y, true);
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int oy = -1; oy <= 1; ++oy) {
            for (int ox = -1; ox <= 1; ++ox) {
              const int nx = cx + ox, ny = cy + oy;
              if (nx < 1 || ny < 1 || nx >= w - 1 || ny >= h - 1) continue;
              if (cls[idx(nx, ny)] != 0 && !edges.is_edge(nx, ny)) {
                edges.set(nx, ny, true);
                stack.emplace_back(nx, ny);
              }
            }
          }
        }
      }
    }
  }
  return edges;
}

}  // namespace gaitkit::edgemap
