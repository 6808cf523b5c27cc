#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gaitkit/core/error.hpp"

namespace gaitkit::edgemap {

/// Row-major interleaved 8-bit image.
template <std::size_t Channels>
class Image {
 public:
  static constexpr std::size_t channels = Channels;

  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0)
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}
  Image(int width, int height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) {
      throw Error(ErrorCode::InvalidArgument, "pixel buffer does not match image dimensions");
    }
  }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::uint8_t at(int x, int y, std::size_t c = 0) const { return data_[offset(x, y) + c]; }
  std::uint8_t& at(int x, int y, std::size_t c = 0) { return data_[offset(x, y) + c]; }

  [[nodiscard]] std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * Channels;
  }
  [[nodiscard]] std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * Channels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

using GrayImage = Image<1>;
using RgbImage = Image<3>;

/// Luma = round(0.299 R + 0.587 G + 0.114 B).
inline GrayImage to_grayscale(const RgbImage& rgb) {
  if (rgb.empty()) throw Error(ErrorCode::InvalidArgument, "zero-dimension image");
  GrayImage out(rgb.width(), rgb.height());
  auto src = rgb.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double luma = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

/// Bilinear resampling with pixel-centre alignment and clamped borders.
template <std::size_t C>
Image<C> resize_bilinear(const Image<C>& src, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
  if (src.empty()) throw Error(ErrorCode::InvalidArgument, "zero-dimension image");
  if (src.width() == target_w && src.height() == target_h) return src;

  Image<C> out(target_w, target_h);
  const double sx = static_cast<double>(src.width()) / target_w;
  const double sy = static_cast<double>(src.height()) / target_h;

  struct Tap {
    int i0, i1;
    double w1;
  };
  auto taps = [](int n_out, double scale, int n_in) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
      double s = (o + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(s));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[static_cast<std::size_t>(o)] = {i0, i1, s - i0};
    }
    return t;
  };
  const auto tx = taps(target_w, sx, src.width());
  const auto ty = taps(target_h, sy, src.height());

  for (int y = 0; y < target_h; ++y) {
    const auto& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_w; ++x) {
      const auto& vx = tx[static_cast<std::size_t>(x)];
      for (std::size_t c = 0; c < C; ++c) {
        const double top = src.at(vx.i0, vy.i0, c) * (1.0 - vx.w1) + src.at(vx.i1, vy.i0, c) * vx.w1;
        const double bot = src.at(vx.i0, vy.i1, c) * (1.0 - vx.w1) + src.at(vx.i1, vy.i1, c) * vx.w1;
        const double v = top * (1.0 - vy.w1) + bot * vy.w1;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

/// Binary edge mask with the dimensions of its source image.
class EdgeMap {
 public:
  EdgeMap() = default;
  EdgeMap(int width, int height) : width_(width), height_(height), mask_(static_cast<std::size_t>(width) * height, 0) {}

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool is_edge(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set(int x, int y, bool edge) { mask_[index(x, y)] = edge ? 1 : 0; }

  [[nodiscard]] std::size_t count() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
  }

  /// 8-bit rendering with values {0, 255}.
  [[nodiscard]] GrayImage to_image() const {
    GrayImage img(width_, height_);
    auto d = img.data();
    for (std::size_t i = 0; i < mask_.size(); ++i) d[i] = mask_[i] ? 255 : 0;
    return img;
  }

  friend bool operator==(const EdgeMap&, const EdgeMap&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> mask_;
};

}  // namespace gaitkit::edgemap
