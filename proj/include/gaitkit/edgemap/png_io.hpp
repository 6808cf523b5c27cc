#pragma once

#include <cstring>
#include <filesystem>
#include <string>

#include <png.h>

#include "gaitkit/core/types.hpp"
#include "gaitkit/edgemap/image.hpp"

namespace gaitkit::edgemap {

namespace detail {

template <std::size_t C>
constexpr png_uint_32 png_format() {
  static_assert(C == 1 || C == 3, "only gray and RGB images are supported");
  return C == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
}

struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

}  // namespace detail

/// Decodes any PNG, converting to the requested channel layout. Colour
/// sources read as gray go through to_grayscale rather than libpng's
/// gamma-aware conversion, so both paths agree.
template <std::size_t C>
Image<C> read_png(const std::filesystem::path& path) {
  detail::PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.c_str())) {
    throw Error(ErrorCode::Io, "cannot read PNG " + path.string() + ": " + p.img.message);
  }
  if constexpr (C == 1) {
    if (p.img.format & PNG_FORMAT_FLAG_COLOR) return to_grayscale(read_png<3>(path));
  }
  p.img.format = detail::png_format<C>();
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, "cannot decode PNG " + path.string() + ": " + p.img.message);
  }
  return Image<C>(static_cast<int>(p.img.width), static_cast<int>(p.img.height), std::move(buf));
}

template <std::size_t C>
void write_png(const std::filesystem::path& path, const Image<C>& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  detail::PngImage p;
  p.img.width = static_cast<png_uint_32>(image.width());
  p.img.height = static_cast<png_uint_32>(image.height());
  p.img.format = detail::png_format<C>();
  auto tmp = path;
  tmp += ".tmp";
  if (!png_image_write_to_file(&p.img, tmp.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, "cannot write PNG " + path.string() + ": " + p.img.message);
  }
  std::filesystem::rename(tmp, path);
}

/// Dimensions from the PNG header without decoding pixels.
inline ImageSize png_size(const std::filesystem::path& path) {
  detail::PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.c_str())) {
    throw Error(ErrorCode::Io, "cannot read PNG " + path.string() + ": " + p.img.message);
  }
  return {static_cast<int>(p.img.width), static_cast<int>(p.img.height)};
}

}  // namespace gaitkit::edgemap
