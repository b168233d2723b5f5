#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fgan/errors.hpp"

namespace fgan {

/// Interleaved 8-bit RGB image, row-major from the top-left corner.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes

  Image() = default;
  Image(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw ConfigError("image extents must be >= 1");
    pixels.assign(static_cast<std::size_t>(3) * w * h, 0);
  }

  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x) * 3;
  }

  std::array<std::uint8_t, 3> rgb(int x, int y) const {
    const std::size_t o = offset(x, y);
    return {pixels[o], pixels[o + 1], pixels[o + 2]};
  }

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t o = offset(x, y);
    pixels[o] = r;
    pixels[o + 1] = g;
    pixels[o + 2] = b;
  }

  bool same_size(const Image& other) const {
    return width == other.width && height == other.height;
  }
};

}  // namespace fgan
