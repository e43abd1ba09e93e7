#ifndef INKSCAN_IMAGE_HPP
#define INKSCAN_IMAGE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "inkscan/error.hpp"

namespace inkscan {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit single-channel image, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}
  GrayImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> data)
      : width(w), height(h), pixels(std::move(data)) {
    if (pixels.size() != width * height)
      throw Error(ErrorKind::InvalidArgument,
                  "pixel count " + std::to_string(pixels.size()) + " does not match " +
                      std::to_string(width) + "x" + std::to_string(height));
  }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

/// 8-bit RGB image, row-major, interleaved.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, Rgb fill = {0, 0, 0})
      : width(w), height(h), pixels(w * h, fill) {}

  const Rgb& at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  Rgb& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  bool operator==(const RgbImage&) const = default;
};

}  // namespace inkscan

#endif  // INKSCAN_IMAGE_HPP
