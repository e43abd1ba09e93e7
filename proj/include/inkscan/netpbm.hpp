#ifndef INKSCAN_NETPBM_HPP
#define INKSCAN_NETPBM_HPP

// Binary PGM (P5) and PPM (P6) with maxval 255. Headers are written as
// "P5\n<w> <h>\n255\n"; the reader accepts any whitespace and '#' comments
// between header tokens, as netpbm allows.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "inkscan/error.hpp"
#include "inkscan/image.hpp"

namespace inkscan::netpbm {

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed for " + path.string());
  return bytes;
}

inline void write_file(const std::filesystem::path& path, const std::string& header,
                       const std::uint8_t* payload, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(size));
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

struct Header {
  char kind = 0;  // '5' or '6'
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t payload_offset = 0;
};

inline Header parse_header(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorKind::UnsupportedFormat, name + ": " + why);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw fail("not a binary PGM/PPM (expected P5 or P6)");

  Header h;
  h.kind = static_cast<char>(bytes[1]);
  std::size_t pos = 2;
  auto next_number = [&]() -> std::size_t {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("malformed header");
    std::size_t value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (value > (1u << 30)) throw fail("header value too large");
      ++pos;
    }
    return value;
  };
  h.width = next_number();
  h.height = next_number();
  const std::size_t maxval = next_number();
  if (maxval != 255) throw fail("maxval " + std::to_string(maxval) + " (only 255 supported)");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("missing separator after maxval");
  h.payload_offset = pos + 1;
  if (h.width == 0 || h.height == 0) throw fail("zero image dimension");
  return h;
}

}  // namespace detail

inline void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height)
    throw Error(ErrorKind::InvalidArgument, "invalid image dimensions for " + path.string());
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  detail::write_file(path, header, image.pixels.data(), image.pixels.size());
}

inline void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height)
    throw Error(ErrorKind::InvalidArgument, "invalid image dimensions for " + path.string());
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  static_assert(sizeof(Rgb) == 3);
  detail::write_file(path, header, image.pixels.front().data(), image.pixels.size() * 3);
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto h = detail::parse_header(bytes, path.string());
  if (h.kind != '5') throw Error(ErrorKind::UnsupportedFormat, path.string() + ": expected P5");
  const std::size_t n = h.width * h.height;
  if (bytes.size() - h.payload_offset < n)
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": truncated payload");
  const auto first = bytes.begin() + static_cast<std::ptrdiff_t>(h.payload_offset);
  return GrayImage(h.width, h.height, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(n)));
}

inline RgbImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto h = detail::parse_header(bytes, path.string());
  if (h.kind != '6') throw Error(ErrorKind::UnsupportedFormat, path.string() + ": expected P6");
  const std::size_t n = h.width * h.height;
  if (bytes.size() - h.payload_offset < n * 3)
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": truncated payload");
  RgbImage image(h.width, h.height);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 3; ++c) image.pixels[i][c] = bytes[h.payload_offset + 3 * i + c];
  return image;
}

}  // namespace inkscan::netpbm

#endif  // INKSCAN_NETPBM_HPP
