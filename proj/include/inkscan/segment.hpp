#ifndef INKSCAN_SEGMENT_HPP
#define INKSCAN_SEGMENT_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "inkscan/binarize.hpp"
#include "inkscan/error.hpp"
#include "inkscan/image.hpp"
#include "inkscan/netpbm.hpp"
#include "inkscan/rng.hpp"

namespace inkscan {

/// Per-pixel labels: 0 = background, 1..k = cluster id + 1.
struct SegmentationMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t k = 0;
  std::vector<std::uint16_t> labels;

  SegmentationMap() = default;
  SegmentationMap(std::size_t w, std::size_t h, std::size_t clusters)
      : width(w), height(h), k(clusters), labels(w * h, 0) {}

  std::uint16_t at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }
  std::uint16_t& at(std::size_t x, std::size_t y) { return labels[y * width + x]; }

  bool operator==(const SegmentationMap&) const = default;
};

struct Palette {
  Rgb background{0, 0, 0};
  std::vector<Rgb> cluster_colors;

  /// Black background; red, green, blue, yellow, magenta, cyan, orange,
  /// purple, then seeded colours distinct from all earlier ones.
  static Palette standard(std::size_t k) {
    static constexpr Rgb base[] = {{255, 0, 0},   {0, 255, 0},   {0, 0, 255},   {255, 255, 0},
                                   {255, 0, 255}, {0, 255, 255}, {255, 165, 0}, {128, 0, 128}};
    Palette p;
    std::set<Rgb> used{p.background};
    for (std::size_t i = 0; i < k && i < std::size(base); ++i) {
      p.cluster_colors.push_back(base[i]);
      used.insert(base[i]);
    }
    SplitMix64 rng(0x5EEDC0102ULL);
    while (p.cluster_colors.size() < k) {
      const auto v = rng.next();
      const Rgb c{static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                  static_cast<std::uint8_t>(v >> 16)};
      if (used.insert(c).second) p.cluster_colors.push_back(c);
    }
    return p;
  }
};

/// Scatters per-sample labels (0-based, row-major foreground order) onto the page.
inline SegmentationMap build_label_map(const ForegroundMask& mask, const std::vector<std::size_t>& labels,
                                       std::size_t k) {
  const std::size_t fg = mask.count();
  if (labels.size() != fg)
    throw Error(ErrorKind::CountMismatch, std::to_string(labels.size()) + " labels for " +
                                              std::to_string(fg) + " foreground pixels");
  if (k > 65534) throw Error(ErrorKind::TooManyClusters, "k = " + std::to_string(k));
  SegmentationMap map(mask.width, mask.height, k);
  std::size_t next = 0;
  for (std::size_t i = 0; i < mask.flags.size(); ++i) {
    if (!mask.flags[i]) continue;
    if (labels[next] >= k)
      throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(labels[next]) + " >= k");
    map.labels[i] = static_cast<std::uint16_t>(labels[next] + 1);
    ++next;
  }
  return map;
}

inline RgbImage render_segmentation(const SegmentationMap& map, const Palette& palette) {
  if (palette.cluster_colors.size() < map.k)
    throw Error(ErrorKind::PaletteTooSmall, std::to_string(palette.cluster_colors.size()) +
                                                " colours for k = " + std::to_string(map.k));
  RgbImage out(map.width, map.height, palette.background);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    const auto l = map.labels[i];
    if (l == 0) continue;
    if (l > map.k) throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(l) + " > k");
    out.pixels[i] = palette.cluster_colors[l - 1];
  }
  return out;
}

inline void write_rgb_ppm(const RgbImage& image, const std::filesystem::path& path) {
  netpbm::write_ppm(image, path);
}

/// Raw labels as P5 gray values.
inline void write_label_pgm(const SegmentationMap& map, const std::filesystem::path& path) {
  if (map.k > 255) throw Error(ErrorKind::TooManyClusters, "k = " + std::to_string(map.k) + " exceeds 255");
  GrayImage img(map.width, map.height);
  for (std::size_t i = 0; i < map.labels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(map.labels[i]);
  netpbm::write_pgm(img, path);
}

/// k is taken as the largest label present.
inline SegmentationMap read_label_pgm(const std::filesystem::path& path) {
  const auto img = netpbm::read_pgm(path);
  SegmentationMap map(img.width, img.height, 0);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    map.labels[i] = img.pixels[i];
    map.k = std::max<std::size_t>(map.k, img.pixels[i]);
  }
  return map;
}

/// Row indices kept by `export_spectra_csv`: all of them, or a seeded uniform
/// subset of `limit` rows in ascending order.
inline std::vector<std::size_t> sample_rows(std::size_t n, std::optional<std::size_t> limit, std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (!limit || *limit >= n) return rows;
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < *limit; ++i) std::swap(rows[i], rows[i + rng.below(n - i)]);
  rows.resize(*limit);
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline std::string format_shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// CSV `x,y,b1,...,bB`; values in shortest round-trip decimal form.
inline void export_spectra_csv(const SpectrumSet& set, const std::filesystem::path& path,
                               std::optional<std::size_t> sample_limit = std::nullopt, std::uint64_t seed = 0) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  std::string line = "x,y";
  for (std::size_t b = 0; b < set.bands(); ++b) line += ",b" + std::to_string(b + 1);
  out << line << '\n';
  for (auto r : sample_rows(set.count(), sample_limit, seed)) {
    line = std::to_string(set.coords[r].x) + "," + std::to_string(set.coords[r].y);
    for (double v : set.vectors.row(r)) {
      line += ',';
      line += format_shortest(v);
    }
    out << line << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

inline SpectrumSet read_spectra_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  auto bad = [&](std::size_t lineno, const std::string& why) {
    return Error(ErrorKind::UnsupportedFormat, path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y", 0) != 0) throw bad(1, "missing x,y header");
  const std::size_t bands = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 1;

  SpectrumSet set;
  set.vectors = Matrix(0, bands);
  std::vector<double> row(bands);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != bands + 2) throw bad(lineno, "wrong column count");
    PixelCoord c;
    auto parse_index = [&](std::string_view f, std::size_t& dst) {
      const auto r = std::from_chars(f.data(), f.data() + f.size(), dst);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size()) throw bad(lineno, "bad coordinate");
    };
    parse_index(fields[0], c.x);
    parse_index(fields[1], c.y);
    for (std::size_t b = 0; b < bands; ++b) {
      const auto f = fields[b + 2];
      const auto r = std::from_chars(f.data(), f.data() + f.size(), row[b]);
      if (r.ec != std::errc() || r.ptr != f.data() + f.size()) throw bad(lineno, "bad value");
    }
    set.vectors.append_row(row);
    set.coords.push_back(c);
  }
  return set;
}

}  // namespace inkscan

#endif  // INKSCAN_SEGMENT_HPP
