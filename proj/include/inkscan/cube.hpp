#ifndef INKSCAN_CUBE_HPP
#define INKSCAN_CUBE_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "inkscan/error.hpp"
#include "inkscan/image.hpp"
#include "inkscan/netpbm.hpp"

namespace inkscan {

/// A hyperspectral document: `bands` grayscale slices of `width` x `height`.
///
/// Storage is band-major: the value of pixel (x, y) in band b (0-based) lives
/// at `(b * height + y) * width + x`, so each band is one contiguous row-major
/// image. Public band numbering (CLI, `band_image`) is 1-based.
class HyperCube {
 public:
  HyperCube(std::size_t width, std::size_t height, std::size_t bands, std::vector<std::uint8_t> data)
      : width_(width), height_(height), bands_(bands), data_(std::move(data)) {
    if (width_ == 0 || height_ == 0 || bands_ == 0)
      throw Error(ErrorKind::InvalidArgument, "cube dimensions must be >= 1");
    if (data_.size() != width_ * height_ * bands_)
      throw Error(ErrorKind::InvalidArgument, "cube data length does not match width*height*bands");
  }

  /// Stacks equally sized band images in order.
  static HyperCube from_bands(const std::vector<GrayImage>& band_images) {
    if (band_images.empty()) throw Error(ErrorKind::EmptyCube, "no band images");
    const auto w = band_images.front().width;
    const auto h = band_images.front().height;
    std::vector<std::uint8_t> data;
    data.reserve(w * h * band_images.size());
    for (std::size_t b = 0; b < band_images.size(); ++b) {
      const auto& img = band_images[b];
      if (img.width != w || img.height != h)
        throw Error(ErrorKind::DimensionMismatch,
                    "band " + std::to_string(b + 1) + ": expected " + std::to_string(w) + "x" +
                        std::to_string(h) + ", found " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
      data.insert(data.end(), img.pixels.begin(), img.pixels.end());
    }
    return HyperCube(w, h, band_images.size(), std::move(data));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  /// 0-based band.
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t band) const {
    return data_[(band * height_ + y) * width_ + x];
  }

  /// Contiguous row-major view of one 0-based band.
  std::span<const std::uint8_t> band_view(std::size_t band) const {
    return std::span<const std::uint8_t>(data_).subspan(band * pixel_count(), pixel_count());
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const HyperCube&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::size_t bands_;
  std::vector<std::uint8_t> data_;
};

struct ManifestEntry {
  std::size_t band_index = 0;  // 1-based
  std::filesystem::path path;
};

/// Ordered band list. Text form: one `<band_index>\t<path>` line per band;
/// blank lines and lines starting with '#' are ignored. Relative paths are
/// resolved against the manifest's directory.
struct CubeManifest {
  std::vector<ManifestEntry> entries;

  /// Sorts by band index and checks indices are exactly 1..B and paths distinct.
  void normalize() {
    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.band_index < b.band_index; });
    std::set<std::filesystem::path> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].band_index != i + 1)
        throw Error(ErrorKind::InvalidManifest,
                    "band indices must be exactly 1.." + std::to_string(entries.size()) +
                        " (gap or duplicate near " + std::to_string(entries[i].band_index) + ")");
      if (!seen.insert(entries[i].path.lexically_normal()).second)
        throw Error(ErrorKind::InvalidManifest, "duplicate path " + entries[i].path.string());
    }
  }
};

inline CubeManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open manifest " + path.string());
  CubeManifest manifest;
  const auto base = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      throw Error(ErrorKind::InvalidManifest,
                  path.string() + ":" + std::to_string(lineno) + ": expected <index>\\t<path>");
    const std::string index_text = line.substr(0, tab);
    if (!std::all_of(index_text.begin(), index_text.end(), [](unsigned char c) { return std::isdigit(c); }))
      throw Error(ErrorKind::InvalidManifest,
                  path.string() + ":" + std::to_string(lineno) + ": bad band index '" + index_text + "'");
    std::filesystem::path entry = line.substr(tab + 1);
    if (entry.is_relative()) entry = base / entry;
    manifest.entries.push_back({std::stoul(index_text), entry});
  }
  manifest.normalize();
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyCube, "manifest lists no bands");
  return manifest;
}

/// Writes `entries` with paths relative to the manifest's directory when possible.
inline void write_manifest(const CubeManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    auto rel = e.path.is_absolute() ? e.path.lexically_relative(base) : e.path;
    if (rel.empty()) rel = e.path;
    out << e.band_index << '\t' << rel.generic_string() << '\n';
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

/// Filename comparison treating digit runs as numbers, so "band2" < "band10".
inline bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // Compare magnitudes without overflow: strip leading zeros, then length, then text.
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int c = a.compare(is, ie - is, b, js, je - js);
      if (c != 0) return c < 0;
      if (ie - i != je - j) return ie - i < je - j;  // fewer leading zeros first
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

/// Band files of a bare directory: every regular `*.pgm` file, natural order.
inline CubeManifest manifest_from_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  CubeManifest manifest;
  for (std::size_t i = 0; i < files.size(); ++i) manifest.entries.push_back({i + 1, files[i]});
  return manifest;
}

inline HyperCube load_cube(const CubeManifest& manifest) {
  if (manifest.entries.empty()) throw Error(ErrorKind::EmptyCube, "no band files");
  std::vector<GrayImage> bands;
  bands.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    if (!std::filesystem::is_regular_file(e.path))
      throw Error(ErrorKind::MissingBandFile,
                  "band " + std::to_string(e.band_index) + ": " + e.path.string());
    bands.push_back(netpbm::read_pgm(e.path));
  }
  return HyperCube::from_bands(bands);
}

/// `source` is a manifest file, or a directory: its `manifest.txt` when
/// present, otherwise every `*.pgm` in natural filename order.
inline HyperCube load_cube(const std::filesystem::path& source) {
  std::error_code ec;
  if (std::filesystem::is_directory(source, ec)) {
    if (std::filesystem::is_regular_file(source / "manifest.txt", ec))
      return load_cube(read_manifest(source / "manifest.txt"));
    const auto manifest = manifest_from_directory(source);
    if (manifest.entries.empty())
      throw Error(ErrorKind::EmptyCube, "no .pgm band files in " + source.string());
    return load_cube(manifest);
  }
  if (!std::filesystem::exists(source, ec))
    throw Error(ErrorKind::MissingBandFile, "no such file or directory: " + source.string());
  return load_cube(read_manifest(source));
}

/// 1-based band slice, unscaled.
inline GrayImage band_image(const HyperCube& cube, std::size_t band_index) {
  if (band_index < 1 || band_index > cube.bands())
    throw Error(ErrorKind::BandOutOfRange, "band " + std::to_string(band_index) + " not in 1.." +
                                               std::to_string(cube.bands()));
  const auto view = cube.band_view(band_index - 1);
  return GrayImage(cube.width(), cube.height(), std::vector<std::uint8_t>(view.begin(), view.end()));
}

struct ReferenceMode {
  enum class Kind { Mean, SingleBand };
  Kind kind = Kind::Mean;
  std::size_t band = 0;  // 1-based, SingleBand only

  static ReferenceMode mean() { return {}; }
  static ReferenceMode single_band(std::size_t band_index) { return {Kind::SingleBand, band_index}; }
};

/// The composite image thresholding runs on. Mean mode rounds half up.
inline GrayImage reference_image(const HyperCube& cube, ReferenceMode mode = ReferenceMode::mean()) {
  if (mode.kind == ReferenceMode::Kind::SingleBand) return band_image(cube, mode.band);

  const std::size_t n = cube.pixel_count();
  const std::uint64_t bands = cube.bands();
  std::vector<std::uint64_t> sums(n, 0);
  for (std::size_t b = 0; b < bands; ++b) {
    const auto view = cube.band_view(b);
    for (std::size_t i = 0; i < n; ++i) sums[i] += view[i];
  }
  GrayImage out(cube.width(), cube.height());
  // floor(sum / B + 1/2) == floor((2 * sum + B) / (2 * B))
  for (std::size_t i = 0; i < n; ++i)
    out.pixels[i] = static_cast<std::uint8_t>((2 * sums[i] + bands) / (2 * bands));
  return out;
}

inline void write_gray_pgm(const GrayImage& image, const std::filesystem::path& path) {
  netpbm::write_pgm(image, path);
}

}  // namespace inkscan

#endif  // INKSCAN_CUBE_HPP
