#ifndef INKSCAN_BINARIZE_HPP
#define INKSCAN_BINARIZE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "inkscan/cube.hpp"
#include "inkscan/error.hpp"
#include "inkscan/image.hpp"
#include "inkscan/matrix.hpp"

namespace inkscan {

/// Per-pixel ink flags, row-major. true = foreground.
struct ForegroundMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<bool> flags;

  ForegroundMask() = default;
  ForegroundMask(std::size_t w, std::size_t h, bool fill = false) : width(w), height(h), flags(w * h, fill) {}

  bool at(std::size_t x, std::size_t y) const { return flags[y * width + x]; }
  void set(std::size_t x, std::size_t y, bool v) { flags[y * width + x] = v; }

  std::size_t count() const {
    std::size_t n = 0;
    for (bool f : flags) n += f ? 1 : 0;
    return n;
  }

  bool operator==(const ForegroundMask&) const = default;
};

enum class Polarity {
  KeepAtOrAbove,  // ink is bright: pixel >= t is foreground
  KeepBelow,      // ink is dark: pixel < t is foreground
};

struct ThresholdConfig {
  int value = 40;
  Polarity polarity = Polarity::KeepAtOrAbove;
};

inline ForegroundMask threshold_binary(const GrayImage& image, const ThresholdConfig& config) {
  if (config.value < 0 || config.value > 255)
    throw Error(ErrorKind::InvalidArgument, "threshold " + std::to_string(config.value) + " not in [0, 255]");
  if (image.pixels.size() != image.width * image.height)
    throw Error(ErrorKind::InvalidArgument, "malformed image");
  ForegroundMask mask(image.width, image.height);
  const bool above = config.polarity == Polarity::KeepAtOrAbove;
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const bool at_or_above = image.pixels[i] >= config.value;
    mask.flags[i] = above ? at_or_above : !at_or_above;
  }
  return mask;
}

/// Otsu's threshold. A threshold t splits pixels into {< t} and {>= t}
/// (matching KeepAtOrAbove); returns the lowest t in [0, 255] maximising the
/// between-class variance. Throws DegenerateHistogram on a constant image.
inline int otsu_threshold(const GrayImage& image) {
  if (image.pixels.empty()) throw Error(ErrorKind::InvalidArgument, "empty image");
  std::array<std::uint64_t, 256> hist{};
  for (auto p : image.pixels) ++hist[p];
  const std::uint64_t total = image.pixels.size();
  std::uint64_t total_sum = 0;
  int distinct = 0;
  for (int v = 0; v < 256; ++v) {
    total_sum += hist[v] * static_cast<std::uint64_t>(v);
    distinct += hist[v] ? 1 : 0;
  }
  if (distinct < 2) throw Error(ErrorKind::DegenerateHistogram, "image has a single intensity value");

  // sigma_b^2 * N^2 = (S0 * w1 - S1 * w0)^2 / (w0 * w1), evaluated from exact integer sums.
  int best_t = 0;
  double best = -1.0;
  std::uint64_t w0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    if (t > 0) {
      w0 += hist[t - 1];
      s0 += hist[t - 1] * static_cast<std::uint64_t>(t - 1);
    }
    const std::uint64_t w1 = total - w0;
    const std::uint64_t s1 = total_sum - s0;
    double score = 0.0;
    if (w0 != 0 && w1 != 0) {
      const double diff = static_cast<double>(s0) * static_cast<double>(w1) -
                          static_cast<double>(s1) * static_cast<double>(w0);
      score = diff * diff / (static_cast<double>(w0) * static_cast<double>(w1));
    }
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  return best_t;
}

struct PixelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Foreground spectra: row i of `vectors` is the spectrum at `coords[i]`.
struct SpectrumSet {
  Matrix vectors;
  std::vector<PixelCoord> coords;

  std::size_t count() const noexcept { return vectors.rows(); }
  std::size_t bands() const noexcept { return vectors.cols(); }

  bool operator==(const SpectrumSet&) const = default;
};

inline std::vector<double> pixel_spectrum(const HyperCube& cube, std::size_t x, std::size_t y) {
  std::vector<double> s(cube.bands());
  for (std::size_t b = 0; b < cube.bands(); ++b) s[b] = static_cast<double>(cube.at(x, y, b));
  return s;
}

/// One row per foreground pixel in row-major (y, then x) order.
inline SpectrumSet extract_spectra(const HyperCube& cube, const ForegroundMask& mask) {
  if (mask.width != cube.width() || mask.height != cube.height())
    throw Error(ErrorKind::DimensionMismatch, "mask " + std::to_string(mask.width) + "x" +
                                                  std::to_string(mask.height) + " vs cube " +
                                                  std::to_string(cube.width()) + "x" +
                                                  std::to_string(cube.height()));
  const std::size_t n = mask.count();
  if (n == 0) throw Error(ErrorKind::EmptyForeground, "no foreground pixels");
  SpectrumSet set;
  set.vectors = Matrix(n, cube.bands());
  set.coords.reserve(n);
  std::size_t row = 0;
  for (std::size_t y = 0; y < cube.height(); ++y)
    for (std::size_t x = 0; x < cube.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (std::size_t b = 0; b < cube.bands(); ++b) set.vectors(row, b) = cube.at(x, y, b);
      set.coords.push_back({x, y});
      ++row;
    }
  return set;
}

enum class Normalization { None, UnitLength };

inline SpectrumSet normalize_spectra(SpectrumSet set, Normalization mode) {
  if (mode == Normalization::None) return set;
  for (std::size_t r = 0; r < set.count(); ++r) {
    auto row = set.vectors.row(r);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (sq == 0.0) throw Error(ErrorKind::ZeroSpectrum, "row " + std::to_string(r) + " is all zero");
    const double norm = std::sqrt(sq);
    for (double& v : row) v /= norm;
  }
  return set;
}

}  // namespace inkscan

#endif  // INKSCAN_BINARIZE_HPP
