#ifndef INKSCAN_SYNTH_HPP
#define INKSCAN_SYNTH_HPP

// Synthetic multi-ink documents with ground truth, and scoring of predicted
// segmentations against that truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inkscan/cube.hpp"
#include "inkscan/error.hpp"
#include "inkscan/rng.hpp"
#include "inkscan/segment.hpp"

namespace inkscan {

using Signature = std::vector<std::uint8_t>;

struct SynthSpec {
  std::size_t width = 512;
  std::size_t height = 512;
  std::size_t bands = 33;
  std::size_t ink_count = 5;
  std::optional<std::vector<Signature>> ink_signatures;  // K x B; generated when absent
  double noise_sigma = 4.0;
  double coverage = 0.15;  // fraction of pixels that are ink
  int background_level = 0;
  std::uint64_t seed = 0;

  /// Minimum pairwise mean absolute difference between generated signatures.
  double min_separation() const { return std::max(8.0 * noise_sigma, 8.0); }

  std::size_t target_ink_pixels() const {
    return static_cast<std::size_t>(std::llround(coverage * static_cast<double>(width * height)));
  }

  void validate() const {
    auto invalid = [](const std::string& why) { return Error(ErrorKind::InvalidSpec, why); };
    if (width < 1 || height < 1) throw invalid("width and height must be >= 1");
    if (bands < 1) throw invalid("bands must be >= 1");
    if (ink_count < 1) throw invalid("ink count must be >= 1");
    if (ink_count > 255) throw invalid("ink count must be <= 255");
    if (!(coverage > 0.0 && coverage < 1.0)) throw invalid("coverage must be in (0, 1)");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw invalid("noise sigma must be >= 0");
    if (background_level < 0 || background_level > 255) throw invalid("background level must be in [0, 255]");
    if (coverage * static_cast<double>(width * height) < static_cast<double>(ink_count))
      throw invalid("width*height*coverage must be >= ink count so every ink appears");
    if (ink_signatures) {
      if (ink_signatures->size() != ink_count) throw invalid("expected one signature per ink");
      for (const auto& s : *ink_signatures)
        if (s.size() != bands) throw invalid("signature length must equal band count");
    }
  }
};

inline double mean_abs_difference(const Signature& a, const Signature& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i]));
  return sum / static_cast<double>(a.size());
}

namespace detail {

/// Smooth curve: a base level plus 1-3 Gaussian bumps or dips over the band
/// axis, clamped into [60, 255] and rounded.
inline Signature random_signature(std::size_t bands, SplitMix64& rng) {
  const double level = 60.0 + rng.uniform() * 140.0;
  const int bumps = static_cast<int>(rng.between(1, 3));
  std::vector<double> curve(bands, level);
  for (int j = 0; j < bumps; ++j) {
    const double center = rng.uniform() * static_cast<double>(bands - 1);
    const double width = 1.0 + rng.uniform() * (static_cast<double>(bands) / 4.0);
    const double amplitude = -(level - 60.0) + rng.uniform() * (255.0 - 60.0);
    for (std::size_t b = 0; b < bands; ++b) {
      const double z = (static_cast<double>(b) - center) / width;
      curve[b] += amplitude * std::exp(-0.5 * z * z);
    }
  }
  Signature s(bands);
  for (std::size_t b = 0; b < bands; ++b) s[b] = static_cast<std::uint8_t>(std::lround(std::clamp(curve[b], 60.0, 255.0)));
  return s;
}

inline std::vector<Signature> generate_signatures(const SynthSpec& spec, SplitMix64& rng) {
  constexpr int kSetAttempts = 200;
  constexpr int kInkAttempts = 2000;
  const double sep = spec.min_separation();
  for (int set_try = 0; set_try < kSetAttempts; ++set_try) {
    std::vector<Signature> sigs;
    for (int t = 0; t < kInkAttempts && sigs.size() < spec.ink_count; ++t) {
      auto cand = random_signature(spec.bands, rng);
      const bool ok = std::all_of(sigs.begin(), sigs.end(),
                                  [&](const Signature& s) { return mean_abs_difference(s, cand) >= sep; });
      if (ok) sigs.push_back(std::move(cand));
    }
    if (sigs.size() == spec.ink_count) return sigs;
  }
  throw Error(ErrorKind::InvalidSpec, "cannot generate " + std::to_string(spec.ink_count) +
                                          " signatures with mean separation >= " + std::to_string(sep));
}

/// Ink layout: region r is the scan-order pixel range [r*P/K, (r+1)*P/K)
/// (horizontal page stripes), and receives an exact quota of the target ink
/// pixels as short 1-3 px strokes placed on text lines of pitch 10.
inline SegmentationMap layout_strokes(const SynthSpec& spec, SplitMix64& rng) {
  constexpr std::size_t kPitch = 10;
  constexpr std::size_t kXHeight = 7;
  const std::size_t w = spec.width, h = spec.height, k = spec.ink_count;
  const std::size_t pixels = w * h;
  const std::size_t target = spec.target_ink_pixels();
  SegmentationMap truth(w, h, k);

  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t begin = r * pixels / k;
    const std::size_t end = (r + 1) * pixels / k;
    const std::size_t quota = target / k + (r < target % k ? 1 : 0);
    const std::size_t y0 = begin / w;
    const std::size_t y1 = (end - 1) / w;
    const std::size_t lines = std::max<std::size_t>(1, (y1 - y0 + 1) / kPitch);
    const auto label = static_cast<std::uint16_t>(r + 1);
    std::size_t painted = 0;

    auto paint = [&](std::size_t x, std::size_t y, std::size_t sw, std::size_t sh) {
      for (std::size_t py = y; py < y + sh && py < h; ++py)
        for (std::size_t px = x; px < x + sw && px < w; ++px) {
          const std::size_t idx = py * w + px;
          if (painted == quota) return;
          if (idx < begin || idx >= end || truth.labels[idx] != 0) continue;
          truth.labels[idx] = label;
          ++painted;
        }
    };

    const std::size_t max_attempts = 64 * quota + 1000;
    for (std::size_t a = 0; a < max_attempts && painted < quota; ++a) {
      const std::size_t base_y = y0 + rng.below(lines) * kPitch;
      const std::size_t x = rng.below(w);
      std::size_t sw = 0, sh = 0;
      switch (rng.below(3)) {
        case 0:  // vertical stem
          sw = static_cast<std::size_t>(rng.between(1, 3));
          sh = static_cast<std::size_t>(rng.between(4, kXHeight));
          break;
        case 1:  // horizontal bar
          sw = static_cast<std::size_t>(rng.between(3, 6));
          sh = static_cast<std::size_t>(rng.between(1, 3));
          break;
        default:  // dot
          sw = sh = static_cast<std::size_t>(rng.between(1, 3));
          break;
      }
      const std::size_t y = base_y + rng.below(kXHeight - std::min(sh, kXHeight) + 1);
      paint(x, y, sw, sh);
    }
    // Dense requests can exhaust the text lines; top up in scan order.
    for (std::size_t idx = begin; idx < end && painted < quota; ++idx)
      if (truth.labels[idx] == 0) {
        truth.labels[idx] = label;
        ++painted;
      }
  }
  return truth;
}

}  // namespace detail

struct SynthDocument {
  HyperCube cube;
  SegmentationMap truth;
  std::vector<Signature> signatures;
};

/// Deterministic in `spec.seed`. Signatures, layout and noise draw from three
/// independent SplitMix64 streams seeded from one master stream, so supplying
/// explicit signatures leaves the layout unchanged. Noise is drawn per pixel
/// in row-major order, bands innermost.
inline SynthDocument synth_document(const SynthSpec& spec) {
  spec.validate();
  SplitMix64 master(spec.seed);
  SplitMix64 sig_rng(master.next());
  SplitMix64 layout_rng(master.next());
  SplitMix64 noise_rng(master.next());

  auto signatures = spec.ink_signatures ? *spec.ink_signatures : detail::generate_signatures(spec, sig_rng);
  auto truth = detail::layout_strokes(spec, layout_rng);

  const std::size_t pixels = spec.width * spec.height;
  const std::size_t bands = spec.bands;
  std::vector<std::uint8_t> data(pixels * bands);
  for (std::size_t i = 0; i < pixels; ++i) {
    const auto label = truth.labels[i];
    for (std::size_t b = 0; b < bands; ++b) {
      const double base = label == 0 ? spec.background_level : signatures[label - 1][b];
      double v = base;
      if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise_rng.normal();
      data[b * pixels + i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return {HyperCube(spec.width, spec.height, bands, std::move(data)), std::move(truth), std::move(signatures)};
}

/// key=value record of the generating spec plus the realised signatures.
inline void write_synth_sidecar(const SynthSpec& spec, const SynthDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  std::size_t ink_pixels = 0;
  for (auto l : doc.truth.labels) ink_pixels += l != 0 ? 1 : 0;
  out << "width=" << spec.width << '\n'
      << "height=" << spec.height << '\n'
      << "bands=" << spec.bands << '\n'
      << "inks=" << spec.ink_count << '\n'
      << "noise_sigma=" << format_shortest(spec.noise_sigma) << '\n'
      << "coverage=" << format_shortest(spec.coverage) << '\n'
      << "background_level=" << spec.background_level << '\n'
      << "seed=" << spec.seed << '\n'
      << "ink_pixels=" << ink_pixels << '\n';
  for (std::size_t i = 0; i < doc.signatures.size(); ++i) {
    out << "signature_" << i + 1 << '=';
    for (std::size_t b = 0; b < doc.signatures[i].size(); ++b)
      out << (b ? "," : "") << static_cast<int>(doc.signatures[i][b]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

/// counts[i][j]: pixels with truth label i and predicted label j.
struct ConfusionMatrix {
  std::size_t size = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t operator()(std::size_t truth, std::size_t pred) const { return counts[truth * size + pred]; }
  std::uint64_t& operator()(std::size_t truth, std::size_t pred) { return counts[truth * size + pred]; }
};

inline std::size_t max_label(const SegmentationMap& map) {
  std::size_t m = map.k;
  for (auto l : map.labels) m = std::max<std::size_t>(m, l);
  return m;
}

/// Square over labels 0..K with K the larger label range of the two maps.
inline ConfusionMatrix confusion_matrix(const SegmentationMap& pred, const SegmentationMap& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw Error(ErrorKind::DimensionMismatch, "prediction " + std::to_string(pred.width) + "x" +
                                                  std::to_string(pred.height) + " vs truth " +
                                                  std::to_string(truth.width) + "x" + std::to_string(truth.height));
  ConfusionMatrix cm;
  cm.size = std::max(max_label(pred), max_label(truth)) + 1;
  cm.counts.assign(cm.size * cm.size, 0);
  for (std::size_t i = 0; i < truth.labels.size(); ++i) ++cm(truth.labels[i], pred.labels[i]);
  return cm;
}

struct EvalReport {
  double accuracy = 0.0;
  std::vector<std::size_t> mapping;  // mapping[p] = truth label for predicted label p; 0 = unmatched
  ConfusionMatrix confusion;
  std::uint64_t matched = 0;
  std::uint64_t truth_ink = 0;
};

/// Exhaustive search over bijections between predicted and true ink labels.
/// Candidate bijections are visited as lexicographic permutations of the
/// padded label range (unmatched slots sort after real labels); the first
/// maximum wins. An all-background truth scores 1.
inline EvalReport best_permutation_accuracy(const SegmentationMap& pred, const SegmentationMap& truth) {
  EvalReport report;
  report.confusion = confusion_matrix(pred, truth);
  const std::size_t kp = max_label(pred);
  const std::size_t kt = max_label(truth);
  if (kp > 8 || kt > 8)
    throw Error(ErrorKind::TooManyClustersForExhaustive,
                "exhaustive matching supports at most 8 labels (got " + std::to_string(std::max(kp, kt)) + ")");
  const auto& cm = report.confusion;
  for (std::size_t t = 1; t <= kt; ++t)
    for (std::size_t p = 0; p < cm.size; ++p) report.truth_ink += cm(t, p);

  const std::size_t n = std::max(kp, kt);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  std::uint64_t best = 0;
  std::vector<std::size_t> best_perm = perm;
  bool first = true;
  do {
    std::uint64_t score = 0;
    for (std::size_t p = 1; p <= kp; ++p)
      if (perm[p - 1] <= kt) score += cm(perm[p - 1], p);
    if (first || score > best) {
      best = score;
      best_perm = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  report.mapping.assign(kp + 1, 0);
  for (std::size_t p = 1; p <= kp; ++p) report.mapping[p] = best_perm[p - 1] <= kt ? best_perm[p - 1] : 0;
  report.matched = best;
  report.accuracy = report.truth_ink == 0 ? 1.0 : static_cast<double>(best) / static_cast<double>(report.truth_ink);
  return report;
}

}  // namespace inkscan

#endif  // INKSCAN_SYNTH_HPP
