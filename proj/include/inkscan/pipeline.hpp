#ifndef INKSCAN_PIPELINE_HPP
#define INKSCAN_PIPELINE_HPP

// End-to-end ink segmentation: reference image -> threshold -> foreground
// spectra -> K-means -> label map.

#include <optional>
#include <vector>

#include "inkscan/binarize.hpp"
#include "inkscan/cube.hpp"
#include "inkscan/kmeans.hpp"
#include "inkscan/segment.hpp"

namespace inkscan {

struct ForegroundOptions {
  ReferenceMode reference = ReferenceMode::mean();
  ThresholdConfig threshold;
  bool use_otsu = false;  // falls back to `threshold.value` on a degenerate histogram
  Normalization normalization = Normalization::None;
};

struct ForegroundResult {
  GrayImage reference;
  int threshold = 0;
  bool otsu_fell_back = false;
  ForegroundMask mask;
  SpectrumSet spectra;
};

inline ForegroundResult extract_foreground(const HyperCube& cube, const ForegroundOptions& options) {
  ForegroundResult r;
  r.reference = reference_image(cube, options.reference);
  ThresholdConfig cfg = options.threshold;
  if (options.use_otsu) {
    try {
      cfg.value = otsu_threshold(r.reference);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateHistogram) throw;
      r.otsu_fell_back = true;
    }
  }
  r.threshold = cfg.value;
  r.mask = threshold_binary(r.reference, cfg);
  r.spectra = normalize_spectra(extract_spectra(cube, r.mask), options.normalization);
  return r;
}

struct SegmentationResult {
  ForegroundResult foreground;
  ClusterModel model;
  SegmentationMap map;
  std::vector<std::size_t> cluster_sizes;
};

inline SegmentationResult segment_document(const HyperCube& cube, const ForegroundOptions& fg,
                                           const KMeansParams& params) {
  params.validate();
  SegmentationResult r;
  r.foreground = extract_foreground(cube, fg);
  r.model = kmeans_fit(r.foreground.spectra.vectors, params);
  r.map = build_label_map(r.foreground.mask, r.model.labels, params.k);
  r.cluster_sizes.assign(params.k, 0);
  for (auto l : r.model.labels) ++r.cluster_sizes[l];
  return r;
}

}  // namespace inkscan

#endif  // INKSCAN_PIPELINE_HPP
