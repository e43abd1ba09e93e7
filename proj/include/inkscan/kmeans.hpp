#ifndef INKSCAN_KMEANS_HPP
#define INKSCAN_KMEANS_HPP

// Lloyd's K-means over row samples with k-means++ or random-sample seeding.
//
// Determinism: all randomness comes from SplitMix64(seed); the assignment
// step may be split across worker threads, but each sample's label depends
// only on that sample, and every reduction (centroid sums, inertia) runs
// sequentially in sample order. Results are bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "inkscan/error.hpp"
#include "inkscan/matrix.hpp"
#include "inkscan/rng.hpp"

namespace inkscan {

enum class InitMethod { KMeansPlusPlus, Random };

struct KMeansParams {
  std::size_t k = 5;
  InitMethod init = InitMethod::KMeansPlusPlus;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // on max centroid displacement (Euclidean)
  std::size_t restarts = 1;
  std::size_t workers = 1;  // threads for the assignment step

  void validate() const {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
    if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be >= 0");
    if (restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1");
    if (workers < 1) throw Error(ErrorKind::InvalidArgument, "workers must be >= 1");
  }
};

struct ClusterModel {
  Matrix centroids;                 // k x B
  std::vector<std::size_t> labels;  // N, each < k
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> inertia_trace;  // inertia after each Lloyd iteration

  bool operator==(const ClusterModel&) const = default;
};

/// Nearest centroid per sample; exact ties go to the lowest centroid index.
inline std::vector<std::size_t> assign(const Matrix& centroids, const Matrix& samples, std::size_t workers = 1) {
  if (centroids.rows() == 0) throw Error(ErrorKind::InvalidArgument, "no centroids");
  if (centroids.cols() != samples.cols())
    throw Error(ErrorKind::DimensionMismatch, "centroids have " + std::to_string(centroids.cols()) +
                                                  " dimensions, samples " + std::to_string(samples.cols()));
  const std::size_t n = samples.rows();
  std::vector<std::size_t> labels(n, 0);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto x = samples.row(i);
      std::size_t best = 0;
      double best_d = squared_distance(x, centroids.row(0));
      for (std::size_t c = 1; c < centroids.rows(); ++c) {
        const double d = squared_distance(x, centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
    }
  };

  workers = std::max<std::size_t>(1, std::min(workers, n / 1024 + 1));
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) threads.emplace_back(run, begin, end);
    }
  }
  return labels;
}

/// Sum of squared distances to the assigned centroids, in sample order.
inline double inertia(const Matrix& centroids, const Matrix& samples, const std::vector<std::size_t>& labels) {
  if (centroids.cols() != samples.cols())
    throw Error(ErrorKind::DimensionMismatch, "centroid and sample dimensionality differ");
  if (labels.size() != samples.rows())
    throw Error(ErrorKind::DimensionMismatch, "label count differs from sample count");
  double total = 0.0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    if (labels[i] >= centroids.rows())
      throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(labels[i]) + " out of range");
    total += squared_distance(samples.row(i), centroids.row(labels[i]));
  }
  return total;
}

namespace detail {

inline void check_fit_input(const Matrix& samples, std::size_t k) {
  if (samples.rows() == 0 || samples.cols() == 0) throw Error(ErrorKind::EmptyInput, "no samples");
  if (samples.rows() < k)
    throw Error(ErrorKind::TooFewSamples,
                std::to_string(samples.rows()) + " samples for k = " + std::to_string(k));
}

inline Matrix init_random(const Matrix& samples, std::size_t k, SplitMix64& rng) {
  // Partial Fisher-Yates: the first k slots are a uniform draw without replacement.
  std::vector<std::size_t> order(samples.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix centroids(k, samples.cols());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
    const auto src = samples.row(order[i]);
    std::copy(src.begin(), src.end(), centroids.row(i).begin());
  }
  return centroids;
}

inline Matrix init_plus_plus(const Matrix& samples, std::size_t k, SplitMix64& rng) {
  const std::size_t n = samples.rows();
  Matrix centroids(k, samples.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t c, std::size_t idx) {
    chosen[idx] = true;
    const auto src = samples.row(idx);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(samples.row(i), src));
  };

  take(0, rng.below(n));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cum = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        cum += d2[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;  // rounding at the top end
    } else {
      // Every remaining point duplicates a centroid: pick uniformly among the unchosen.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[rng.below(rest.size())];
    }
    take(c, pick);
  }
  return centroids;
}

/// Re-seeds each empty cluster with the sample farthest from its own
/// centroid (lowest index on ties), taken only from clusters that keep at
/// least one member.
inline void repair_empty_clusters(const Matrix& centroids, const Matrix& samples,
                                  std::vector<std::size_t>& labels) {
  const std::size_t k = centroids.rows();
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = samples.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(samples.row(i), centroids.row(labels[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
  }
}

/// Member means in sample order. Every cluster must be non-empty.
inline Matrix cluster_means(const Matrix& samples, const std::vector<std::size_t>& labels, std::size_t k) {
  Matrix sums(k, samples.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    auto dst = sums.row(labels[i]);
    const auto src = samples.row(i);
    for (std::size_t b = 0; b < src.size(); ++b) dst[b] += src[b];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c)
    for (double& v : sums.row(c)) v /= static_cast<double>(counts[c]);
  return sums;
}

inline ClusterModel lloyd(const Matrix& samples, Matrix centroids, const KMeansParams& params) {
  ClusterModel model;
  const std::size_t k = centroids.rows();
  for (std::size_t it = 1; it <= params.max_iterations; ++it) {
    auto labels = assign(centroids, samples, params.workers);
    repair_empty_clusters(centroids, samples, labels);
    Matrix updated = cluster_means(samples, labels, k);

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), centroids.row(c))));

    centroids = std::move(updated);
    model.labels = std::move(labels);
    model.iterations = it;
    model.inertia_trace.push_back(inertia(centroids, samples, model.labels));
    if (shift <= params.tolerance) {
      model.converged = true;
      break;
    }
  }
  model.centroids = std::move(centroids);
  model.inertia = model.inertia_trace.back();
  return model;
}

}  // namespace detail

/// Initial k x B centroids for one run, fully determined by `params.seed`.
inline Matrix kmeans_init(const Matrix& samples, const KMeansParams& params) {
  params.validate();
  detail::check_fit_input(samples, params.k);
  SplitMix64 rng(params.seed);
  return params.init == InitMethod::Random ? detail::init_random(samples, params.k, rng)
                                           : detail::init_plus_plus(samples, params.k, rng);
}

/// Runs `restarts` seeded fits (seed, seed + 1, ...) and keeps the lowest
/// inertia, preferring the earliest restart on ties.
inline ClusterModel kmeans_fit(const Matrix& samples, const KMeansParams& params) {
  params.validate();
  detail::check_fit_input(samples, params.k);
  ClusterModel best;
  for (std::size_t r = 0; r < params.restarts; ++r) {
    KMeansParams run = params;
    run.seed = params.seed + r;
    auto model = detail::lloyd(samples, kmeans_init(samples, run), run);
    if (r == 0 || model.inertia < best.inertia) best = std::move(model);
  }
  return best;
}

}  // namespace inkscan

#endif  // INKSCAN_KMEANS_HPP
