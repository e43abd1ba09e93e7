#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "inkscan/kmeans.hpp"
#include "inkscan/rng.hpp"
#include "oracles.hpp"

using namespace inkscan;

namespace {

Matrix make(std::initializer_list<std::vector<double>> rows) {
  Matrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

Matrix random_samples(SplitMix64& rng, std::size_t n, std::size_t dims, double scale = 100.0) {
  Matrix m(n, dims);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dims; ++d) m(i, d) = scale * rng.uniform();
  return m;
}

/// Gaussian blobs around k random centres.
Matrix blobs(SplitMix64& rng, std::size_t n, std::size_t dims, std::size_t k, double spread) {
  Matrix centres = random_samples(rng, k, dims, 255.0);
  Matrix m(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = rng.below(k);
    for (std::size_t d = 0; d < dims; ++d) m(i, d) = centres(c, d) + spread * rng.normal();
  }
  return m;
}

void expect_model_invariants(const ClusterModel& m, const Matrix& x, std::size_t k) {
  ASSERT_EQ(m.labels.size(), x.rows());
  ASSERT_EQ(m.centroids.rows(), k);
  for (auto l : m.labels) ASSERT_LT(l, k);
  const double re = oracle::sum_squared_residuals(m.centroids, x, m.labels);
  EXPECT_NEAR(m.inertia, re, 1e-9 * std::max(1.0, re));
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> mean(x.cols(), 0.0);
    double count = 0;
    for (std::size_t i = 0; i < x.rows(); ++i)
      if (m.labels[i] == c) {
        for (std::size_t b = 0; b < x.cols(); ++b) mean[b] += x(i, b);
        count += 1;
      }
    if (count == 0) continue;
    for (std::size_t b = 0; b < x.cols(); ++b)
      EXPECT_NEAR(m.centroids(c, b), mean[b] / count, 1e-9 * std::max(1.0, std::abs(mean[b] / count)));
  }
}

}  // namespace

TEST(Assign, ZeroDistanceAndTies) {
  const auto centroids = make({{0, 0}, {2, 0}, {5, 5}});
  EXPECT_EQ(assign(centroids, make({{5, 5}})), std::vector<std::size_t>{2});
  EXPECT_EQ(assign(centroids, make({{1, 0}})), std::vector<std::size_t>{0});
}

TEST(Assign, DimensionMismatch) {
  try {
    assign(make({{0, 0}}), make({{1, 2, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Assign, MatchesBruteForceWithAnyWorkerCount) {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_samples(rng, 500 + rng.below(3000), 1 + rng.below(33));
    const auto c = random_samples(rng, 1 + rng.below(8), x.cols());
    const auto expected = oracle::nearest_centroids(c, x);
    EXPECT_EQ(assign(c, x, 1), expected);
    EXPECT_EQ(assign(c, x, 4), expected);
  }
}

TEST(Inertia, SimpleCases) {
  EXPECT_EQ(inertia(make({{1, 1}}), make({{1, 1}, {1, 1}}), {0, 0}), 0.0);
  EXPECT_EQ(inertia(make({{3, 4}}), make({{0, 0}}), {0}), 25.0);
  EXPECT_THROW(inertia(make({{3, 4}}), make({{0, 0}}), {0, 0}), Error);
}

TEST(Inertia, MatchesRecomputation) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_samples(rng, 300, 10);
    const auto c = random_samples(rng, 4, 10);
    std::vector<std::size_t> labels(300);
    for (auto& l : labels) l = rng.below(4);
    const double re = oracle::sum_squared_residuals(c, x, labels);
    EXPECT_NEAR(inertia(c, x, labels), re, 1e-12 * re);
  }
}

TEST(KMeansInit, KEqualsOne) {
  const auto x = make({{1, 2}, {3, 4}, {5, 6}});
  for (auto init : {InitMethod::Random, InitMethod::KMeansPlusPlus}) {
    KMeansParams p;
    p.k = 1;
    p.init = init;
    const auto c = kmeans_init(x, p);
    ASSERT_EQ(c.rows(), 1u);
    bool is_sample = false;
    for (std::size_t i = 0; i < 3; ++i) is_sample |= c.row(0)[0] == x(i, 0) && c.row(0)[1] == x(i, 1);
    EXPECT_TRUE(is_sample);
  }
}

TEST(KMeansInit, ExhaustionGivesPermutationOfSamples) {
  SplitMix64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    Matrix x = random_samples(rng, n, 3);
    if (n > 2) {  // include a duplicate row
      for (std::size_t b = 0; b < 3; ++b) x(1, b) = x(0, b);
    }
    for (auto init : {InitMethod::Random, InitMethod::KMeansPlusPlus}) {
      KMeansParams p;
      p.k = n;
      p.init = init;
      p.seed = rng.next();
      const auto c = kmeans_init(x, p);
      std::multiset<std::vector<double>> want, got;
      for (std::size_t i = 0; i < n; ++i) {
        want.insert({x.row(i).begin(), x.row(i).end()});
        got.insert({c.row(i).begin(), c.row(i).end()});
      }
      EXPECT_EQ(got, want);
    }
  }
}

TEST(KMeansInit, DeterministicForSeed) {
  SplitMix64 rng(10);
  const auto x = random_samples(rng, 400, 5);
  KMeansParams p;
  p.k = 6;
  p.seed = 1234;
  EXPECT_EQ(kmeans_init(x, p), kmeans_init(x, p));
  p.init = InitMethod::Random;
  EXPECT_EQ(kmeans_init(x, p), kmeans_init(x, p));
}

TEST(KMeansInit, TooFewSamples) {
  KMeansParams p;
  p.k = 3;
  try {
    kmeans_init(make({{1}, {2}}), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
}

TEST(KMeansFit, TwoSeparatedGroups) {
  const auto x = make({{0, 0}, {0, 1}, {10, 10}, {10, 11}});
  KMeansParams p;
  p.k = 2;
  const auto m = kmeans_fit(x, p);
  EXPECT_DOUBLE_EQ(m.inertia, 1.0);
  EXPECT_EQ(m.labels[0], m.labels[1]);
  EXPECT_EQ(m.labels[2], m.labels[3]);
  EXPECT_NE(m.labels[0], m.labels[2]);
  const auto a = m.centroids.row(m.labels[0]);
  const auto b = m.centroids.row(m.labels[2]);
  EXPECT_EQ(std::vector<double>(a.begin(), a.end()), (std::vector<double>{0, 0.5}));
  EXPECT_EQ(std::vector<double>(b.begin(), b.end()), (std::vector<double>{10, 10.5}));
  // Oracle: best 2-partition over all splits.
  EXPECT_DOUBLE_EQ(oracle::best_two_partition(x), 1.0);
}

TEST(KMeansFit, SingleClusterIsGlobalMean) {
  SplitMix64 rng(11);
  const auto x = random_samples(rng, 250, 4);
  KMeansParams p;
  p.k = 1;
  const auto m = kmeans_fit(x, p);
  std::vector<double> mean(4, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t b = 0; b < 4; ++b) mean[b] += x(i, b);
  for (auto& v : mean) v /= 250.0;
  for (std::size_t b = 0; b < 4; ++b) EXPECT_NEAR(m.centroids(0, b), mean[b], 1e-12 * mean[b]);
  for (auto l : m.labels) EXPECT_EQ(l, 0u);
  double wcss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t b = 0; b < 4; ++b) wcss += (x(i, b) - mean[b]) * (x(i, b) - mean[b]);
  EXPECT_NEAR(m.inertia, wcss, 1e-9 * wcss);
}

TEST(KMeansFit, PerfectFitWhenNEqualsK) {
  SplitMix64 rng(12);
  const auto x = random_samples(rng, 6, 3);
  for (auto init : {InitMethod::Random, InitMethod::KMeansPlusPlus}) {
    KMeansParams p;
    p.k = 6;
    p.init = init;
    const auto m = kmeans_fit(x, p);
    EXPECT_EQ(m.inertia, 0.0);
    EXPECT_TRUE(m.converged);
    EXPECT_LE(m.iterations, 2u);
    EXPECT_EQ(std::set<std::size_t>(m.labels.begin(), m.labels.end()).size(), 6u);
  }
}

TEST(KMeansFit, InvalidInputs) {
  KMeansParams p;
  p.k = 2;
  try {
    kmeans_fit(Matrix(0, 3), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
  try {
    kmeans_fit(make({{1.0}}), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewSamples);
  }
  p.restarts = 0;
  EXPECT_THROW(kmeans_fit(make({{1.0}, {2.0}}), p), Error);
}

TEST(KMeansFit, ModelInvariantsAndMonotoneTrace) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + rng.below(8);
    const auto x = rng.below(2) ? blobs(rng, k + rng.below(800), 1 + rng.below(12), k, 10.0)
                                : random_samples(rng, k + rng.below(800), 1 + rng.below(12));
    KMeansParams p;
    p.k = k;
    p.seed = rng.next();
    p.init = rng.below(2) ? InitMethod::Random : InitMethod::KMeansPlusPlus;
    const auto m = kmeans_fit(x, p);
    expect_model_invariants(m, x, k);
    ASSERT_EQ(m.inertia_trace.size(), m.iterations);
    for (std::size_t i = 1; i < m.inertia_trace.size(); ++i)
      EXPECT_LE(m.inertia_trace[i], m.inertia_trace[i - 1] * (1 + 1e-9));
  }
}

TEST(KMeansFit, EmptyClusterIsReseeded) {
  // Random init picks two of the three identical points; the (10) point then
  // sits alone and the duplicate centroid loses every member on the first pass.
  const auto x = make({{0}, {0}, {0}, {10}, {11}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    KMeansParams p;
    p.k = 3;
    p.init = InitMethod::Random;
    p.seed = seed;
    const auto m = kmeans_fit(x, p);
    expect_model_invariants(m, x, 3);
    EXPECT_EQ(std::set<std::size_t>(m.labels.begin(), m.labels.end()).size(), 3u);
  }
}

TEST(KMeansFit, FixedPointAtZeroTolerance) {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = blobs(rng, 600, 5, 4, 20.0);
    KMeansParams p;
    p.k = 4;
    p.tolerance = 0.0;
    p.seed = trial;
    const auto m = kmeans_fit(x, p);
    ASSERT_TRUE(m.converged);
    EXPECT_EQ(assign(m.centroids, x), m.labels);
  }
}

TEST(KMeansFit, DeterministicAcrossRunsAndWorkers) {
  SplitMix64 rng(15);
  const auto x = blobs(rng, 5000, 33, 5, 8.0);
  KMeansParams p;
  p.k = 5;
  p.restarts = 3;
  const auto a = kmeans_fit(x, p);
  EXPECT_EQ(kmeans_fit(x, p), a);
  p.workers = 4;
  EXPECT_EQ(kmeans_fit(x, p), a);
}

TEST(KMeansFit, RestartsPickLowestInertia) {
  SplitMix64 rng(16);
  const auto x = random_samples(rng, 300, 2);
  KMeansParams p;
  p.k = 6;
  p.init = InitMethod::Random;
  p.seed = 100;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t r = 0; r < 5; ++r) {
    KMeansParams single = p;
    single.seed = p.seed + r;
    best = std::min(best, kmeans_fit(x, single).inertia);
  }
  p.restarts = 5;
  EXPECT_EQ(kmeans_fit(x, p).inertia, best);
}

TEST(KMeansFit, LabelPermutationLeavesInertiaUnchanged) {
  SplitMix64 rng(17);
  const auto x = blobs(rng, 400, 3, 4, 5.0);
  KMeansParams p;
  p.k = 4;
  const auto m = kmeans_fit(x, p);
  const std::vector<std::size_t> perm = {2, 0, 3, 1};
  Matrix permuted(4, 3);
  std::vector<std::size_t> relabeled(m.labels.size());
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t b = 0; b < 3; ++b) permuted(perm[c], b) = m.centroids(c, b);
  for (std::size_t i = 0; i < relabeled.size(); ++i) relabeled[i] = perm[m.labels[i]];
  EXPECT_NEAR(inertia(permuted, x, relabeled), m.inertia, 1e-9 * m.inertia);
}

TEST(KMeansFit, ScaleEquivariance) {
  SplitMix64 rng(18);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = blobs(rng, 300, 4, 3, 15.0);
    for (auto init : {InitMethod::KMeansPlusPlus, InitMethod::Random}) {
      const double s = 4.0;  // power of two keeps every intermediate exact
      Matrix scaled(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t b = 0; b < x.cols(); ++b) scaled(i, b) = s * x(i, b);
      KMeansParams p;
      p.k = 3;
      p.init = init;
      p.seed = trial;
      const auto a = kmeans_fit(x, p);
      const auto b = kmeans_fit(scaled, p);
      EXPECT_EQ(a.labels, b.labels);
      EXPECT_NEAR(b.inertia, s * s * a.inertia, 1e-9 * b.inertia);
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t d = 0; d < x.cols(); ++d)
          EXPECT_NEAR(b.centroids(c, d), s * a.centroids(c, d), 1e-9 * std::abs(b.centroids(c, d)) + 1e-12);
    }
  }
}

TEST(KMeansFit, SmallInstancesReachExhaustiveOptimum) {
  SplitMix64 rng(19);
  int optimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    const auto x = random_samples(rng, n, 1 + rng.below(3));
    KMeansParams p;
    p.k = 2;
    p.restarts = 10;
    p.seed = rng.next();
    const double fit = kmeans_fit(x, p).inertia;
    const double best = oracle::best_two_partition(x);
    ASSERT_GE(fit, best * (1 - 1e-9) - 1e-12);
    if (std::abs(fit - best) <= 1e-9 * std::max(1.0, best)) ++optimal;
  }
  EXPECT_GE(optimal, 95);
}
