#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "vecscan/kmeans.hpp"

using namespace vecscan;

namespace {

VectorSet gaussian_set(uint32_t n, uint32_t d, uint64_t seed, Metric metric = Metric::L2) {
  VectorSet s;
  s.n = n;
  s.d = d;
  s.metric = metric;
  s.data.resize(size_t(n) * d);
  SplitMix64 rng(seed);
  for (float& v : s.data) v = rng.next_gaussian();
  return s;
}

// Two well-separated blobs around (+/-10, 0, ..., 0).
VectorSet two_blobs(uint32_t n, uint32_t d, uint64_t seed) {
  VectorSet s = gaussian_set(n, d, seed);
  for (uint32_t i = 0; i < n; ++i) s.row(i)[0] += (i < n / 2) ? 10.f : -10.f;
  return s;
}

}  // namespace

TEST_CASE("K = n puts every point in its own cluster with objective 0") {
  VectorSet s = gaussian_set(24, 4, 42);
  Clustering c = train_kmeans(s, s.n);
  CHECK(c.objective_history.back() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(c.sizes == std::vector<uint32_t>(s.n, 1));
}

TEST_CASE("K = 1 yields the dataset mean") {
  VectorSet s = gaussian_set(200, 6, 7);
  Clustering c = train_kmeans(s, 1);
  for (uint32_t t = 0; t < s.d; ++t) {
    double mean = 0;
    for (uint32_t i = 0; i < s.n; ++i) mean += s.row(i)[t];
    mean /= s.n;
    CHECK(c.centroids[t] == doctest::Approx(mean).epsilon(1e-4));
  }
}

TEST_CASE("two separated blobs recover their sample means") {
  VectorSet s = two_blobs(800, 8, 3);
  Clustering c = train_kmeans(s, 2, {25, 1e-4f, 1});
  // sample means of each blob
  std::vector<double> mean_pos(s.d, 0), mean_neg(s.d, 0);
  for (uint32_t i = 0; i < s.n; ++i) {
    const float* r = s.row(i);
    for (uint32_t t = 0; t < s.d; ++t) (i < s.n / 2 ? mean_pos : mean_neg)[t] += r[t];
  }
  for (uint32_t t = 0; t < s.d; ++t) {
    mean_pos[t] /= s.n / 2;
    mean_neg[t] /= s.n / 2;
  }
  uint32_t pos_cluster = c.centroids[0] > 0 ? 0 : 1;
  for (uint32_t t = 0; t < s.d; ++t) {
    CHECK(std::abs(c.centroid(pos_cluster)[t] - mean_pos[t]) < 0.5);
    CHECK(std::abs(c.centroid(1 - pos_cluster)[t] - mean_neg[t]) < 0.5);
  }
}

TEST_CASE("objective is monotonically non-increasing") {
  VectorSet s = gaussian_set(600, 10, 9);
  Clustering c = train_kmeans(s, 12, {25, 0.f, 5});  // epsilon 0: run all iterations
  REQUIRE(c.objective_history.size() > 2);
  for (size_t i = 1; i < c.objective_history.size(); ++i)
    CHECK(c.objective_history[i] <= c.objective_history[i - 1] * (1.0 + 1e-6));
}

TEST_CASE("training is bit-for-bit deterministic per seed") {
  VectorSet s = gaussian_set(300, 5, 13);
  Clustering a = train_kmeans(s, 8, {25, 1e-4f, 77});
  Clustering b = train_kmeans(s, 8, {25, 1e-4f, 77});
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignment == b.assignment);
  Clustering other = train_kmeans(s, 8, {25, 1e-4f, 78});
  CHECK(a.centroids != other.centroids);
}

TEST_CASE("cluster sizes sum to n and no cluster is empty") {
  VectorSet s = gaussian_set(500, 4, 21);
  Clustering c = train_kmeans(s, 40, {25, 1e-4f, 2});
  uint32_t total = 0;
  for (uint32_t sz : c.sizes) {
    CHECK(sz > 0);
    total += sz;
  }
  CHECK(total == s.n);
}

TEST_CASE("empty-cluster repair survives heavy duplication") {
  VectorSet s;
  s.n = 64;
  s.d = 2;
  s.metric = Metric::L2;
  s.data.assign(size_t(s.n) * s.d, 1.f);  // all identical
  Clustering c = train_kmeans(s, 8, {10, 1e-4f, 0});
  uint32_t total = 0;
  for (uint32_t sz : c.sizes) {
    CHECK(sz > 0);
    total += sz;
  }
  CHECK(total == s.n);
}

TEST_CASE("centroids equal the mean of their assigned points at convergence") {
  VectorSet s = gaussian_set(400, 6, 31);
  Clustering c = train_kmeans(s, 10, {50, 1e-7f, 3});
  std::vector<double> sums(size_t(c.k) * s.d, 0.0);
  for (uint32_t i = 0; i < s.n; ++i) {
    const float* r = s.row(i);
    for (uint32_t t = 0; t < s.d; ++t) sums[size_t(c.assignment[i]) * s.d + t] += r[t];
  }
  for (uint32_t j = 0; j < c.k; ++j)
    for (uint32_t t = 0; t < s.d; ++t) {
      double mean = sums[size_t(j) * s.d + t] / c.sizes[j];
      CHECK(c.centroid(j)[t] == doctest::Approx(mean).epsilon(1e-4));
    }
}

TEST_CASE("train_kmeans validates K") {
  VectorSet s = gaussian_set(10, 3, 1);
  CHECK_THROWS_AS(train_kmeans(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(train_kmeans(s, 11), std::invalid_argument);
}

TEST_CASE("assign_point: exact centroid, tie rule, and scan oracle") {
  VectorSet s = gaussian_set(100, 4, 55);
  Clustering c = train_kmeans(s, 6, {25, 1e-4f, 4});

  std::vector<float> x(c.centroid(3), c.centroid(3) + s.d);
  CHECK(assign_point(x, c) == 3);

  // equidistant construction: centroids at -1 and +1 in 1-D, query at 0
  Clustering tie;
  tie.k = 5;
  tie.d = 1;
  tie.centroids = {3.f, -1.f, 7.f, 9.f, 1.f};  // ids 1 and 4 equidistant from 0
  std::vector<float> zero{0.f};
  CHECK(assign_point(zero, tie) == 1);

  SplitMix64 rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<float> q(s.d);
    for (auto& v : q) v = rng.next_gaussian() * 2;
    uint32_t got = assign_point(q, c);
    // independent linear scan
    uint32_t best = 0;
    float best_d = std::numeric_limits<float>::infinity();
    for (uint32_t j = 0; j < c.k; ++j) {
      float dd = l2_sq(q.data(), c.centroid(j), s.d);
      if (dd < best_d) { best_d = dd; best = j; }
    }
    CHECK(got == best);
  }
}

TEST_CASE("top_n_clusters ordering, prefix property and bounds") {
  VectorSet s = gaussian_set(400, 8, 66);
  Clustering c = train_kmeans(s, 20, {25, 1e-4f, 6});
  SplitMix64 rng(5);
  std::vector<float> q(s.d);
  for (auto& v : q) v = rng.next_gaussian();

  std::vector<uint32_t> all = top_n_clusters(q, c, c.k, Metric::L2);
  CHECK(all.size() == c.k);
  // full-sort oracle
  std::vector<std::pair<float, uint32_t>> scored(c.k);
  for (uint32_t j = 0; j < c.k; ++j) scored[j] = {l2_sq(q.data(), c.centroid(j), s.d), j};
  std::sort(scored.begin(), scored.end());
  for (uint32_t j = 0; j < c.k; ++j) CHECK(all[j] == scored[j].second);

  for (uint32_t n : {1u, 4u, 16u}) {
    std::vector<uint32_t> prefix = top_n_clusters(q, c, n, Metric::L2);
    CHECK(prefix == std::vector<uint32_t>(all.begin(), all.begin() + n));
  }

  // q exactly at a centroid
  std::vector<float> at(c.centroid(7), c.centroid(7) + s.d);
  CHECK(top_n_clusters(at, c, 1, Metric::L2)[0] == 7);

  CHECK_THROWS_AS(top_n_clusters(q, c, c.k + 1, Metric::L2), std::invalid_argument);
}

TEST_CASE("angular clustering keeps raw means and ranks with normalized centroids") {
  VectorSet s = gaussian_set(300, 6, 77, Metric::Angular);
  for (uint32_t i = 0; i < s.n; ++i) {
    float* r = s.row(i);
    float nrm = norm2(r, s.d);
    for (uint32_t t = 0; t < s.d; ++t) r[t] /= nrm;
  }
  Clustering c = train_kmeans(s, 8, {25, 1e-4f, 8});
  REQUIRE(!c.normalized_centroids.empty());
  for (uint32_t j = 0; j < c.k; ++j) {
    // raw means of unit vectors are strictly inside the sphere
    CHECK(norm2(c.centroid(j), s.d) < 1.f);
    CHECK(norm2(c.normalized_centroid(j), s.d) == doctest::Approx(1.0).epsilon(1e-5));
  }
}
