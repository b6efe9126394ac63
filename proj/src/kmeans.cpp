#include "vecscan/kmeans.hpp"

#include <algorithm>
#include <numeric>

namespace vecscan {

namespace {

// Nearest centroid via ||p||^2 + ||c||^2 - 2<p,c>; four centroids per pass
// so the point row is reused from registers. Ties resolve to the smaller id
// through strict-less updates in ascending order.
void assign_all(const VectorSet& pts, const std::vector<float>& centroids,
                const std::vector<float>& centroid_sq, uint32_t k,
                std::vector<uint32_t>& out_assign, std::vector<float>& out_dist) {
  const uint32_t d = pts.d;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(pts.n); ++i) {
    const float* p = pts.row(uint32_t(i));
    float best = std::numeric_limits<float>::infinity();
    uint32_t best_j = 0;
    uint32_t j = 0;
    for (; j + 4 <= k; j += 4) {
      const float* c0 = centroids.data() + size_t(j + 0) * d;
      const float* c1 = centroids.data() + size_t(j + 1) * d;
      const float* c2 = centroids.data() + size_t(j + 2) * d;
      const float* c3 = centroids.data() + size_t(j + 3) * d;
      float s0 = 0.f, s1 = 0.f, s2 = 0.f, s3 = 0.f;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
      for (uint32_t t = 0; t < d; ++t) {
        float v = p[t];
        s0 += v * c0[t];
        s1 += v * c1[t];
        s2 += v * c2[t];
        s3 += v * c3[t];
      }
      float d0 = centroid_sq[j + 0] - 2.f * s0;
      float d1 = centroid_sq[j + 1] - 2.f * s1;
      float d2 = centroid_sq[j + 2] - 2.f * s2;
      float d3 = centroid_sq[j + 3] - 2.f * s3;
      if (d0 < best) { best = d0; best_j = j + 0; }
      if (d1 < best) { best = d1; best_j = j + 1; }
      if (d2 < best) { best = d2; best_j = j + 2; }
      if (d3 < best) { best = d3; best_j = j + 3; }
    }
    for (; j < k; ++j) {
      float s = dot(p, centroids.data() + size_t(j) * d, d);
      float dd = centroid_sq[j] - 2.f * s;
      if (dd < best) { best = dd; best_j = j; }
    }
    out_assign[i] = best_j;
    // ||p||^2 is a per-point constant; add it back so the stored value is
    // the actual squared distance (clamped against fp cancellation).
    float psq = dot(p, p, d);
    out_dist[i] = std::max(0.f, best + psq);
  }
}

std::vector<float> squared_norms(const std::vector<float>& rows, uint32_t count, uint32_t d) {
  std::vector<float> sq(count);
  for (uint32_t j = 0; j < count; ++j) sq[j] = dot(rows.data() + size_t(j) * d, rows.data() + size_t(j) * d, d);
  return sq;
}

void kmeanspp_seed(const VectorSet& pts, uint32_t k, SplitMix64& rng, std::vector<float>& centroids) {
  const uint32_t d = pts.d;
  centroids.assign(size_t(k) * d, 0.f);
  uint32_t first = uint32_t(rng.next_below(pts.n));
  std::copy_n(pts.row(first), d, centroids.begin());

  std::vector<float> dist2(pts.n);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(pts.n); ++i) dist2[i] = l2_sq(pts.row(uint32_t(i)), centroids.data(), d);

  for (uint32_t j = 1; j < k; ++j) {
    double total = 0.0;
    for (uint32_t i = 0; i < pts.n; ++i) total += dist2[i];
    uint32_t chosen;
    if (total <= 0.0) {
      chosen = uint32_t(rng.next_below(pts.n));
    } else {
      double r = rng.next_double() * total;
      double acc = 0.0;
      chosen = pts.n - 1;
      for (uint32_t i = 0; i < pts.n; ++i) {
        acc += dist2[i];
        if (acc >= r) { chosen = i; break; }
      }
    }
    float* cj = centroids.data() + size_t(j) * d;
    std::copy_n(pts.row(chosen), d, cj);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < int64_t(pts.n); ++i) {
      float nd = l2_sq(pts.row(uint32_t(i)), cj, d);
      if (nd < dist2[i]) dist2[i] = nd;
    }
  }
}

}  // namespace

Clustering train_kmeans(const VectorSet& points, uint32_t k, const KMeansConfig& config) {
  if (k == 0) throw std::invalid_argument("train_kmeans: K must be >= 1");
  if (k > points.n) throw std::invalid_argument("train_kmeans: K > n");

  const uint32_t d = points.d;
  Clustering c;
  c.k = k;
  c.d = d;
  SplitMix64 rng(config.seed);
  kmeanspp_seed(points, k, rng, c.centroids);

  c.assignment.assign(points.n, 0);
  c.sizes.assign(k, 0);
  std::vector<float> min_dist(points.n);
  std::vector<double> sums(size_t(k) * d);
  double prev_obj = std::numeric_limits<double>::infinity();

  for (uint32_t iter = 0; iter < std::max(1u, config.max_iters); ++iter) {
    std::vector<float> csq = squared_norms(c.centroids, k, d);
    assign_all(points, c.centroids, csq, k, c.assignment, min_dist);

    double obj = 0.0;
    for (uint32_t i = 0; i < points.n; ++i) obj += min_dist[i];
    c.objective_history.push_back(obj);

    // Mean update with fixed-order summation; parallelism lives in the
    // assignment step so results do not depend on thread count.
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(c.sizes.begin(), c.sizes.end(), 0);
    for (uint32_t i = 0; i < points.n; ++i) {
      uint32_t j = c.assignment[i];
      c.sizes[j]++;
      const float* p = points.row(i);
      double* s = sums.data() + size_t(j) * d;
      for (uint32_t t = 0; t < d; ++t) s[t] += p[t];
    }

    // Reseed empty clusters from the farthest point of the largest cluster.
    while (true) {
      uint32_t empty = k;
      for (uint32_t j = 0; j < k; ++j)
        if (c.sizes[j] == 0) { empty = j; break; }
      if (empty == k) break;
      uint32_t largest = uint32_t(std::max_element(c.sizes.begin(), c.sizes.end()) - c.sizes.begin());
      uint32_t donor = points.n;
      float worst = -1.f;
      for (uint32_t i = 0; i < points.n; ++i) {
        if (c.assignment[i] != largest) continue;
        float dd = l2_sq(points.row(i), c.centroids.data() + size_t(largest) * d, d);
        if (dd > worst) { worst = dd; donor = i; }
      }
      const float* p = points.row(donor);
      c.assignment[donor] = empty;
      c.sizes[empty] = 1;
      c.sizes[largest]--;
      double* se = sums.data() + size_t(empty) * d;
      double* sl = sums.data() + size_t(largest) * d;
      for (uint32_t t = 0; t < d; ++t) {
        se[t] = p[t];
        sl[t] -= p[t];
      }
    }

    for (uint32_t j = 0; j < k; ++j) {
      float* cj = c.centroids.data() + size_t(j) * d;
      const double* s = sums.data() + size_t(j) * d;
      for (uint32_t t = 0; t < d; ++t) cj[t] = float(s[t] / c.sizes[j]);
    }

    if (prev_obj < std::numeric_limits<double>::infinity()) {
      double rel = prev_obj > 0 ? (prev_obj - obj) / prev_obj : 0.0;
      if (rel >= 0 && rel < config.epsilon) break;
    }
    prev_obj = obj;
  }

  if (points.metric == Metric::Angular) {
    c.normalized_centroids = c.centroids;
    for (uint32_t j = 0; j < k; ++j) {
      float* cj = c.normalized_centroids.data() + size_t(j) * d;
      float nrm = norm2(cj, d);
      if (nrm > 0.f)
        for (uint32_t t = 0; t < d; ++t) cj[t] /= nrm;
    }
  }
  return c;
}

uint32_t assign_point(std::span<const float> x, const Clustering& clustering) {
  if (x.size() != clustering.d) throw std::invalid_argument("assign_point: dimension mismatch");
  float best = std::numeric_limits<float>::infinity();
  uint32_t best_j = 0;
  for (uint32_t j = 0; j < clustering.k; ++j) {
    float dd = l2_sq(x.data(), clustering.centroid(j), clustering.d);
    if (dd < best) { best = dd; best_j = j; }
  }
  return best_j;
}

std::vector<uint32_t> rank_clusters(std::span<const float> q, const Clustering& clustering,
                                    Metric metric) {
  const uint32_t k = clustering.k, d = clustering.d;
  if (q.size() != d) throw std::invalid_argument("rank_clusters: dimension mismatch");
  std::vector<std::pair<float, uint32_t>> scored(k);
  const bool angular = metric == Metric::Angular && !clustering.normalized_centroids.empty();
  for (uint32_t j = 0; j < k; ++j) {
    const float* cj = angular ? clustering.normalized_centroid(j) : clustering.centroid(j);
    scored[j] = {metric_distance(q.data(), cj, d, metric), j};
  }
  std::sort(scored.begin(), scored.end());
  std::vector<uint32_t> out(k);
  for (uint32_t j = 0; j < k; ++j) out[j] = scored[j].second;
  return out;
}

std::vector<uint32_t> top_n_clusters(std::span<const float> q, const Clustering& clustering,
                                     uint32_t n, Metric metric) {
  if (n > clustering.k) throw std::invalid_argument("top_n_clusters: n > K");
  std::vector<uint32_t> all = rank_clusters(q, clustering, metric);
  all.resize(n);
  return all;
}

}  // namespace vecscan
