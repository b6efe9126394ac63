#include "vecscan/adaptive.hpp"

#include <algorithm>
#include <cmath>

namespace vecscan {

namespace {

uint32_t interpolate(float p, uint32_t lo, uint32_t hi, float p0, float p1) {
  if (p < 0.f || p > 1.f) throw std::invalid_argument("interpolate: p outside [0,1]");
  float relu = std::max(0.f, p - p0);
  float delta = float(hi - lo);
  double v = std::llround(double(lo) + double(delta) * double(relu) * double(p + p1));
  uint32_t out = uint32_t(std::min<double>(double(hi), v));
  return std::max(lo, std::min(hi, out));
}

}  // namespace

uint32_t interpolate_nprob(float p, const AdaptiveParams& params) {
  return interpolate(p, params.nprob_min, params.nprob_max, params.p0, params.p1);
}

uint32_t interpolate_reorder(float p, const AdaptiveParams& params) {
  return interpolate(p, params.reorder_min, params.reorder_max, params.p0_reorder,
                     params.p1_reorder);
}

std::vector<float> principal_component(const VectorSet& set, const std::vector<uint32_t>& members,
                                       const float* center,
                                       const std::vector<const float*>& deflate, SplitMix64& rng) {
  const uint32_t d = set.d;
  std::vector<float> v(d), next(d);
  for (uint32_t t = 0; t < d; ++t) v[t] = rng.next_gaussian();
  auto normalize = [&](std::vector<float>& x) {
    for (const float* prev : deflate) {
      float proj = dot(x.data(), prev, d);
      for (uint32_t t = 0; t < d; ++t) x[t] -= proj * prev[t];
    }
    float nrm = norm2(x.data(), d);
    if (nrm < 1e-20f) return false;
    for (uint32_t t = 0; t < d; ++t) x[t] /= nrm;
    return true;
  };
  if (!normalize(v)) return std::vector<float>(d, 0.f);

  for (uint32_t iter = 0; iter < 100; ++iter) {
    std::fill(next.begin(), next.end(), 0.f);
    for (uint32_t i : members) {
      const float* x = set.row(i);
      float proj = 0.f;
#pragma omp simd reduction(+ : proj)
      for (uint32_t t = 0; t < d; ++t) proj += (x[t] - center[t]) * v[t];
      for (uint32_t t = 0; t < d; ++t) next[t] += (x[t] - center[t]) * proj;
    }
    if (!normalize(next)) return std::vector<float>(d, 0.f);
    // sign-align before the convergence check
    if (dot(next.data(), v.data(), d) < 0.f)
      for (uint32_t t = 0; t < d; ++t) next[t] = -next[t];
    float diff = 0.f;
    for (uint32_t t = 0; t < d; ++t) {
      float e = next[t] - v[t];
      diff += e * e;
    }
    v.swap(next);
    if (std::sqrt(diff) < 1e-4f) break;
  }
  return v;
}

std::vector<ClusterStats> build_cluster_stats(const VectorSet& set, const Clustering& clustering,
                                              uint64_t seed) {
  const uint32_t k = clustering.k, d = set.d;
  std::vector<std::vector<uint32_t>> members(k);
  for (uint32_t i = 0; i < set.n; ++i) members[clustering.assignment[i]].push_back(i);

  std::vector<ClusterStats> stats(k);
#pragma omp parallel for schedule(dynamic)
  for (int64_t j = 0; j < int64_t(k); ++j) {
    ClusterStats& s = stats[j];
    const std::vector<uint32_t>& mem = members[j];
    const float* c = clustering.centroid(uint32_t(j));
    std::vector<float> dist(mem.size());
    for (size_t i = 0; i < mem.size(); ++i) dist[i] = std::sqrt(l2_sq(set.row(mem[i]), c, d));
    s.radius = mem.empty() ? 0.f : *std::max_element(dist.begin(), dist.end());

    for (size_t i = 0; i < mem.size(); ++i) {
      uint32_t bin = s.radius > 0.f ? std::min(7u, uint32_t(dist[i] / s.radius * 8.f)) : 0u;
      s.histogram[bin]++;
    }

    // 95th-percentile outliers and their mean direction from the centroid.
    s.outlier_dir.assign(d, 0.f);
    if (!mem.empty()) {
      std::vector<float> sorted = dist;
      std::sort(sorted.begin(), sorted.end());
      float p95 = sorted[size_t(0.95 * double(sorted.size() - 1))];
      for (size_t i = 0; i < mem.size(); ++i) {
        if (dist[i] <= p95 || dist[i] == 0.f) continue;
        s.outlier_count++;
        const float* x = set.row(mem[i]);
        for (uint32_t t = 0; t < d; ++t) s.outlier_dir[t] += (x[t] - c[t]) / dist[i];
      }
      if (s.outlier_count > 0)
        for (uint32_t t = 0; t < d; ++t) s.outlier_dir[t] /= float(s.outlier_count);
    }

    if (mem.size() < 2) {
      s.pc1.assign(d, 0.f);
      s.pc2.assign(d, 0.f);
      s.degenerate_pcs = 1;
    } else {
      SplitMix64 rng(seed, uint64_t(j));
      s.pc1 = principal_component(set, mem, c, {}, rng);
      s.pc2 = principal_component(set, mem, c, {s.pc1.data()}, rng);
      if (norm2(s.pc1.data(), d) == 0.f) s.degenerate_pcs = 1;
    }
  }
  return stats;
}

std::vector<float> query_features(std::span<const float> q, const Clustering& clustering,
                                  Metric metric, const std::vector<ClusterStats>& stats,
                                  uint32_t t, const std::vector<uint32_t>* ranked) {
  t = std::min(t, clustering.k);
  std::vector<uint32_t> local;
  if (!ranked) {
    local = rank_clusters(q, clustering, metric);
    ranked = &local;
  }
  const bool angular = metric == Metric::Angular && !clustering.normalized_centroids.empty();
  std::vector<float> f;
  f.reserve(size_t(t) * 4);
  std::vector<float> dists(t);
  for (uint32_t i = 0; i < t; ++i) {
    uint32_t cid = (*ranked)[i];
    const float* c = angular ? clustering.normalized_centroid(cid) : clustering.centroid(cid);
    dists[i] = metric_distance(q.data(), c, clustering.d, metric);
  }
  float d0 = std::max(dists.empty() ? 0.f : dists[0], 1e-20f);
  for (uint32_t i = 0; i < t; ++i) f.push_back(dists[i]);
  for (uint32_t i = 0; i < t; ++i) f.push_back(dists[i] / d0);
  for (uint32_t i = 0; i < t; ++i) f.push_back(float(clustering.sizes[(*ranked)[i]]));
  for (uint32_t i = 0; i < t; ++i) f.push_back(stats[(*ranked)[i]].radius);
  return f;
}

std::vector<float> cluster_features(std::span<const float> q, uint32_t cluster,
                                    float d_qc, float d_nearest, const Clustering& clustering,
                                    const std::vector<ClusterStats>& stats) {
  const uint32_t d = clustering.d;
  const ClusterStats& s = stats[cluster];
  const float* c = clustering.centroid(cluster);

  std::vector<float> qc(d);
  for (uint32_t t = 0; t < d; ++t) qc[t] = q[t] - c[t];
  float qn = norm2(qc.data(), d);
  if (qn > 0.f)
    for (uint32_t t = 0; t < d; ++t) qc[t] /= qn;

  std::vector<float> f;
  f.reserve(kClusterFeatureCount);
  f.push_back(d_qc);
  f.push_back(d_qc / std::max(d_nearest, 1e-20f));
  f.push_back(float(clustering.sizes[cluster]));
  f.push_back(s.radius);
  f.push_back(s.pc1.empty() ? 0.f : dot(s.pc1.data(), qc.data(), d));
  f.push_back(s.pc2.empty() ? 0.f : dot(s.pc2.data(), qc.data(), d));
  f.push_back(float(s.outlier_count));
  for (uint32_t b = 0; b < 8; ++b) f.push_back(float(s.histogram[b]));
  f.push_back(s.outlier_dir.empty() ? 0.f : dot(s.outlier_dir.data(), qc.data(), d));
  return f;
}

std::vector<uint8_t> make_labels(const Clustering& clustering, Metric metric,
                                 const VectorSet& queries, const GroundTruth& gt,
                                 uint32_t nprob_min, uint32_t k) {
  if (gt.nq != queries.n || gt.k < k)
    throw std::invalid_argument("make_labels: ground truth does not cover the queries");
  std::vector<uint8_t> labels(queries.n, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t qi = 0; qi < int64_t(queries.n); ++qi) {
    std::vector<uint32_t> top =
        top_n_clusters(queries.row_span(uint32_t(qi)), clustering,
                       std::min(nprob_min, clustering.k), metric);
    std::vector<char> in_top(clustering.k, 0);
    for (uint32_t cid : top) in_top[cid] = 1;
    const uint32_t* ids = gt.ids_for(uint32_t(qi));
    for (uint32_t j = 0; j < k; ++j)
      if (!in_top[clustering.assignment[ids[j]]]) {
        labels[qi] = 1;  // hard
        break;
      }
  }
  return labels;
}

GbdtModel train_prob_model(const std::vector<float>& features, uint32_t n_features,
                           const std::vector<uint8_t>& labels, const GbdtConfig& config) {
  if (labels.size() < 50) throw std::invalid_argument("train_prob_model: need at least 50 samples");
  return GbdtModel::train(features, n_features, labels, config);
}

bool predict_keep(std::span<const float> features, const GbdtModel& model, float theta) {
  if (theta >= 1.f) throw std::invalid_argument("predict_keep: theta = 1 would prune everything");
  if (theta <= 0.f) return true;
  return model.predict(features) > theta;
}

}  // namespace vecscan
