#pragma once

#include <vector>

#include "vecscan/dataset.hpp"

namespace vecscan {

struct KMeansConfig {
  uint32_t max_iters = 25;
  float epsilon = 1e-4f;  // stop when relative objective improvement falls below
  uint64_t seed = 0;
};

struct Clustering {
  uint32_t k = 0;
  uint32_t d = 0;
  std::vector<float> centroids;             // k * d, raw means (never normalized)
  std::vector<float> normalized_centroids;  // k * d, unit-norm copies (Angular only)
  std::vector<uint32_t> assignment;         // n
  std::vector<uint32_t> sizes;              // k
  std::vector<double> objective_history;    // intra-cluster variance per Lloyd step

  const float* centroid(uint32_t j) const { return centroids.data() + size_t(j) * d; }
  const float* normalized_centroid(uint32_t j) const {
    return normalized_centroids.data() + size_t(j) * d;
  }
};

// Lloyd iterations with k-means++ seeding. Deterministic for a fixed seed;
// empty clusters are reseeded from the point farthest from its centroid in
// the largest cluster. For Angular sets the caller clusters normalized
// points; both the raw-mean and unit-norm centroid forms are kept.
Clustering train_kmeans(const VectorSet& points, uint32_t k, const KMeansConfig& config = {});

// Argmin over centroids of squared L2, ties to the smaller id.
uint32_t assign_point(std::span<const float> x, const Clustering& clustering);

// n cluster ids ordered by distance(q, centroid) ascending, ties by smaller
// id. Angular queries rank against the normalized centroids.
std::vector<uint32_t> top_n_clusters(std::span<const float> q, const Clustering& clustering,
                                     uint32_t n, Metric metric);

// Full ordering of all clusters; top_n_clusters is its prefix.
std::vector<uint32_t> rank_clusters(std::span<const float> q, const Clustering& clustering,
                                    Metric metric);

}  // namespace vecscan
