#pragma once

#include <array>

#include "vecscan/gbdt.hpp"
#include "vecscan/kmeans.hpp"

namespace vecscan {

// Interpolation hyper-parameters plus the prune threshold. The predicted
// probability p is the model's hard-query score; nprob grows from
// nprob_min toward nprob_max as
//   nprob = min(max, round(min + (max-min) * relu(p - p0) * (p + p1))).
struct AdaptiveParams {
  uint32_t nprob_min = 1;
  uint32_t nprob_max = 1;
  float p0 = 0.1f;
  float p1 = 0.2f;
  uint32_t reorder_min = 1;
  uint32_t reorder_max = 1;
  float p0_reorder = 0.1f;
  float p1_reorder = 0.2f;
  float theta = 0.2f;
  uint32_t t_features = 16;  // centroids per query feature vector
};

uint32_t interpolate_nprob(float p, const AdaptiveParams& params);
uint32_t interpolate_reorder(float p, const AdaptiveParams& params);

// Per-cluster geometry captured at build time for features and policies.
struct ClusterStats {
  float radius = 0.f;                   // max Euclidean distance to the centroid
  std::vector<float> pc1, pc2;          // top-2 principal components (unit)
  std::array<uint32_t, 8> histogram{};  // centroid-distance counts, bins over [0, radius]
  uint32_t outlier_count = 0;           // points beyond the 95th percentile
  std::vector<float> outlier_dir;       // mean unit direction centroid->outlier
  uint8_t degenerate_pcs = 0;           // set when PCs are undefined (singleton cluster)
};

std::vector<ClusterStats> build_cluster_stats(const VectorSet& set, const Clustering& clustering,
                                              uint64_t seed = 0);

// Leading eigenvector of the scatter of (x - center) over the listed rows,
// deflated against any prior components, via power iteration (tolerance
// 1e-4, at most 100 rounds). Returns the zero vector when undefined.
std::vector<float> principal_component(const VectorSet& set, const std::vector<uint32_t>& members,
                                       const float* center,
                                       const std::vector<const float*>& deflate, SplitMix64& rng);

// Query feature vector: for each of the t nearest centroids its distance,
// the ratio to the nearest, the cluster size and the cluster radius (4t
// floats, fixed length per index).
std::vector<float> query_features(std::span<const float> q, const Clustering& clustering,
                                  Metric metric, const std::vector<ClusterStats>& stats,
                                  uint32_t t, const std::vector<uint32_t>* ranked = nullptr);

constexpr uint32_t kClusterFeatureCount = 16;

// Cluster-vs-query features: d(q,c), relative distance, |C|, radius,
// skew of the top-2 principal components against the centroid->query
// direction, outlier count, 8-bin centroid-distance histogram, and the
// outlier-direction alignment. 16 floats.
std::vector<float> cluster_features(std::span<const float> q, uint32_t cluster,
                                    float d_qc, float d_nearest, const Clustering& clustering,
                                    const std::vector<ClusterStats>& stats);

// Hard-query labels: 1 when some of the k true neighbors lives outside
// the nprob_min nearest clusters of the query.
std::vector<uint8_t> make_labels(const Clustering& clustering, Metric metric,
                                 const VectorSet& queries, const GroundTruth& gt,
                                 uint32_t nprob_min, uint32_t k);

// Thin wrapper enforcing the minimum sample count.
GbdtModel train_prob_model(const std::vector<float>& features, uint32_t n_features,
                           const std::vector<uint8_t>& labels, const GbdtConfig& config = {});

// keep iff p > theta; theta <= 0 keeps everything. theta = 1 is rejected
// as recall-destroying configuration.
bool predict_keep(std::span<const float> features, const GbdtModel& model, float theta);

struct AdaptiveModels {
  bool has_nprob = false;
  bool has_reorder = false;
  bool has_prune = false;
  GbdtModel nprob_model;
  GbdtModel reorder_model;
  GbdtModel prune_model;
  AdaptiveParams params;
};

}  // namespace vecscan
