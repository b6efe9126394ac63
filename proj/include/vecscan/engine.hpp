#pragma once

#include "vecscan/adaptive.hpp"
#include "vecscan/filtration.hpp"
#include "vecscan/leafgraph.hpp"

namespace vecscan {

struct BuildParams {
  uint32_t clusters = 0;  // L; 0 derives round(sqrt(n))
  uint32_t dprime = 2;
  ResidualMode residual_mode = ResidualMode::RawMean;
  bool graph = false;
  uint32_t graph_degree = 16;
  bool filtration = false;
  float filter_threshold = 0.95f;
  uint32_t filter_d_min = 8;
  bool normalize_angular = true;
  uint32_t lanes_override = 0;  // 0 probes the hardware
  uint32_t kmeans_iters = 25;
  float kmeans_epsilon = 1e-4f;
  uint64_t seed = 0;
};

struct ClusterData {
  std::vector<uint32_t> members;  // ascending global ids
  std::vector<CodeBlock> blocks;
  LeafGraph graph;  // n == 0 when graphs are off
};

struct Index {
  static constexpr uint32_t kFormatVersion = 1;

  Metric metric = Metric::L2;
  uint32_t n = 0;
  uint32_t d_init = 0;  // original dimensionality
  uint32_t d = 0;       // kept dimensionality after filtration
  BuildParams params;
  bool has_filter = false;
  DimFilter filter;
  VectorSet X;       // searched vectors (normalized / filtered)
  VectorSet X_init;  // original-dim rows, present only when filtration pruned dims
  bool has_x_init = false;
  Clustering clustering;
  Codebooks codebooks;
  std::vector<ClusterData> clusters;
  std::vector<ClusterStats> stats;
  AdaptiveModels models;
  uint32_t kernel_lanes = 2;  // chosen at open time, not persisted

  const VectorSet& rerank_set() const { return has_x_init ? X_init : X; }
  uint32_t L() const { return clustering.k; }
};

struct SearchRequest {
  uint32_t k = 10;
  uint32_t nprob = 1;      // nprob_init
  uint32_t reorder = 100;  // reorder_init; must be >= k
  bool adaptive = false;   // use nprob/reorder models when present
  float theta = 0.f;       // prune guard; 0 keeps every cluster
  bool use_graph = true;   // honor per-cluster graphs when built
  HybridPolicy policy{};
};

struct SearchDiagnostics {
  uint32_t nprob_used = 0;
  uint32_t reorder_used = 0;
  uint32_t clusters_probed = 0;
  uint32_t clusters_pruned = 0;
  uint64_t points_scanned = 0;
  uint32_t escalations = 0;
};

struct Neighbor {
  uint32_t id = 0;
  float dist = 0.f;
};

struct SearchResult {
  std::vector<Neighbor> neighbors;  // distances non-decreasing, ids unique
  SearchDiagnostics diag;
};

Index build_index(const VectorSet& set, const BuildParams& params);

SearchResult search(const Index& index, std::span<const float> q, const SearchRequest& request);

// Alg-3 branch for one cluster: graph path (with escalation) or block scan.
void search_in_cluster(const Index& index, uint32_t cluster, uint32_t rank,
                       const QuantizedLut& qlut, const LutKernel& kernel,
                       const SearchRequest& request, CandidatePool& pool,
                       SearchDiagnostics& diag);

// Exact re-ranking in the original dimensionality; duplicate ids are
// collapsed first, ties by smaller id.
std::vector<Neighbor> rerank_exact(const std::vector<PoolEntry>& entries,
                                   std::span<const float> q_init, const VectorSet& exact_set,
                                   uint32_t k, Metric metric);

// The query as the index sees it: filtered, and unit-normalized for
// Angular indices.
std::vector<float> preprocess_query(const Index& index, std::span<const float> q);

struct TrainParams {
  uint32_t k = 10;
  uint32_t nprob_min = 0;   // 0 derives from L
  uint32_t nprob_max = 0;
  uint32_t reorder_min = 0;  // 0 derives from k
  uint32_t reorder_max = 0;
  float p0 = 0.1f, p1 = 0.2f;
  float p0_reorder = 0.1f, p1_reorder = 0.2f;
  float theta = 0.2f;
  uint32_t t_features = 16;
  uint32_t max_prune_samples = 20000;
  GbdtConfig gbdt{};
  bool train_nprob = true;
  bool train_reorder = true;
  bool train_prune = true;
  uint64_t seed = 0;
};

// Fits the three predictors from training queries; ground truth is
// computed internally by exhaustive search.
void train_adaptive(Index& index, const VectorSet& training_queries, const TrainParams& params);

void save_index(const Index& index, const std::string& path);
Index load_index(const std::string& path, uint32_t lanes_override = 0);

}  // namespace vecscan
