#pragma once

#include "vecscan/kernels.hpp"

namespace vecscan {

// Exact within-cluster kNN graph over local point ids. Adjacency rows are
// fixed at `degree` entries padded with kInvalidId; the flat array is
// padded to a multiple of 32 entries for block-friendly storage.
struct LeafGraph {
  static constexpr uint32_t kInvalidId = 0xffffffffu;

  uint32_t degree = 0;
  uint32_t n = 0;
  uint32_t entry_point = 0;  // local id nearest the centroid
  std::vector<uint32_t> adjacency;

  const uint32_t* neighbors(uint32_t local) const {
    return adjacency.data() + size_t(local) * degree;
  }
  bool empty() const { return n == 0; }
};

struct HybridPolicy {
  uint32_t brute_nearest = 3;        // B: this many closest clusters scan brute-force
  uint32_t efs_small = 0;            // graph pool size; 0 means 2k at search time
  float escalation_fraction = 0.25f; // f
};

enum class ClusterStrategy : uint8_t { BruteForce = 0, Graph = 1 };

// |C| <= R+1 yields the complete graph.
LeafGraph build_leaf_graph(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, Metric metric, uint32_t degree);

struct GraphSearchResult {
  std::vector<PoolEntry> candidates;  // <= efs entries, unique ids
  uint64_t evaluations = 0;           // points run through the kernel
};

// Best-first beam search from the entry point, distances evaluated through
// the quantized-LUT pipeline by gathering adjacency ids into temporary
// 32-slot blocks. Stops when the best unexpanded candidate is worse than
// the pool's worst.
GraphSearchResult graph_search(const LeafGraph& graph, const std::vector<CodeBlock>& blocks,
                               const QuantizedLut& qlut, const LutKernel& kernel, uint32_t efs);

ClusterStrategy choose_strategy(uint32_t rank, const HybridPolicy& policy);

// True iff at least f*efs of the graph's candidates beat the pool's worst
// distance, or the pool is not yet full.
bool should_escalate(const std::vector<PoolEntry>& graph_results, const CandidatePool& pool,
                     const HybridPolicy& policy, uint32_t efs);

}  // namespace vecscan
