#include "vecscan/leafgraph.hpp"

#include <algorithm>
#include <queue>

namespace vecscan {

LeafGraph build_leaf_graph(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, Metric metric, uint32_t degree) {
  if (members.empty()) throw std::invalid_argument("build_leaf_graph: empty cluster");
  LeafGraph g;
  g.n = uint32_t(members.size());
  g.degree = degree;
  size_t rows = size_t(g.n) * degree;
  g.adjacency.assign((rows + 31) / 32 * 32, LeafGraph::kInvalidId);

  float best_entry = std::numeric_limits<float>::infinity();
  for (uint32_t i = 0; i < g.n; ++i) {
    float dc = metric_distance(set.row(members[i]), centroid, set.d, metric);
    if (dc < best_entry) {
      best_entry = dc;
      g.entry_point = i;
    }
  }

  std::vector<std::pair<float, uint32_t>> cand(g.n);
#pragma omp parallel for schedule(dynamic, 8) firstprivate(cand)
  for (int64_t i = 0; i < int64_t(g.n); ++i) {
    const float* x = set.row(members[i]);
    for (uint32_t j = 0; j < g.n; ++j)
      cand[j] = {metric_distance(x, set.row(members[j]), set.d, metric), j};
    cand[i].first = std::numeric_limits<float>::infinity();  // no self-loop
    uint32_t take = std::min(degree, g.n - 1);
    std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
    for (uint32_t t = 0; t < take; ++t) g.adjacency[size_t(i) * degree + t] = cand[t].second;
  }
  return g;
}

namespace {

// Codes of arbitrary local points copied into a fresh 32-slot block.
CodeBlock gather_block(const std::vector<CodeBlock>& blocks, const uint32_t* locals,
                       uint32_t count, uint32_t pairs) {
  CodeBlock out;
  out.valid_count = count;
  out.ids.fill(CodeBlock::kInvalidId);
  out.packed.assign(size_t(pairs) * 32, 0);
  for (uint32_t s = 0; s < count; ++s) {
    uint32_t local = locals[s];
    const CodeBlock& src = blocks[local / 32];
    uint32_t src_slot = local % 32;
    out.ids[s] = src.ids[src_slot];
    for (uint32_t p = 0; p < pairs; ++p)
      for (uint32_t half = 0; half < 2; ++half) {
        uint8_t byte = src.packed[size_t(p) * 32 + 2 * (src_slot >> 1) + half];
        uint8_t code = (src_slot & 1) ? uint8_t(byte >> 4) : uint8_t(byte & 0xF);
        uint8_t& dst = out.packed[size_t(p) * 32 + 2 * (s >> 1) + half];
        dst = (s & 1) ? uint8_t((dst & 0x0F) | (code << 4)) : uint8_t((dst & 0xF0) | code);
      }
  }
  // padding slots carry code 15 everywhere
  for (uint32_t s = count; s < 32; ++s)
    for (uint32_t p = 0; p < pairs; ++p)
      for (uint32_t half = 0; half < 2; ++half) {
        uint8_t& dst = out.packed[size_t(p) * 32 + 2 * (s >> 1) + half];
        dst = (s & 1) ? uint8_t((dst & 0x0F) | 0xF0) : uint8_t((dst & 0xF0) | 0x0F);
      }
  return out;
}

}  // namespace

GraphSearchResult graph_search(const LeafGraph& graph, const std::vector<CodeBlock>& blocks,
                               const QuantizedLut& qlut, const LutKernel& kernel, uint32_t efs) {
  if (efs == 0) throw std::invalid_argument("graph_search: efs must be >= 1");
  GraphSearchResult res;
  if (graph.n == 0) return res;
  const uint32_t pairs = (qlut.m + 1) / 2;

  std::vector<uint8_t> visited(graph.n, 0);
  CandidatePool pool(efs);
  using Frontier = std::pair<float, uint32_t>;  // (distance, local id)
  std::priority_queue<Frontier, std::vector<Frontier>, std::greater<>> frontier;

  std::vector<uint16_t> local_acc(32);
  std::vector<uint32_t> batch;
  batch.reserve(32);
  BlockDistances bd;

  auto evaluate = [&](const uint32_t* locals, uint32_t count) {
    CodeBlock tmp = gather_block(blocks, locals, count, pairs);
    kernel.compute(tmp, bd);
    res.evaluations += count;
    for (uint32_t s = 0; s < count; ++s) {
      uint16_t acc = bd.for_slot(s);
      float dist = qlut.dequantize(acc);
      pool.insert(dist, tmp.ids[s], acc);
      frontier.emplace(dist, locals[s]);
    }
  };

  visited[graph.entry_point] = 1;
  uint32_t entry = graph.entry_point;
  evaluate(&entry, 1);

  while (!frontier.empty()) {
    auto [dist, local] = frontier.top();
    frontier.pop();
    if (pool.full() && dist > pool.worst().dist) break;
    batch.clear();
    const uint32_t* adj = graph.neighbors(local);
    for (uint32_t t = 0; t < graph.degree; ++t) {
      uint32_t nb = adj[t];
      if (nb == LeafGraph::kInvalidId || visited[nb]) continue;
      visited[nb] = 1;
      batch.push_back(nb);
      if (batch.size() == 32) {
        evaluate(batch.data(), 32);
        batch.clear();
      }
    }
    if (!batch.empty()) evaluate(batch.data(), uint32_t(batch.size()));
  }
  res.candidates = dequantize_pool(pool);
  return res;
}

ClusterStrategy choose_strategy(uint32_t rank, const HybridPolicy& policy) {
  return rank < policy.brute_nearest ? ClusterStrategy::BruteForce : ClusterStrategy::Graph;
}

bool should_escalate(const std::vector<PoolEntry>& graph_results, const CandidatePool& pool,
                     const HybridPolicy& policy, uint32_t efs) {
  if (!pool.full()) return true;
  const PoolEntry& w = pool.worst();
  uint32_t beating = 0;
  for (const PoolEntry& e : graph_results)
    if (e.dist < w.dist || (e.dist == w.dist && e.id < w.id)) ++beating;
  return float(beating) >= policy.escalation_fraction * float(efs);
}

}  // namespace vecscan
