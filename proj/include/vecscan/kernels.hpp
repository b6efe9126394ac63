#pragma once

#include "vecscan/lut.hpp"

namespace vecscan {

// Accumulated distances of one 32-point block, stored in the interleaved
// layout used by the pool-merge step: position 2i holds slot i, position
// 2i+1 holds slot 16+i, i.e. slot order (0,16,1,17,...,15,31). Padding
// slots hold 65535.
struct BlockDistances {
  std::array<uint16_t, 32> values{};

  static constexpr uint32_t position_for_slot(uint32_t t) {
    return t < 16 ? 2 * t : 2 * (t - 16) + 1;
  }
  static constexpr uint32_t slot_for_position(uint32_t p) {
    return (p & 1) ? 16 + p / 2 : p / 2;
  }
  uint16_t for_slot(uint32_t t) const { return values[position_for_slot(t)]; }
};

// Reference kernel: per-slot nibble walk over the packed codes. This is
// the semantic oracle the batched variants must match bit for bit.
BlockDistances scalar_block_distances(const QuantizedLut& qlut, const CodeBlock& block);

// Batched kernel processing `lanes_per_pass` (2 or 4) tables per pass over
// fused 256-entry pair tables. Output is bit-identical to the scalar
// reference; the wider pass only changes the instruction mix.
BlockDistances vector_block_distances(const QuantizedLut& qlut, const CodeBlock& block,
                                      uint32_t lanes_per_pass);

// 4 on hardware with 256-bit-class vector units, 2 otherwise.
uint32_t preferred_lanes_per_pass();

// Reusable per-(query, cluster) state: fused pair tables built once, then
// applied to every block of the cluster.
class LutKernel {
 public:
  LutKernel() = default;
  LutKernel(const QuantizedLut& qlut, uint32_t lanes_per_pass);

  void compute(const CodeBlock& block, BlockDistances& out) const;

 private:
  const QuantizedLut* qlut_ = nullptr;
  uint32_t pairs_ = 0;
  uint32_t lanes_ = 2;
  std::vector<uint16_t> fused_;  // pairs * 256

  void pass2(const uint8_t* bytes, uint32_t pair, uint32_t* acc) const;
  void pass4(const uint8_t* bytes0, const uint8_t* bytes1, uint32_t pair, uint32_t* acc) const;
};

struct PoolEntry {
  float dist = 0.f;   // dequantized distance, comparable across clusters
  uint32_t id = 0;
  uint16_t acc = 0;   // raw 16-bit block accumulator
};

// Bounded worst-first set of the `reorder` best (distance, id) pairs seen
// so far. Ties order by smaller id. Single-query, single-thread owned.
class CandidatePool {
 public:
  explicit CandidatePool(uint32_t capacity);

  uint32_t capacity() const { return capacity_; }
  size_t size() const { return heap_.size(); }
  bool full() const { return heap_.size() >= capacity_; }
  const PoolEntry& worst() const { return heap_.front(); }
  bool would_accept(float dist, uint32_t id) const;
  void insert(float dist, uint32_t id, uint16_t acc);
  const std::vector<PoolEntry>& entries() const { return heap_; }

 private:
  uint32_t capacity_;
  std::vector<PoolEntry> heap_;  // max-heap by (dist, id)
};

// Merges one block of distances into the pool; padding slots never enter.
void update_pool(CandidatePool& pool, const BlockDistances& dists,
                 const std::array<uint32_t, 32>& ids, const QuantizedLut& qlut);

// Pool contents sorted by (distance, id) ascending.
std::vector<PoolEntry> dequantize_pool(const CandidatePool& pool);

}  // namespace vecscan
