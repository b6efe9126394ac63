#include "vecscan/kernels.hpp"

#include <algorithm>

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif
#if defined(__aarch64__) && defined(__linux__)
#include <sys/auxv.h>
#endif

namespace vecscan {

namespace {

void check_shapes(const QuantizedLut& qlut, const CodeBlock& block) {
  uint32_t pairs = (qlut.m + 1) / 2;
  if (block.packed.size() != size_t(pairs) * 32)
    throw std::invalid_argument("block kernel: lut/block subspace count mismatch");
}

void scatter(const uint32_t* acc, const CodeBlock& block, BlockDistances& out) {
  for (uint32_t t = 0; t < 32; ++t) {
    uint32_t v = t < block.valid_count ? std::min(acc[t], 65535u) : 65535u;
    out.values[BlockDistances::position_for_slot(t)] = uint16_t(v);
  }
}

}  // namespace

BlockDistances scalar_block_distances(const QuantizedLut& qlut, const CodeBlock& block) {
  check_shapes(qlut, block);
  uint32_t acc[32];
  for (uint32_t t = 0; t < 32; ++t) {
    uint32_t s = 0;
    for (uint32_t j = 0; j < qlut.m; ++j) s += qlut.at(j, block.code(t, j));
    acc[t] = s;
  }
  BlockDistances out;
  scatter(acc, block, out);
  return out;
}

LutKernel::LutKernel(const QuantizedLut& qlut, uint32_t lanes_per_pass)
    : qlut_(&qlut), pairs_((qlut.m + 1) / 2), lanes_(lanes_per_pass) {
  if (lanes_ != 2 && lanes_ != 4) throw std::invalid_argument("lanes_per_pass must be 2 or 4");
  // fused[p][(i1<<4)|i0] = u[2p][i0] + u[2p+1][i1]; the filler table of an
  // odd trailing subspace contributes zero.
  fused_.assign(size_t(pairs_) * 256, 0);
  for (uint32_t p = 0; p < pairs_; ++p) {
    const uint8_t* t0 = qlut.table(2 * p);
    const uint8_t* t1 = 2 * p + 1 < qlut.m ? qlut.table(2 * p + 1) : nullptr;
    uint16_t* f = fused_.data() + size_t(p) * 256;
    for (uint32_t i1 = 0; i1 < 16; ++i1) {
      uint16_t hi = t1 ? t1[i1] : 0;
#pragma omp simd
      for (uint32_t i0 = 0; i0 < 16; ++i0) f[(i1 << 4) | i0] = uint16_t(hi + t0[i0]);
    }
  }
}

void LutKernel::pass2(const uint8_t* bytes, uint32_t pair, uint32_t* acc) const {
  const uint16_t* f = fused_.data() + size_t(pair) * 256;
  for (uint32_t t = 0; t < 16; ++t) {
    uint8_t b0 = bytes[2 * t];      // subspace 2p, points (2t, 2t+1)
    uint8_t b1 = bytes[2 * t + 1];  // subspace 2p+1, same points
    acc[2 * t] += f[((b1 & 15u) << 4) | (b0 & 15u)];
    acc[2 * t + 1] += f[((b1 >> 4) << 4) | (b0 >> 4)];
  }
}

void LutKernel::pass4(const uint8_t* bytes0, const uint8_t* bytes1, uint32_t pair,
                      uint32_t* acc) const {
  const uint16_t* f0 = fused_.data() + size_t(pair) * 256;
  const uint16_t* f1 = fused_.data() + size_t(pair + 1) * 256;
  for (uint32_t t = 0; t < 16; ++t) {
    uint8_t a0 = bytes0[2 * t], a1 = bytes0[2 * t + 1];
    uint8_t c0 = bytes1[2 * t], c1 = bytes1[2 * t + 1];
    acc[2 * t] += uint32_t(f0[((a1 & 15u) << 4) | (a0 & 15u)]) +
                  uint32_t(f1[((c1 & 15u) << 4) | (c0 & 15u)]);
    acc[2 * t + 1] += uint32_t(f0[((a1 >> 4) << 4) | (a0 >> 4)]) +
                      uint32_t(f1[((c1 >> 4) << 4) | (c0 >> 4)]);
  }
}

void LutKernel::compute(const CodeBlock& block, BlockDistances& out) const {
  check_shapes(*qlut_, block);
  uint32_t acc[32] = {0};
  const uint8_t* packed = block.packed.data();
  uint32_t p = 0;
  if (lanes_ == 4)
    for (; p + 2 <= pairs_; p += 2) pass4(packed + size_t(p) * 32, packed + size_t(p + 1) * 32, p, acc);
  for (; p < pairs_; ++p) pass2(packed + size_t(p) * 32, p, acc);
  scatter(acc, block, out);
}

BlockDistances vector_block_distances(const QuantizedLut& qlut, const CodeBlock& block,
                                      uint32_t lanes_per_pass) {
  LutKernel kernel(qlut, lanes_per_pass);
  BlockDistances out;
  kernel.compute(block, out);
  return out;
}

uint32_t preferred_lanes_per_pass() {
#if defined(__x86_64__) || defined(_M_X64)
  unsigned eax, ebx, ecx, edx;
  if (__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx) && (ebx & (1u << 5))) return 4;  // AVX2
  return 2;
#elif defined(__aarch64__) && defined(__linux__)
  return (getauxval(AT_HWCAP) & (1u << 22)) ? 4 : 2;  // HWCAP_SVE
#else
  return 2;
#endif
}

CandidatePool::CandidatePool(uint32_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("pool capacity must be >= 1");
  heap_.reserve(capacity);
}

namespace {
inline bool pool_less(const PoolEntry& a, const PoolEntry& b) {
  return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}
}  // namespace

bool CandidatePool::would_accept(float dist, uint32_t id) const {
  if (heap_.size() < capacity_) return true;
  const PoolEntry& w = heap_.front();
  return dist < w.dist || (dist == w.dist && id < w.id);
}

void CandidatePool::insert(float dist, uint32_t id, uint16_t acc) {
  PoolEntry e{dist, id, acc};
  if (heap_.size() < capacity_) {
    heap_.push_back(e);
    std::push_heap(heap_.begin(), heap_.end(), pool_less);
    return;
  }
  if (!would_accept(dist, id)) return;
  std::pop_heap(heap_.begin(), heap_.end(), pool_less);
  heap_.back() = e;
  std::push_heap(heap_.begin(), heap_.end(), pool_less);
}

void update_pool(CandidatePool& pool, const BlockDistances& dists,
                 const std::array<uint32_t, 32>& ids, const QuantizedLut& qlut) {
  for (uint32_t t = 0; t < 32; ++t) {
    uint32_t id = ids[t];
    if (id == CodeBlock::kInvalidId) continue;
    uint16_t acc = dists.for_slot(t);
    float dist = qlut.dequantize(acc);
    if (!pool.would_accept(dist, id)) continue;
    pool.insert(dist, id, acc);
  }
}

std::vector<PoolEntry> dequantize_pool(const CandidatePool& pool) {
  std::vector<PoolEntry> out = pool.entries();
  std::sort(out.begin(), out.end(), pool_less);
  return out;
}

}  // namespace vecscan
