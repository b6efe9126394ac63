// Throughput comparison of the block-distance kernels: scalar reference vs
// the fused 2-LUT and 4-LUT passes, plus the pool-merge stage.

#include <chrono>
#include <cstdio>
#include <vector>

#include "vecscan/kernels.hpp"

using namespace vecscan;

namespace {

QuantizedLut random_lut(uint32_t m, SplitMix64& rng) {
  QuantizedLut q;
  q.m = m;
  q.u.resize(size_t(m) * 16);
  for (uint8_t& v : q.u) v = uint8_t(rng.next_below(256));
  q.scale = 1.f;
  q.bias.assign(m, 0.f);
  q.bias_sum = 0.f;
  return q;
}

CodeBlock random_block(uint32_t m, SplitMix64& rng) {
  std::vector<uint32_t> ids(32);
  std::vector<uint8_t> codes(size_t(32) * m);
  for (uint32_t i = 0; i < 32; ++i) ids[i] = i;
  for (uint8_t& c : codes) c = uint8_t(rng.next_below(16));
  return pack_blocks(codes, m, ids)[0];
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  const uint32_t kBlocks = 512;
  const uint32_t kRepeats = 200;
  std::printf("%-8s %14s %14s %14s\n", "m", "scalar Mpts/s", "2-lut Mpts/s", "4-lut Mpts/s");

  for (uint32_t m : {8u, 16u, 64u, 128u, 480u}) {
    SplitMix64 rng(42 + m);
    QuantizedLut lut = random_lut(m, rng);
    std::vector<CodeBlock> blocks;
    for (uint32_t b = 0; b < kBlocks; ++b) blocks.push_back(random_block(m, rng));

    BlockDistances bd;
    volatile uint32_t sink = 0;

    auto t0 = std::chrono::steady_clock::now();
    for (uint32_t r = 0; r < kRepeats; ++r)
      for (const CodeBlock& b : blocks) {
        bd = scalar_block_distances(lut, b);
        sink += bd.values[0];
      }
    double scalar_s = seconds_since(t0);

    double lanes_s[2];
    for (uint32_t li = 0; li < 2; ++li) {
      LutKernel kernel(lut, li == 0 ? 2 : 4);
      t0 = std::chrono::steady_clock::now();
      for (uint32_t r = 0; r < kRepeats; ++r)
        for (const CodeBlock& b : blocks) {
          kernel.compute(b, bd);
          sink += bd.values[0];
        }
      lanes_s[li] = seconds_since(t0);
    }

    double pts = double(kBlocks) * kRepeats * 32;
    std::printf("%-8u %14.1f %14.1f %14.1f\n", m, pts / scalar_s / 1e6, pts / lanes_s[0] / 1e6,
                pts / lanes_s[1] / 1e6);
  }

  // pool merge
  SplitMix64 rng(7);
  QuantizedLut lut = random_lut(64, rng);
  std::vector<CodeBlock> blocks;
  std::vector<BlockDistances> dists;
  LutKernel kernel(lut, 2);
  BlockDistances bd;
  for (uint32_t b = 0; b < 4096; ++b) {
    blocks.push_back(random_block(64, rng));
    kernel.compute(blocks.back(), bd);
    dists.push_back(bd);
  }
  auto t0 = std::chrono::steady_clock::now();
  uint32_t rounds = 50;
  for (uint32_t r = 0; r < rounds; ++r) {
    CandidatePool pool(1000);
    for (size_t b = 0; b < blocks.size(); ++b) update_pool(pool, dists[b], blocks[b].ids, lut);
  }
  double merge_s = seconds_since(t0);
  std::printf("\npool merge: %.1f Mcand/s (capacity 1000)\n",
              double(rounds) * blocks.size() * 32 / merge_s / 1e6);
  return 0;
}
