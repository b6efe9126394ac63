#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "vecscan/kernels.hpp"

using namespace vecscan;

namespace {

QuantizedLut random_lut(uint32_t m, SplitMix64& rng, uint32_t cap = 256) {
  QuantizedLut q;
  q.m = m;
  q.u.resize(size_t(m) * 16);
  for (uint8_t& v : q.u) v = uint8_t(rng.next_below(cap));
  q.scale = 1.f;
  q.bias.assign(m, 0.f);
  q.bias_sum = 0.f;
  return q;
}

CodeBlock random_block(uint32_t m, uint32_t valid, SplitMix64& rng, uint32_t id_base = 0) {
  std::vector<uint32_t> ids(valid);
  std::vector<uint8_t> codes(size_t(valid) * m);
  for (uint32_t i = 0; i < valid; ++i) ids[i] = id_base + i;
  for (uint8_t& c : codes) c = uint8_t(rng.next_below(16));
  return pack_blocks(codes, m, ids)[0];
}

// Second scalar oracle, written byte-first rather than slot-first.
std::array<uint32_t, 32> nibble_walk(const QuantizedLut& lut, const CodeBlock& block) {
  std::array<uint32_t, 32> acc{};
  uint32_t pairs = (lut.m + 1) / 2;
  for (uint32_t p = 0; p < pairs; ++p)
    for (uint32_t byte = 0; byte < 32; ++byte) {
      uint32_t j = 2 * p + (byte & 1);
      if (j >= lut.m) continue;
      uint32_t point_pair = byte >> 1;
      uint8_t packed = block.packed[size_t(p) * 32 + byte];
      acc[2 * point_pair] += lut.at(j, packed & 0xF);
      acc[2 * point_pair + 1] += lut.at(j, packed >> 4);
    }
  return acc;
}

}  // namespace

TEST_CASE("layout permutation is the documented bijection") {
  // slot order by position: 0,16,1,17,...,15,31
  std::vector<uint32_t> seen;
  for (uint32_t p = 0; p < 32; ++p) seen.push_back(BlockDistances::slot_for_position(p));
  for (uint32_t i = 0; i < 16; ++i) {
    CHECK(seen[2 * i] == i);
    CHECK(seen[2 * i + 1] == 16 + i);
  }
  for (uint32_t t = 0; t < 32; ++t)
    CHECK(BlockDistances::slot_for_position(BlockDistances::position_for_slot(t)) == t);
}

TEST_CASE("scalar kernel: uniform codes sum the first column") {
  SplitMix64 rng(1);
  uint32_t m = 8;
  QuantizedLut lut = random_lut(m, rng);
  std::vector<uint8_t> codes(size_t(32) * m, 0);
  std::vector<uint32_t> ids(32);
  for (uint32_t i = 0; i < 32; ++i) ids[i] = i;
  CodeBlock block = pack_blocks(codes, m, ids)[0];
  BlockDistances bd = scalar_block_distances(lut, block);
  uint32_t expected = 0;
  for (uint32_t j = 0; j < m; ++j) expected += lut.at(j, 0);
  for (uint32_t t = 0; t < 32; ++t) CHECK(bd.for_slot(t) == expected);
}

TEST_CASE("scalar kernel: single point with known codes") {
  SplitMix64 rng(2);
  QuantizedLut lut = random_lut(2, rng);
  std::vector<uint8_t> codes{3, 7};
  CodeBlock block = pack_blocks(codes, 2, {5})[0];
  BlockDistances bd = scalar_block_distances(lut, block);
  CHECK(bd.for_slot(0) == lut.at(0, 3) + lut.at(1, 7));
  for (uint32_t t = 1; t < 32; ++t) CHECK(bd.for_slot(t) == 65535);
}

TEST_CASE("scalar kernel equals an independent nibble-by-nibble oracle") {
  SplitMix64 rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    uint32_t m = std::array<uint32_t, 5>{2, 4, 6, 16, 48}[rng.next_below(5)];
    uint32_t valid = 1 + uint32_t(rng.next_below(32));
    QuantizedLut lut = random_lut(m, rng);
    CodeBlock block = random_block(m, valid, rng);
    BlockDistances bd = scalar_block_distances(lut, block);
    std::array<uint32_t, 32> oracle = nibble_walk(lut, block);
    for (uint32_t t = 0; t < 32; ++t) {
      uint32_t expect = t < valid ? std::min(oracle[t], 65535u) : 65535u;
      CHECK(bd.for_slot(t) == expect);
    }
  }
}

TEST_CASE("vector kernels are bit-identical to the scalar reference") {
  SplitMix64 rng(4);
  const uint32_t ms[] = {2, 4, 8, 16, 48, 64, 480};
  const uint32_t valids[] = {1, 31, 32};
  for (uint32_t m : ms)
    for (uint32_t valid : valids)
      for (int rep = 0; rep < 40; ++rep) {
        QuantizedLut lut = random_lut(m, rng);
        CodeBlock block = random_block(m, valid, rng);
        BlockDistances ref = scalar_block_distances(lut, block);
        BlockDistances v2 = vector_block_distances(lut, block, 2);
        BlockDistances v4 = vector_block_distances(lut, block, 4);
        CHECK(v2.values == ref.values);
        CHECK(v4.values == ref.values);
      }
}

TEST_CASE("all-zero lut yields zero distances for valid slots") {
  SplitMix64 rng(5);
  QuantizedLut lut = random_lut(6, rng, 1);  // all entries 0
  CodeBlock block = random_block(6, 32, rng);
  for (uint32_t lanes : {2u, 4u}) {
    BlockDistances bd = vector_block_distances(lut, block, lanes);
    for (uint32_t t = 0; t < 32; ++t) CHECK(bd.for_slot(t) == 0);
  }
}

TEST_CASE("kernels reject mismatched shapes and lane counts") {
  SplitMix64 rng(6);
  QuantizedLut lut = random_lut(4, rng);
  CodeBlock block = random_block(8, 4, rng);
  CHECK_THROWS_AS(scalar_block_distances(lut, block), std::invalid_argument);
  CodeBlock ok = random_block(4, 4, rng);
  CHECK_THROWS_AS(vector_block_distances(lut, ok, 3), std::invalid_argument);
}

TEST_CASE("preferred_lanes_per_pass returns a supported width") {
  uint32_t lanes = preferred_lanes_per_pass();
  CHECK((lanes == 2 || lanes == 4));
}

TEST_CASE("update_pool keeps the reorder smallest with id tie-breaks") {
  SplitMix64 rng(7);
  QuantizedLut lut = random_lut(4, rng);
  CodeBlock block = random_block(4, 32, rng);
  BlockDistances bd = scalar_block_distances(lut, block);

  CandidatePool pool(10);
  update_pool(pool, bd, block.ids, lut);
  CHECK(pool.size() == 10);
  std::vector<PoolEntry> got = dequantize_pool(pool);

  std::vector<std::pair<float, uint32_t>> all;
  for (uint32_t t = 0; t < 32; ++t) all.emplace_back(lut.dequantize(bd.for_slot(t)), block.ids[t]);
  std::sort(all.begin(), all.end());
  for (uint32_t i = 0; i < 10; ++i) {
    CHECK(got[i].dist == all[i].first);
    CHECK(got[i].id == all[i].second);
  }
}

TEST_CASE("padding slots never enter the pool") {
  SplitMix64 rng(8);
  QuantizedLut lut = random_lut(4, rng, 1);  // zero lut: real slots all 0
  CodeBlock block = random_block(4, 3, rng);
  CandidatePool pool(32);
  BlockDistances bd = scalar_block_distances(lut, block);
  update_pool(pool, bd, block.ids, lut);
  CHECK(pool.size() == 3);
}

TEST_CASE("full pool ignores strictly worse blocks") {
  QuantizedLut lut;
  lut.m = 2;
  lut.u.assign(32, 0);
  lut.scale = 1.f;
  lut.bias.assign(2, 0.f);
  lut.bias_sum = 0.f;

  CandidatePool pool(4);
  pool.insert(1.f, 0, 1);
  pool.insert(2.f, 1, 2);
  pool.insert(3.f, 2, 3);
  pool.insert(4.f, 3, 4);
  std::vector<PoolEntry> before = dequantize_pool(pool);

  BlockDistances bd;
  std::array<uint32_t, 32> ids;
  for (uint32_t t = 0; t < 32; ++t) {
    bd.values[BlockDistances::position_for_slot(t)] = uint16_t(100 + t);
    ids[t] = 50 + t;
  }
  update_pool(pool, bd, ids, lut);
  std::vector<PoolEntry> after = dequantize_pool(pool);
  REQUIRE(after.size() == before.size());
  for (size_t i = 0; i < after.size(); ++i) {
    CHECK(after[i].dist == before[i].dist);
    CHECK(after[i].id == before[i].id);
  }
}

TEST_CASE("fuzzed block sequences match the sort-everything oracle") {
  SplitMix64 rng(9);
  for (int round = 0; round < 10; ++round) {
    uint32_t m = 8;
    uint32_t reorder = 1 + uint32_t(rng.next_below(200));
    QuantizedLut lut = random_lut(m, rng);
    CandidatePool pool(reorder);
    std::vector<std::pair<float, uint32_t>> all;
    for (int b = 0; b < 100; ++b) {
      uint32_t valid = 1 + uint32_t(rng.next_below(32));
      CodeBlock block = random_block(m, valid, rng, uint32_t(b) * 100);
      BlockDistances bd = scalar_block_distances(lut, block);
      update_pool(pool, bd, block.ids, lut);
      for (uint32_t t = 0; t < valid; ++t)
        all.emplace_back(lut.dequantize(bd.for_slot(t)), block.ids[t]);
    }
    std::sort(all.begin(), all.end());
    all.resize(std::min<size_t>(reorder, all.size()));
    std::vector<PoolEntry> got = dequantize_pool(pool);
    REQUIRE(got.size() == all.size());
    for (size_t i = 0; i < all.size(); ++i) {
      CHECK(got[i].dist == all[i].first);
      CHECK(got[i].id == all[i].second);
    }
  }
}

TEST_CASE("pool contents are independent of block arrival order") {
  SplitMix64 rng(10);
  uint32_t m = 4;
  QuantizedLut lut = random_lut(m, rng);
  std::vector<CodeBlock> blocks;
  for (int b = 0; b < 20; ++b) blocks.push_back(random_block(m, 32, rng, uint32_t(b) * 32));

  auto run = [&](const std::vector<CodeBlock>& seq) {
    CandidatePool pool(50);
    for (const CodeBlock& blk : seq) {
      BlockDistances bd = scalar_block_distances(lut, blk);
      update_pool(pool, bd, blk.ids, lut);
    }
    std::vector<PoolEntry> v = dequantize_pool(pool);
    std::vector<std::pair<float, uint32_t>> out;
    for (const PoolEntry& e : v) out.emplace_back(e.dist, e.id);
    return out;
  };
  std::vector<CodeBlock> shuffled = blocks;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(run(blocks) == run(shuffled));
}

TEST_CASE("dequantize_pool restores affine float distances") {
  QuantizedLut lut;
  lut.m = 2;
  lut.u.assign(32, 0);
  lut.scale = 0.5f;
  lut.bias = {1.f, 2.f};
  lut.bias_sum = 3.f;
  CandidatePool pool(4);
  pool.insert(lut.dequantize(0), 9, 0);
  pool.insert(lut.dequantize(10), 4, 10);
  std::vector<PoolEntry> v = dequantize_pool(pool);
  CHECK(v[0].dist == doctest::Approx(3.f));    // acc = 0 -> bias sum
  CHECK(v[0].id == 9);
  CHECK(v[1].dist == doctest::Approx(8.f));    // 0.5 * 10 + 3
}
