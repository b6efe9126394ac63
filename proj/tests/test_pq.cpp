#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "vecscan/pq.hpp"

using namespace vecscan;

namespace {

VectorSet gaussian_set(uint32_t n, uint32_t d, uint64_t seed) {
  VectorSet s;
  s.n = n;
  s.d = d;
  s.data.resize(size_t(n) * d);
  SplitMix64 rng(seed);
  for (float& v : s.data) v = rng.next_gaussian();
  return s;
}

VectorSet unit_sphere_set(uint32_t n, uint32_t d, uint64_t seed) {
  VectorSet s = gaussian_set(n, d, seed);
  s.metric = Metric::Angular;
  for (uint32_t i = 0; i < n; ++i) {
    float* r = s.row(i);
    float nrm = norm2(r, d);
    for (uint32_t t = 0; t < d; ++t) r[t] /= nrm;
  }
  return s;
}

}  // namespace

TEST_CASE("subspace_count pads to even pair counts") {
  CHECK(subspace_count(128, 2) == 64);
  CHECK(subspace_count(5, 2) == 4);   // ceil(5/2)=3, padded to 4
  CHECK(subspace_count(2, 2) == 2);   // ceil(2/2)=1, padded to 2
  CHECK(subspace_count(784, 2) == 392);
}

TEST_CASE("compute_residuals modes") {
  VectorSet s = unit_sphere_set(200, 8, 1);
  Clustering c = train_kmeans(s, 4, {25, 1e-4f, 2});

  VectorSet none = compute_residuals(s, c, ResidualMode::None);
  CHECK(none.data == s.data);

  VectorSet raw = compute_residuals(s, c, ResidualMode::RawMean);
  for (uint32_t i = 0; i < s.n; ++i) {
    const float* cj = c.centroid(c.assignment[i]);
    for (uint32_t t = 0; t < s.d; ++t)
      CHECK(raw.row(i)[t] == s.row(i)[t] - cj[t]);
  }

  // a point equal to its raw-mean centroid has a zero residual
  VectorSet tiny;
  tiny.n = 2;
  tiny.d = 2;
  tiny.data = {1.f, 2.f, 1.f, 2.f};
  Clustering one = train_kmeans(tiny, 1);
  VectorSet res = compute_residuals(tiny, one, ResidualMode::RawMean);
  CHECK(res.data == std::vector<float>{0, 0, 0, 0});
}

TEST_CASE("raw-mean residuals are tighter than normalized on sphere data") {
  VectorSet s = unit_sphere_set(2000, 16, 3);
  Clustering c = train_kmeans(s, 16, {25, 1e-4f, 4});
  VectorSet raw = compute_residuals(s, c, ResidualMode::RawMean);
  VectorSet nrm = compute_residuals(s, c, ResidualMode::Normalized);
  double raw_norm = 0, nrm_norm = 0;
  for (uint32_t i = 0; i < s.n; ++i) {
    raw_norm += std::sqrt(dot(raw.row(i), raw.row(i), s.d));
    nrm_norm += std::sqrt(dot(nrm.row(i), nrm.row(i), s.d));
  }
  CHECK(raw_norm / s.n < nrm_norm / s.n);
}

TEST_CASE("train_codebooks hits zero error on 16-valued data") {
  // every subspace sees exactly 16 distinct sub-vectors
  VectorSet s;
  s.n = 64;
  s.d = 4;
  s.data.resize(size_t(s.n) * s.d);
  SplitMix64 rng(5);
  std::vector<float> palette(16 * 2);
  for (float& v : palette) v = rng.next_gaussian();
  for (uint32_t i = 0; i < s.n; ++i)
    for (uint32_t j = 0; j < 2; ++j) {
      uint32_t which = (i * 7 + j * 3 + i / 16) % 16;
      s.row(i)[2 * j] = palette[2 * which];
      s.row(i)[2 * j + 1] = palette[2 * which + 1];
    }
  Codebooks cb = train_codebooks(s, 2, 9);
  CHECK(cb.m == 2);
  CHECK(total_reconstruction_error(s, cb) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("all-zero residuals give all-zero centroids") {
  VectorSet s;
  s.n = 32;
  s.d = 6;
  s.data.assign(size_t(s.n) * s.d, 0.f);
  Codebooks cb = train_codebooks(s, 2, 0);
  for (float v : cb.tables) CHECK(v == 0.f);
}

TEST_CASE("trained codebooks beat a random 16-subset codebook") {
  VectorSet s = gaussian_set(1500, 8, 17);
  Codebooks trained = train_codebooks(s, 2, 21);

  Codebooks random = trained;
  SplitMix64 rng(22);
  for (uint32_t j = 0; j < random.m; ++j)
    for (uint32_t i = 0; i < 16; ++i) {
      uint32_t row = uint32_t(rng.next_below(s.n));
      for (uint32_t t = 0; t < random.dprime; ++t) {
        uint32_t col = j * random.dprime + t;
        random.centroid(j, i)[t] = col < s.d ? s.row(row)[col] : 0.f;
      }
    }
  CHECK(total_reconstruction_error(s, trained) <= total_reconstruction_error(s, random));
}

TEST_CASE("train_codebooks requires 16 rows and honors skip lists") {
  VectorSet s = gaussian_set(15, 4, 2);
  CHECK_THROWS_AS(train_codebooks(s, 2, 0), std::invalid_argument);

  VectorSet s2 = gaussian_set(40, 4, 3);
  std::vector<uint32_t> skip = {0, 1, 2};
  Codebooks cb = train_codebooks(s2, 2, 0, &skip);
  CHECK(cb.m == 2);
}

TEST_CASE("encode matches the exhaustive 16-way scan oracle") {
  VectorSet s = gaussian_set(300, 6, 31);
  Codebooks cb = train_codebooks(s, 2, 33);
  std::vector<uint8_t> codes(cb.m);
  for (uint32_t i = 0; i < s.n; ++i) {
    encode(s.row_span(i), cb, codes.data());
    for (uint32_t j = 0; j < cb.m; ++j) {
      float sub[2];
      for (uint32_t t = 0; t < 2; ++t) {
        uint32_t col = j * 2 + t;
        sub[t] = col < s.d ? s.row(i)[col] : 0.f;
      }
      uint32_t best = 0;
      float best_d = std::numeric_limits<float>::infinity();
      for (uint32_t ci = 0; ci < 16; ++ci) {
        float dd = l2_sq(sub, cb.centroid(j, ci), 2);
        if (dd < best_d) { best_d = dd; best = ci; }
      }
      CHECK(codes[j] == best);
    }
  }
}

TEST_CASE("encode is exact when the residual sits on a centroid") {
  VectorSet s = gaussian_set(100, 4, 41);
  Codebooks cb = train_codebooks(s, 2, 43);
  std::vector<float> probe(s.d);
  for (uint32_t j = 0; j < cb.m; ++j)
    for (uint32_t t = 0; t < 2; ++t)
      if (j * 2 + t < s.d) probe[j * 2 + t] = cb.centroid(j, 5)[t];
  std::vector<uint8_t> codes(cb.m);
  encode(probe, cb, codes.data());
  for (uint32_t j = 0; j < cb.m; ++j) CHECK(codes[j] == 5);
}

TEST_CASE("pack/unpack round-trips for cluster sizes 1..97") {
  SplitMix64 rng(51);
  for (uint32_t m : {2u, 6u, 64u}) {
    for (uint32_t n : {1u, 2u, 31u, 32u, 33u, 64u, 97u}) {
      std::vector<uint8_t> codes(size_t(n) * m);
      for (uint8_t& c : codes) c = uint8_t(rng.next_below(16));
      std::vector<uint32_t> ids(n);
      for (uint32_t i = 0; i < n; ++i) ids[i] = 1000 + i;
      std::vector<CodeBlock> blocks = pack_blocks(codes, m, ids, 7);
      CHECK(blocks.size() == (n + 31) / 32);
      for (uint32_t b = 0; b < blocks.size(); ++b) {
        const CodeBlock& blk = blocks[b];
        CHECK(blk.cluster == 7);
        std::vector<uint8_t> un = unpack_block(blk, m);
        for (uint32_t slot = 0; slot < 32; ++slot) {
          uint32_t gi = b * 32 + slot;
          if (slot < blk.valid_count) {
            CHECK(blk.ids[slot] == ids[gi]);
            for (uint32_t j = 0; j < m; ++j)
              CHECK(un[size_t(slot) * m + j] == codes[size_t(gi) * m + j]);
          } else {
            CHECK(blk.ids[slot] == CodeBlock::kInvalidId);
            for (uint32_t j = 0; j < m; ++j) CHECK(un[size_t(slot) * m + j] == 15);
          }
        }
      }
    }
  }
}

TEST_CASE("pack_blocks nibble layout is the documented interleave") {
  // one point, m=2, codes (3,7): byte 0 low nibble 3, byte 1 low nibble 7
  std::vector<uint8_t> codes{3, 7};
  std::vector<CodeBlock> blocks = pack_blocks(codes, 2, {42});
  REQUIRE(blocks.size() == 1);
  const CodeBlock& b = blocks[0];
  CHECK(b.valid_count == 1);
  CHECK((b.packed[0] & 0x0F) == 3);  // slot 0, subspace 0
  CHECK((b.packed[1] & 0x0F) == 7);  // slot 0, subspace 1
  CHECK((b.packed[0] >> 4) == 15);   // slot 1 is padding
  // two points: second point's codes land in the high nibbles
  std::vector<uint8_t> codes2{3, 7, 9, 1};
  CodeBlock b2 = pack_blocks(codes2, 2, {1, 2})[0];
  CHECK((b2.packed[0] & 0x0F) == 3);
  CHECK((b2.packed[0] >> 4) == 9);
  CHECK((b2.packed[1] & 0x0F) == 7);
  CHECK((b2.packed[1] >> 4) == 1);
}

TEST_CASE("32 points fill exactly one block") {
  std::vector<uint8_t> codes(32 * 2, 4);
  std::vector<uint32_t> ids(32);
  for (uint32_t i = 0; i < 32; ++i) ids[i] = i;
  std::vector<CodeBlock> blocks = pack_blocks(codes, 2, ids);
  CHECK(blocks.size() == 1);
  CHECK(blocks[0].valid_count == 32);
}

TEST_CASE("pack_blocks rejects out-of-range codes") {
  std::vector<uint8_t> codes{16, 0};
  CHECK_THROWS_AS(pack_blocks(codes, 2, {0}), std::invalid_argument);
}

TEST_CASE("raw-mean reconstruction error beats normalized on sphere data") {
  VectorSet s = unit_sphere_set(3000, 16, 71);
  Clustering c = train_kmeans(s, 32, {25, 1e-4f, 72});
  VectorSet raw = compute_residuals(s, c, ResidualMode::RawMean);
  VectorSet nrm = compute_residuals(s, c, ResidualMode::Normalized);
  Codebooks cb_raw = train_codebooks(raw, 2, 73);
  Codebooks cb_nrm = train_codebooks(nrm, 2, 73);
  CHECK(total_reconstruction_error(raw, cb_raw) < total_reconstruction_error(nrm, cb_nrm));
}
