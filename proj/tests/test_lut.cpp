#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "vecscan/lut.hpp"

using namespace vecscan;

namespace {

Codebooks random_codebooks(uint32_t d, uint32_t dprime, uint64_t seed) {
  Codebooks cb;
  cb.d = d;
  cb.dprime = dprime;
  cb.m = subspace_count(d, dprime);
  cb.tables.resize(size_t(cb.m) * 16 * dprime);
  SplitMix64 rng(seed);
  for (float& v : cb.tables) v = rng.next_gaussian();
  return cb;
}

std::vector<float> random_vec(uint32_t d, uint64_t seed) {
  std::vector<float> v(d);
  SplitMix64 rng(seed);
  for (float& x : v) x = rng.next_gaussian();
  return v;
}

}  // namespace

TEST_CASE("float lut entry is zero when the query subvector equals the centroid") {
  Codebooks cb = random_codebooks(8, 2, 1);
  std::vector<float> q(cb.d_padded());
  for (uint32_t j = 0; j < cb.m; ++j)
    for (uint32_t t = 0; t < 2; ++t) q[j * 2 + t] = cb.centroid(j, 3)[t];
  FloatLut lut = compute_float_lut(q, cb, Metric::L2);
  for (uint32_t j = 0; j < cb.m; ++j) {
    CHECK(lut.at(j, 3) == doctest::Approx(0.0).epsilon(1e-12));
    for (uint32_t i = 0; i < 16; ++i) CHECK(lut.at(j, i) >= 0.f);
  }
}

TEST_CASE("lut sums reproduce direct residual distances") {
  Codebooks cb = random_codebooks(12, 2, 3);
  SplitMix64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<float> q = random_vec(cb.d, rng.next());
    std::vector<uint8_t> codes(cb.m);
    for (uint8_t& c : codes) c = uint8_t(rng.next_below(16));

    FloatLut lut = compute_float_lut(q, cb, Metric::L2);
    double lut_sum = 0;
    for (uint32_t j = 0; j < cb.m; ++j) lut_sum += lut.at(j, codes[j]);

    std::vector<float> decoded = decode(codes.data(), cb);
    std::vector<float> qp(cb.d_padded(), 0.f);
    std::copy(q.begin(), q.end(), qp.begin());
    double direct = l2_sq(qp.data(), decoded.data(), cb.d_padded());
    CHECK(lut_sum == doctest::Approx(direct).epsilon(1e-3));
  }
}

TEST_CASE("m=1 style: inner-product tables are negated dot products") {
  Codebooks cb = random_codebooks(2, 2, 5);
  std::vector<float> q = random_vec(2, 6);
  FloatLut lut = compute_float_lut(q, cb, Metric::InnerProduct);
  for (uint32_t i = 0; i < 16; ++i)
    CHECK(lut.at(0, i) == doctest::Approx(-dot(q.data(), cb.centroid(0, i), 2)));
}

TEST_CASE("quantize: constant tables reconstruct the bias sum exactly") {
  FloatLut lut;
  lut.m = 4;
  lut.entries.assign(4 * 16, 0.f);
  for (uint32_t j = 0; j < 4; ++j)
    for (uint32_t i = 0; i < 16; ++i) lut.entries[j * 16 + i] = 2.5f * float(j + 1);
  QuantizedLut q = quantize_lut(lut);
  CHECK(q.clamp_count == 0);
  for (uint8_t u : q.u) CHECK(u == 0);
  float expected = 2.5f * (1 + 2 + 3 + 4);
  CHECK(q.dequantize(0) == doctest::Approx(expected));
}

TEST_CASE("quantize: argmin entry sits at u = 0 and ordering is preserved") {
  SplitMix64 rng(7);
  FloatLut lut;
  lut.m = 8;
  lut.entries.resize(8 * 16);
  for (float& v : lut.entries) v = std::abs(rng.next_gaussian()) * 10.f;
  QuantizedLut q = quantize_lut(lut);
  for (uint32_t j = 0; j < lut.m; ++j) {
    uint32_t argmin = 0;
    for (uint32_t i = 1; i < 16; ++i)
      if (lut.at(j, i) < lut.at(j, argmin)) argmin = i;
    CHECK(q.at(j, argmin) == 0);
    // monotone up to a/2: strictly separated float entries stay ordered
    for (uint32_t i1 = 0; i1 < 16; ++i1)
      for (uint32_t i2 = 0; i2 < 16; ++i2)
        if (lut.at(j, i1) + q.scale < lut.at(j, i2)) CHECK(q.at(j, i1) <= q.at(j, i2));
  }
}

TEST_CASE("quantized sums stay within a*m/2 of the float sums") {
  SplitMix64 rng(11);
  FloatLut lut;
  lut.m = 16;
  lut.entries.resize(16 * 16);
  for (float& v : lut.entries) v = std::abs(rng.next_gaussian()) * 3.f;
  QuantizedLut q = quantize_lut(lut);
  REQUIRE(q.clamp_count == 0);
  for (int rep = 0; rep < 1000; ++rep) {
    double fsum = 0;
    uint32_t acc = 0;
    for (uint32_t j = 0; j < lut.m; ++j) {
      uint32_t code = uint32_t(rng.next_below(16));
      fsum += lut.at(j, code);
      acc += q.at(j, code);
    }
    double reconstructed = q.dequantize(uint16_t(acc));
    CHECK(std::abs(reconstructed - fsum) <= q.scale * lut.m / 2 + 1e-4);
  }
}

TEST_CASE("sum of per-table maxima maps to roughly 65535") {
  SplitMix64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    FloatLut lut;
    lut.m = 32;
    lut.entries.resize(32 * 16);
    for (float& v : lut.entries) v = std::abs(rng.next_gaussian());
    QuantizedLut q = quantize_lut(lut);
    if (q.clamp_count != 0) continue;
    uint64_t sum_max = 0;
    for (uint32_t j = 0; j < lut.m; ++j) {
      uint32_t mx = 0;
      for (uint32_t i = 0; i < 16; ++i) mx = std::max<uint32_t>(mx, q.at(j, i));
      sum_max += mx;
    }
    // worst-codeword sum stays within rounding slack (m/2) of the budget
    CHECK(sum_max <= 65535 + lut.m / 2);
  }
}

TEST_CASE("single dominating table clamps and counts saturation") {
  FloatLut lut;
  lut.m = 2;
  lut.entries.assign(2 * 16, 0.f);
  for (uint32_t i = 0; i < 16; ++i) lut.entries[i] = float(i) * 100.f;  // table 0 dominates
  QuantizedLut q = quantize_lut(lut);
  CHECK(q.clamp_count > 0);  // 1500/a with a ~ 1500/65535 exceeds 255
}

TEST_CASE("all-constant lut uses the epsilon guard") {
  FloatLut lut;
  lut.m = 3;
  lut.entries.assign(3 * 16, 7.f);
  QuantizedLut q = quantize_lut(lut);
  CHECK(q.scale == 1e-12f);
  CHECK(q.dequantize(0) == doctest::Approx(21.f));
}
