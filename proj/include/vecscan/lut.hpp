#pragma once

#include <vector>

#include "vecscan/pq.hpp"

namespace vecscan {

// Per-query table of partial distances d(q^j, c_i^j), m x 16.
// `offset` is a per-cluster constant added back at dequantization; it is
// 0 for L2/Angular (where the query residual is q - c) and -<q,c> for
// inner-product search (where q is used unshifted against the residual
// codebooks).
struct FloatLut {
  uint32_t m = 0;
  std::vector<float> entries;  // m * 16
  float offset = 0.f;

  float at(uint32_t j, uint32_t i) const { return entries[size_t(j) * 16 + i]; }
};

// 8-bit affine quantization of a FloatLut: per-table bias, one global
// scale sized so a sum of per-table maxima maps to <= 65535, which lets
// block kernels accumulate 16-bit sums without saturating adds.
struct QuantizedLut {
  uint32_t m = 0;
  std::vector<uint8_t> u;    // m * 16
  float scale = 0.f;         // a
  std::vector<float> bias;   // m per-table minima
  float bias_sum = 0.f;      // sum of bias entries
  float offset = 0.f;        // carried over from the FloatLut
  uint32_t clamp_count = 0;  // entries saturated at 255

  uint8_t at(uint32_t j, uint32_t i) const { return u[size_t(j) * 16 + i]; }
  const uint8_t* table(uint32_t j) const { return u.data() + size_t(j) * 16; }
  float dequantize(uint16_t acc) const { return scale * float(acc) + bias_sum + offset; }
};

// q_residual is zero-padded past its size; entries are squared L2 for
// L2/Angular and -<q^j, c_i^j> for InnerProduct.
FloatLut compute_float_lut(std::span<const float> q_residual, const Codebooks& cb, Metric metric);

QuantizedLut quantize_lut(const FloatLut& flut);

}  // namespace vecscan
