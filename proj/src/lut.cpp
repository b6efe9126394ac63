#include "vecscan/lut.hpp"

#include <algorithm>
#include <cmath>

namespace vecscan {

FloatLut compute_float_lut(std::span<const float> q_residual, const Codebooks& cb, Metric metric) {
  FloatLut out;
  out.m = cb.m;
  out.entries.resize(size_t(cb.m) * Codebooks::kCentroids);
  const uint32_t dprime = cb.dprime;
  float sub[16];
  if (dprime > 16) throw std::invalid_argument("compute_float_lut: subspace dimension too large");

  for (uint32_t j = 0; j < cb.m; ++j) {
    for (uint32_t t = 0; t < dprime; ++t) {
      uint32_t col = j * dprime + t;
      sub[t] = col < q_residual.size() ? q_residual[col] : 0.f;
    }
    float* row = out.entries.data() + size_t(j) * Codebooks::kCentroids;
    for (uint32_t i = 0; i < Codebooks::kCentroids; ++i) {
      const float* c = cb.centroid(j, i);
      row[i] = metric == Metric::InnerProduct ? -dot(sub, c, dprime) : l2_sq(sub, c, dprime);
    }
  }
  return out;
}

QuantizedLut quantize_lut(const FloatLut& flut) {
  constexpr float kEps = 1e-12f;
  QuantizedLut q;
  q.m = flut.m;
  q.offset = flut.offset;
  q.u.resize(flut.entries.size());
  q.bias.resize(flut.m);

  double range_sum = 0.0;
  for (uint32_t j = 0; j < flut.m; ++j) {
    const float* row = flut.entries.data() + size_t(j) * 16;
    float lo = row[0], hi = row[0];
    for (uint32_t i = 1; i < 16; ++i) {
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
    }
    q.bias[j] = lo;
    range_sum += double(hi) - double(lo);
  }
  q.scale = std::max(kEps, float(range_sum / 65535.0));
  q.bias_sum = 0.f;
  for (float b : q.bias) q.bias_sum += b;

  q.clamp_count = 0;
  for (uint32_t j = 0; j < flut.m; ++j) {
    const float* row = flut.entries.data() + size_t(j) * 16;
    uint8_t* out = q.u.data() + size_t(j) * 16;
    for (uint32_t i = 0; i < 16; ++i) {
      float v = std::round((row[i] - q.bias[j]) / q.scale);
      if (v > 255.f) {
        out[i] = 255;
        q.clamp_count++;
      } else if (v < 0.f) {
        out[i] = 0;  // fp slack only; bias is the row minimum
      } else {
        out[i] = uint8_t(v);
      }
    }
  }
  return q;
}

}  // namespace vecscan
