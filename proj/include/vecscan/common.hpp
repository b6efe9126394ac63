#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vecscan {

enum class Metric : uint8_t { L2 = 0, Angular = 1, InnerProduct = 2 };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::L2: return "l2";
    case Metric::Angular: return "angular";
    case Metric::InnerProduct: return "ip";
  }
  return "?";
}

inline Metric metric_from_string(const std::string& s) {
  if (s == "l2") return Metric::L2;
  if (s == "angular") return Metric::Angular;
  if (s == "ip") return Metric::InnerProduct;
  throw std::invalid_argument("unknown metric: " + s);
}

// Counter-based generator; every parallel site derives its stream from
// (seed, index) so results never depend on thread scheduling.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}
  SplitMix64(uint64_t seed, uint64_t stream) : state(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }
  float next_float() { return float(next() >> 40) * 0x1.0p-24f; }
  uint64_t next_below(uint64_t n) { return n ? next() % n : 0; }

  float next_gaussian() {
    double u1 = 1.0 - next_double();  // (0,1]
    double u2 = next_double();
    return float(std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2));
  }
};

inline float dot(const float* a, const float* b, uint32_t d) {
  float s = 0.f;
#pragma omp simd reduction(+ : s)
  for (uint32_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline float l2_sq(const float* a, const float* b, uint32_t d) {
  float s = 0.f;
#pragma omp simd reduction(+ : s)
  for (uint32_t i = 0; i < d; ++i) {
    float t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline float norm2(const float* a, uint32_t d) { return std::sqrt(dot(a, a, d)); }

// Lower-is-better score for every metric: L2 -> squared Euclidean,
// Angular -> 1 - cos, InnerProduct -> -<x,y>.
inline float metric_distance(const float* x, const float* y, uint32_t d, Metric m) {
  switch (m) {
    case Metric::L2: return l2_sq(x, y, d);
    case Metric::Angular: {
      float nx = norm2(x, d), ny = norm2(y, d);
      if (nx == 0.f || ny == 0.f) return 1.f;
      return 1.f - dot(x, y, d) / (nx * ny);
    }
    case Metric::InnerProduct: return -dot(x, y, d);
  }
  return 0.f;
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vecscan
