#include "vecscan/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vecscan {

std::vector<float> compute_dim_stats(const VectorSet& set) {
  if (set.n < 2) throw std::invalid_argument("compute_dim_stats: need n >= 2");
  const uint32_t d = set.d;
  std::vector<float> fractions(d);

#pragma omp parallel for schedule(static)
  for (int64_t j = 0; j < int64_t(d); ++j) {
    double sum = 0.0, sum_sq = 0.0;
    for (uint32_t i = 0; i < set.n; ++i) {
      double v = set.data[size_t(i) * d + j];
      sum += v;
      sum_sq += v * v;
    }
    double mu = sum / set.n;
    double var = std::max(0.0, sum_sq / set.n - mu * mu);  // population variance
    double sigma = std::sqrt(var);
    uint32_t hits = 0;
    for (uint32_t i = 0; i < set.n; ++i) {
      double v = set.data[size_t(i) * d + j];
      if (v == 0.0 || std::abs(v - mu) <= sigma + 1e-12 * sigma) ++hits;
    }
    fractions[j] = float(double(hits) / set.n);
  }
  return fractions;
}

DimFilter select_dims(const std::vector<float>& fractions, float threshold, uint32_t d_min) {
  if (!(threshold > 0.f && threshold <= 1.f))
    throw std::invalid_argument("select_dims: threshold must be in (0,1]");
  DimFilter f;
  f.fractions = fractions;
  f.threshold = threshold;
  f.mask.assign(fractions.size(), 0);
  for (size_t j = 0; j < fractions.size(); ++j)
    if (fractions[j] <= threshold) {
      f.mask[j] = 1;
      f.d_kept++;
    }
  if (f.d_kept == 0) {
    uint32_t keep = std::min<uint32_t>(d_min, uint32_t(fractions.size()));
    std::vector<uint32_t> order(fractions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return fractions[a] < fractions[b]; });
    for (uint32_t t = 0; t < keep; ++t) f.mask[order[t]] = 1;
    f.d_kept = keep;
  }
  return f;
}

std::vector<float> apply_filter(std::span<const float> v, const DimFilter& filter) {
  if (v.size() != filter.mask.size()) throw std::invalid_argument("apply_filter: dimension mismatch");
  std::vector<float> out;
  out.reserve(filter.d_kept);
  for (size_t j = 0; j < v.size(); ++j)
    if (filter.mask[j]) out.push_back(v[j]);
  return out;
}

VectorSet apply_filter(const VectorSet& set, const DimFilter& filter) {
  if (set.d != filter.mask.size()) throw std::invalid_argument("apply_filter: dimension mismatch");
  VectorSet out;
  out.n = set.n;
  out.d = filter.d_kept;
  out.metric = set.metric;
  out.zero_rows = set.zero_rows;
  out.data.resize(size_t(out.n) * out.d);
  std::vector<uint32_t> kept;
  kept.reserve(filter.d_kept);
  for (uint32_t j = 0; j < set.d; ++j)
    if (filter.mask[j]) kept.push_back(j);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(set.n); ++i) {
    const float* src = set.row(uint32_t(i));
    float* dst = out.row(uint32_t(i));
    for (size_t t = 0; t < kept.size(); ++t) dst[t] = src[kept[t]];
  }
  return out;
}

}  // namespace vecscan
