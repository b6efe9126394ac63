#pragma once

#include <vector>

#include "vecscan/dataset.hpp"

namespace vecscan {

// Keep mask over the original dimensions, derived from per-dimension
// uninformative fractions.
struct DimFilter {
  std::vector<uint8_t> mask;        // 1 = keep, length d_original
  std::vector<float> fractions;
  float threshold = 0.f;
  uint32_t d_kept = 0;

  bool identity() const { return d_kept == mask.size(); }
};

// fraction_j = |{i : x_ij = 0 or |x_ij - mu_j| <= sigma_j}| / n with the
// population standard deviation; the one-sigma boundary is inclusive.
std::vector<float> compute_dim_stats(const VectorSet& set);

// Keeps dimension j iff fraction_j <= threshold. If everything would be
// pruned, the d_min lowest-fraction dimensions are kept instead.
DimFilter select_dims(const std::vector<float>& fractions, float threshold, uint32_t d_min = 8);

std::vector<float> apply_filter(std::span<const float> v, const DimFilter& filter);
VectorSet apply_filter(const VectorSet& set, const DimFilter& filter);

}  // namespace vecscan
