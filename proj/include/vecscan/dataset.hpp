#pragma once

#include <span>
#include <string>
#include <vector>

#include "vecscan/common.hpp"

namespace vecscan {

/// Dense row-major float vectors plus the metric they are searched under.
struct VectorSet {
  uint32_t n = 0;
  uint32_t d = 0;
  Metric metric = Metric::L2;
  std::vector<float> data;          // n * d
  std::vector<uint32_t> zero_rows;  // rows normalize_all left untouched

  const float* row(uint32_t i) const { return data.data() + size_t(i) * d; }
  float* row(uint32_t i) { return data.data() + size_t(i) * d; }
  std::span<const float> row_span(uint32_t i) const { return {row(i), d}; }
};

enum class VectorFileFormat { Fvecs, Bvecs, Ivecs };

VectorFileFormat format_from_path(const std::string& path);

// TEXMEX containers: per record a little-endian int32 dimension header
// followed by d elements (float32 / uint8 / int32). bvecs and ivecs are
// widened to float on load.
VectorSet load_vectors(const std::string& path, VectorFileFormat fmt, Metric metric = Metric::L2);
void save_fvecs(const std::string& path, const VectorSet& set);

float distance(std::span<const float> x, std::span<const float> y, Metric m);

// Scales each row to unit Euclidean norm. Rows that are zero (or already
// unit within 1e-6) are left untouched; zero rows are recorded in
// zero_rows so codebook training can skip them.
VectorSet normalize_all(const VectorSet& set);

/// Exact top-k per query, distances non-decreasing, ties by smaller id.
struct GroundTruth {
  uint32_t nq = 0;
  uint32_t k = 0;
  std::vector<uint32_t> ids;   // nq * k
  std::vector<float> dists;    // nq * k

  const uint32_t* ids_for(uint32_t q) const { return ids.data() + size_t(q) * k; }
  const float* dists_for(uint32_t q) const { return dists.data() + size_t(q) * k; }
};

GroundTruth brute_force_topk(const VectorSet& base, const VectorSet& queries, uint32_t k);

// id file is ivecs, distance file is fvecs, one record per query.
void save_ground_truth(const GroundTruth& gt, const std::string& ids_path, const std::string& dists_path);
GroundTruth load_ground_truth(const std::string& ids_path, const std::string& dists_path);

}  // namespace vecscan
