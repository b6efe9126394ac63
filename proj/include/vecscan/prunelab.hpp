#pragma once

#include "vecscan/engine.hpp"

namespace vecscan {

// Experimental geometric filtration strategies with prune-rate and safety
// instrumentation. They never participate in the default search path; the
// lab driver measures their offline operating points.

// --- direction-based: per-cluster sign vectors over orthonormal planes ---
struct SignIndex {
  uint32_t h = 32;              // hyperplanes (h <= 64)
  std::vector<float> normals;   // h * d, orthonormal, through the centroid
  std::vector<uint64_t> signs;  // one word per member point
};

SignIndex build_sign_index(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, uint32_t h, uint64_t seed);
uint64_t sign_vector(std::span<const float> v, const float* centroid, const SignIndex& index);
// keep mask over members: Hamming(sign(q), sign(x)) <= threshold
std::vector<uint8_t> sign_filter(uint64_t query_signs, const SignIndex& index,
                                 uint32_t hamming_threshold);

// --- strips: sorted projections onto one direction, equal-width bins ----
struct StripsIndex {
  uint32_t n_strips = 16;
  std::vector<float> boundaries;      // n_strips + 1, monotone
  std::vector<uint32_t> order;        // member positions sorted by projection
  std::vector<float> projections;     // sorted, parallel to order
  std::vector<uint32_t> strip_start;  // n_strips + 1 offsets into order
};

StripsIndex build_strips_index(const std::vector<float>& member_projections, uint32_t n_strips);

struct StripsScanResult {
  std::vector<uint32_t> kept;  // member positions in visited strips
  uint32_t strips_visited = 0;
};

// Strips visited in ascending distance from the query projection; stops
// when the next strip's squared lower bound exceeds pool_worst (pass +inf
// for an empty pool, which makes the scan exhaustive).
StripsScanResult strips_scan(float q_projection, const StripsIndex& index, float pool_worst);

// --- convex hull in a PCA subspace (inner-product search only) ----------
struct HullIndex {
  uint32_t rank = 0;             // effective projection rank (<= requested r)
  std::vector<float> basis;      // rank * d
  std::vector<float> projected;  // n_members * rank
  std::vector<uint8_t> is_vertex;
  std::vector<float> faces;      // per face: rank normal components + offset
  uint32_t face_stride = 0;      // rank + 1
};

HullIndex build_hull_index(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, uint32_t r, uint64_t seed);

// Hull vertices ranked by inner-product score (best first). Errors unless
// the set's metric is InnerProduct.
std::vector<std::pair<float, uint32_t>> hull_filter(std::span<const float> q, const VectorSet& set,
                                                    const std::vector<uint32_t>& members,
                                                    const HullIndex& hull);

// In-projected-space check that a member lies inside the vertex hull.
bool point_in_hull(const HullIndex& hull, uint32_t member_pos, float slack = 1e-6f);

// --- triangle-inequality annulus ----------------------------------------
struct AnnulusData {
  std::vector<float> center_dist;  // true (non-squared) d(c, x) per member
};

AnnulusData build_annulus_data(const VectorSet& set, const std::vector<uint32_t>& members,
                               const float* centroid);

// keep x iff d_qc - ub <= d(c,x) <= d_qc + ub (true distances, L2 only).
std::vector<uint8_t> annulus_filter(float d_qc, float ub, const AnnulusData& data);

// --- measurement driver ---------------------------------------------------
enum class LabStrategy : uint8_t { None = 0, Sign, Strips, Hull, Annulus };

LabStrategy lab_strategy_from_string(const std::string& s);

struct LabConfig {
  LabStrategy strategy = LabStrategy::None;
  uint32_t nprob = 8;
  uint32_t k = 10;
  std::vector<float> sweep;  // strategy parameter values, one report row each
  uint32_t sign_h = 32;
  uint32_t n_strips = 16;
  uint32_t hull_r = 3;
  uint64_t seed = 0;
};

struct LabReportRow {
  float param = 0.f;
  double pruned_fraction = 0.0;  // candidates filtered before evaluation
  double recall = 0.0;           // recall@k against the supplied ground truth
  double evals_avoided = 0.0;    // mean skipped evaluations per query
};

// Offline analysis: probes the index's top-nprob clusters per query,
// applies the strategy filter, evaluates survivors exactly, and reports
// prune rate vs recall for each sweep value.
std::vector<LabReportRow> measure_prune_stats(const Index& index, const VectorSet& queries,
                                              const GroundTruth& gt, const LabConfig& config);

void write_lab_csv(const std::string& path, const std::vector<LabReportRow>& rows);

}  // namespace vecscan
