#pragma once

#include <array>
#include <vector>

#include "vecscan/kmeans.hpp"

namespace vecscan {

enum class ResidualMode : uint8_t { RawMean = 0, Normalized = 1, None = 2 };

// 4-bit product quantization: 16 centroids per subspace, d' dims each.
// m is rounded up to an even count so codes always pack into byte pairs;
// vectors are zero-padded to m*d'.
struct Codebooks {
  static constexpr uint32_t kCentroids = 16;

  uint32_t m = 0;       // subspace count (even)
  uint32_t dprime = 0;  // subspace dimension
  uint32_t d = 0;       // original dimension, d <= m * dprime
  std::vector<float> tables;  // m * 16 * dprime

  uint32_t d_padded() const { return m * dprime; }
  const float* centroid(uint32_t j, uint32_t i) const {
    return tables.data() + (size_t(j) * kCentroids + i) * dprime;
  }
  float* centroid(uint32_t j, uint32_t i) {
    return tables.data() + (size_t(j) * kCentroids + i) * dprime;
  }
};

uint32_t subspace_count(uint32_t d, uint32_t dprime);

// Group of up to 32 points with nibble-interleaved codes: for subspace
// pair p and point pair t, byte packed[p*32 + 2t + s] holds the codes of
// points 2t+1 (high nibble) and 2t (low nibble) in subspace 2p+s.
// Padding slots carry code 15 in every subspace and id kInvalidId.
struct CodeBlock {
  static constexpr uint32_t kPointsPerBlock = 32;
  static constexpr uint32_t kInvalidId = 0xffffffffu;

  uint32_t cluster = 0;
  uint32_t valid_count = 0;
  std::array<uint32_t, kPointsPerBlock> ids{};
  std::vector<uint8_t> packed;  // ceil(m/2) * 32 bytes

  uint8_t code(uint32_t slot, uint32_t j) const {
    uint8_t byte = packed[size_t(j >> 1) * 32 + 2 * (slot >> 1) + (j & 1)];
    return (slot & 1) ? uint8_t(byte >> 4) : uint8_t(byte & 0xF);
  }
};

// residual_i = x_i - centroid(mode, assignment_i); mode None passes the
// input through. Residuals are treated under squared L2 downstream.
VectorSet compute_residuals(const VectorSet& set, const Clustering& clustering, ResidualMode mode);

// Per-subspace k-means with K=16 on the j-th d'-slice of the residuals.
// Rows listed in skip_rows (e.g. zero vectors under Angular) are excluded
// from training but still encodable.
Codebooks train_codebooks(const VectorSet& residuals, uint32_t dprime, uint64_t seed,
                          const std::vector<uint32_t>* skip_rows = nullptr);

// code_j = argmin_i ||residual^j - c_i^j||^2, ties to the smaller index.
// The input is zero-padded past d.
void encode(std::span<const float> residual, const Codebooks& cb, uint8_t* codes_out);
std::vector<uint8_t> encode_all(const VectorSet& residuals, const Codebooks& cb);

// Reconstruction of a code word, d_padded floats.
std::vector<float> decode(const uint8_t* codes, const Codebooks& cb);

std::vector<CodeBlock> pack_blocks(const std::vector<uint8_t>& codes, uint32_t m,
                                   const std::vector<uint32_t>& point_ids, uint32_t cluster = 0);

// 32 x m codes, padding slots decode to 15.
std::vector<uint8_t> unpack_block(const CodeBlock& block, uint32_t m);

double total_reconstruction_error(const VectorSet& residuals, const Codebooks& cb);

}  // namespace vecscan
