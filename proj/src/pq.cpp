#include "vecscan/pq.hpp"

#include <algorithm>
#include <cstring>

namespace vecscan {

uint32_t subspace_count(uint32_t d, uint32_t dprime) {
  if (dprime == 0) throw std::invalid_argument("subspace dimension must be >= 1");
  uint32_t m = (d + dprime - 1) / dprime;
  return m + (m & 1);  // keep pairs whole
}

VectorSet compute_residuals(const VectorSet& set, const Clustering& clustering, ResidualMode mode) {
  VectorSet out;
  out.n = set.n;
  out.d = set.d;
  out.metric = Metric::L2;
  out.data = set.data;
  if (mode == ResidualMode::None) return out;
  if (clustering.assignment.size() != set.n)
    throw std::invalid_argument("compute_residuals: clustering does not cover the set");

  std::vector<float> norm_fallback;
  const float* centroids = clustering.centroids.data();
  if (mode == ResidualMode::Normalized) {
    if (!clustering.normalized_centroids.empty()) {
      centroids = clustering.normalized_centroids.data();
    } else {
      norm_fallback = clustering.centroids;
      for (uint32_t j = 0; j < clustering.k; ++j) {
        float* c = norm_fallback.data() + size_t(j) * set.d;
        float nrm = norm2(c, set.d);
        if (nrm > 0.f)
          for (uint32_t t = 0; t < set.d; ++t) c[t] /= nrm;
      }
      centroids = norm_fallback.data();
    }
  }

#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(set.n); ++i) {
    float* r = out.row(uint32_t(i));
    const float* c = centroids + size_t(clustering.assignment[i]) * set.d;
    for (uint32_t t = 0; t < set.d; ++t) r[t] -= c[t];
  }
  return out;
}

Codebooks train_codebooks(const VectorSet& residuals, uint32_t dprime, uint64_t seed,
                          const std::vector<uint32_t>* skip_rows) {
  std::vector<char> skip(residuals.n, 0);
  uint32_t n_train = residuals.n;
  if (skip_rows) {
    for (uint32_t r : *skip_rows)
      if (r < residuals.n && !skip[r]) { skip[r] = 1; --n_train; }
  }
  if (n_train < Codebooks::kCentroids)
    throw std::invalid_argument("train_codebooks: fewer than 16 training rows");

  Codebooks cb;
  cb.dprime = dprime;
  cb.d = residuals.d;
  cb.m = subspace_count(residuals.d, dprime);
  cb.tables.assign(size_t(cb.m) * Codebooks::kCentroids * dprime, 0.f);

  for (uint32_t j = 0; j < cb.m; ++j) {
    // j-th d'-slice of every training row, zero-padded past d.
    VectorSet slice;
    slice.n = n_train;
    slice.d = dprime;
    slice.data.assign(size_t(n_train) * dprime, 0.f);
    uint32_t out_row = 0;
    for (uint32_t i = 0; i < residuals.n; ++i) {
      if (skip[i]) continue;
      const float* src = residuals.row(i);
      float* dst = slice.data.data() + size_t(out_row) * dprime;
      for (uint32_t t = 0; t < dprime; ++t) {
        uint32_t col = j * dprime + t;
        dst[t] = col < residuals.d ? src[col] : 0.f;
      }
      ++out_row;
    }
    KMeansConfig cfg;
    cfg.seed = SplitMix64(seed, j).next();
    Clustering c = train_kmeans(slice, Codebooks::kCentroids, cfg);
    std::copy(c.centroids.begin(), c.centroids.end(),
              cb.tables.begin() + size_t(j) * Codebooks::kCentroids * dprime);
  }
  return cb;
}

void encode(std::span<const float> residual, const Codebooks& cb, uint8_t* codes_out) {
  const uint32_t dprime = cb.dprime;
  float sub[16];  // dprime is small (default 2); cap generously
  if (dprime > 16) throw std::invalid_argument("encode: subspace dimension too large");
  for (uint32_t j = 0; j < cb.m; ++j) {
    for (uint32_t t = 0; t < dprime; ++t) {
      uint32_t col = j * dprime + t;
      sub[t] = col < residual.size() ? residual[col] : 0.f;
    }
    float best = std::numeric_limits<float>::infinity();
    uint8_t best_i = 0;
    for (uint8_t i = 0; i < Codebooks::kCentroids; ++i) {
      float dd = l2_sq(sub, cb.centroid(j, i), dprime);
      if (dd < best) { best = dd; best_i = i; }
    }
    codes_out[j] = best_i;
  }
}

std::vector<uint8_t> encode_all(const VectorSet& residuals, const Codebooks& cb) {
  std::vector<uint8_t> codes(size_t(residuals.n) * cb.m);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < int64_t(residuals.n); ++i)
    encode(residuals.row_span(uint32_t(i)), cb, codes.data() + size_t(i) * cb.m);
  return codes;
}

std::vector<float> decode(const uint8_t* codes, const Codebooks& cb) {
  std::vector<float> out(cb.d_padded());
  for (uint32_t j = 0; j < cb.m; ++j) {
    const float* c = cb.centroid(j, codes[j]);
    std::copy_n(c, cb.dprime, out.begin() + size_t(j) * cb.dprime);
  }
  return out;
}

std::vector<CodeBlock> pack_blocks(const std::vector<uint8_t>& codes, uint32_t m,
                                   const std::vector<uint32_t>& point_ids, uint32_t cluster) {
  const uint32_t n = uint32_t(point_ids.size());
  if (codes.size() != size_t(n) * m) throw std::invalid_argument("pack_blocks: codes/ids size mismatch");
  for (uint8_t c : codes)
    if (c >= 16) throw std::invalid_argument("pack_blocks: code out of 4-bit range");

  const uint32_t pairs = (m + 1) / 2;
  const uint32_t n_blocks = (n + CodeBlock::kPointsPerBlock - 1) / CodeBlock::kPointsPerBlock;
  std::vector<CodeBlock> blocks(n_blocks);
  for (uint32_t b = 0; b < n_blocks; ++b) {
    CodeBlock& blk = blocks[b];
    blk.cluster = cluster;
    blk.packed.assign(size_t(pairs) * 32, 0);
    uint32_t base = b * CodeBlock::kPointsPerBlock;
    blk.valid_count = std::min(CodeBlock::kPointsPerBlock, n - base);
    blk.ids.fill(CodeBlock::kInvalidId);
    for (uint32_t s = 0; s < blk.valid_count; ++s) blk.ids[s] = point_ids[base + s];

    auto code_at = [&](uint32_t slot, uint32_t j) -> uint8_t {
      if (slot >= blk.valid_count) return 15;           // padding point
      if (j >= m) return 0;                             // odd-m filler subspace
      return codes[size_t(base + slot) * m + j];
    };
    for (uint32_t p = 0; p < pairs; ++p)
      for (uint32_t t = 0; t < 16; ++t)
        for (uint32_t s = 0; s < 2; ++s) {
          uint32_t j = 2 * p + s;
          uint8_t lo = code_at(2 * t, j);
          uint8_t hi = code_at(2 * t + 1, j);
          blk.packed[size_t(p) * 32 + 2 * t + s] = uint8_t(hi << 4 | lo);
        }
  }
  return blocks;
}

std::vector<uint8_t> unpack_block(const CodeBlock& block, uint32_t m) {
  std::vector<uint8_t> codes(size_t(CodeBlock::kPointsPerBlock) * m);
  for (uint32_t slot = 0; slot < CodeBlock::kPointsPerBlock; ++slot)
    for (uint32_t j = 0; j < m; ++j) codes[size_t(slot) * m + j] = block.code(slot, j);
  return codes;
}

double total_reconstruction_error(const VectorSet& residuals, const Codebooks& cb) {
  double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static)
  for (int64_t i = 0; i < int64_t(residuals.n); ++i) {
    std::vector<uint8_t> codes(cb.m);
    encode(residuals.row_span(uint32_t(i)), cb, codes.data());
    const float* r = residuals.row(uint32_t(i));
    double err = 0.0;
    for (uint32_t j = 0; j < cb.m; ++j) {
      const float* c = cb.centroid(j, codes.data()[j]);
      for (uint32_t t = 0; t < cb.dprime; ++t) {
        uint32_t col = j * cb.dprime + t;
        float rv = col < residuals.d ? r[col] : 0.f;
        double diff = double(rv) - double(c[t]);
        err += diff * diff;
      }
    }
    total += err;
  }
  return total;
}

}  // namespace vecscan
