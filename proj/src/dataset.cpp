#include "vecscan/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <queue>

namespace vecscan {

VectorFileFormat format_from_path(const std::string& path) {
  auto ends_with = [&](const char* suf) {
    size_t l = std::strlen(suf);
    return path.size() >= l && path.compare(path.size() - l, l, suf) == 0;
  };
  if (ends_with(".fvecs")) return VectorFileFormat::Fvecs;
  if (ends_with(".bvecs")) return VectorFileFormat::Bvecs;
  if (ends_with(".ivecs")) return VectorFileFormat::Ivecs;
  throw std::invalid_argument("cannot infer vector format from path: " + path);
}

static size_t element_size(VectorFileFormat fmt) {
  switch (fmt) {
    case VectorFileFormat::Fvecs: return 4;
    case VectorFileFormat::Bvecs: return 1;
    case VectorFileFormat::Ivecs: return 4;
  }
  return 4;
}

VectorSet load_vectors(const std::string& path, VectorFileFormat fmt, Metric metric) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  VectorSet set;
  set.metric = metric;
  const size_t esz = element_size(fmt);
  std::vector<char> buf;

  while (true) {
    int32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    if (in.gcount() == 0) break;  // clean EOF between records
    if (in.gcount() != 4) throw std::runtime_error(path + ": truncated record header");
    if (dim <= 0) throw std::runtime_error(path + ": non-positive dimension " + std::to_string(dim));
    if (set.n == 0) {
      set.d = uint32_t(dim);
    } else if (uint32_t(dim) != set.d) {
      throw std::runtime_error(path + ": dimension mismatch, record " + std::to_string(set.n) +
                               " has d=" + std::to_string(dim) + " expected " + std::to_string(set.d));
    }
    buf.resize(size_t(dim) * esz);
    in.read(buf.data(), std::streamsize(buf.size()));
    if (size_t(in.gcount()) != buf.size()) throw std::runtime_error(path + ": truncated record payload");

    size_t off = set.data.size();
    set.data.resize(off + size_t(dim));
    switch (fmt) {
      case VectorFileFormat::Fvecs:
        std::memcpy(set.data.data() + off, buf.data(), buf.size());
        break;
      case VectorFileFormat::Bvecs:
        for (int32_t i = 0; i < dim; ++i) set.data[off + i] = float(uint8_t(buf[i]));
        break;
      case VectorFileFormat::Ivecs: {
        const int32_t* p = reinterpret_cast<const int32_t*>(buf.data());
        for (int32_t i = 0; i < dim; ++i) set.data[off + i] = float(p[i]);
        break;
      }
    }
    set.n++;
  }
  for (float v : set.data)
    if (!std::isfinite(v)) throw std::runtime_error(path + ": non-finite value in data");
  return set;
}

void save_fvecs(const std::string& path, const VectorSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  int32_t dim = int32_t(set.d);
  for (uint32_t i = 0; i < set.n; ++i) {
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(set.row(i)), std::streamsize(size_t(set.d) * 4));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

float distance(std::span<const float> x, std::span<const float> y, Metric m) {
  if (x.size() != y.size()) throw std::invalid_argument("distance: dimension mismatch");
  return metric_distance(x.data(), y.data(), uint32_t(x.size()), m);
}

VectorSet normalize_all(const VectorSet& set) {
  VectorSet out = set;
  out.zero_rows.clear();
  for (uint32_t i = 0; i < out.n; ++i) {
    float* r = out.row(i);
    float nrm = norm2(r, out.d);
    if (nrm == 0.f) {
      out.zero_rows.push_back(i);
      continue;
    }
    if (std::abs(nrm - 1.f) < 1e-6f) continue;  // already unit
    for (uint32_t j = 0; j < out.d; ++j) r[j] /= nrm;
  }
  return out;
}

GroundTruth brute_force_topk(const VectorSet& base, const VectorSet& queries, uint32_t k) {
  if (base.d != queries.d) throw std::invalid_argument("brute_force_topk: dimension mismatch");
  if (k > base.n) throw std::invalid_argument("brute_force_topk: k > n");

  GroundTruth gt;
  gt.nq = queries.n;
  gt.k = k;
  gt.ids.resize(size_t(gt.nq) * k);
  gt.dists.resize(size_t(gt.nq) * k);

  // Angular needs per-row norms; hoist them so each pair costs one dot.
  std::vector<float> base_norms;
  if (base.metric == Metric::Angular) {
    base_norms.resize(base.n);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < int64_t(base.n); ++i) base_norms[i] = norm2(base.row(uint32_t(i)), base.d);
  }

  using Cand = std::pair<float, uint32_t>;  // worst at heap top
#pragma omp parallel for schedule(dynamic, 8)
  for (int64_t qi = 0; qi < int64_t(queries.n); ++qi) {
    const float* q = queries.row(uint32_t(qi));
    float qn = base.metric == Metric::Angular ? norm2(q, base.d) : 0.f;
    std::vector<Cand> heap;
    heap.reserve(k + 1);
    for (uint32_t i = 0; i < base.n; ++i) {
      float dist;
      switch (base.metric) {
        case Metric::L2: dist = l2_sq(q, base.row(i), base.d); break;
        case Metric::Angular:
          dist = (qn == 0.f || base_norms[i] == 0.f) ? 1.f
                                                     : 1.f - dot(q, base.row(i), base.d) / (qn * base_norms[i]);
          break;
        case Metric::InnerProduct: dist = -dot(q, base.row(i), base.d); break;
        default: dist = 0.f;
      }
      Cand c{dist, i};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort(heap.begin(), heap.end());
    for (uint32_t j = 0; j < k; ++j) {
      gt.ids[size_t(qi) * k + j] = heap[j].second;
      gt.dists[size_t(qi) * k + j] = heap[j].first;
    }
  }
  return gt;
}

void save_ground_truth(const GroundTruth& gt, const std::string& ids_path, const std::string& dists_path) {
  std::ofstream ids(ids_path, std::ios::binary), ds(dists_path, std::ios::binary);
  if (!ids || !ds) throw std::runtime_error("cannot open ground-truth output files");
  int32_t k = int32_t(gt.k);
  for (uint32_t q = 0; q < gt.nq; ++q) {
    ids.write(reinterpret_cast<const char*>(&k), 4);
    for (uint32_t j = 0; j < gt.k; ++j) {
      int32_t id = int32_t(gt.ids_for(q)[j]);
      ids.write(reinterpret_cast<const char*>(&id), 4);
    }
    ds.write(reinterpret_cast<const char*>(&k), 4);
    ds.write(reinterpret_cast<const char*>(gt.dists_for(q)), std::streamsize(size_t(gt.k) * 4));
  }
  if (!ids || !ds) throw std::runtime_error("ground-truth write failed");
}

GroundTruth load_ground_truth(const std::string& ids_path, const std::string& dists_path) {
  VectorSet ids = load_vectors(ids_path, VectorFileFormat::Ivecs);
  VectorSet ds = load_vectors(dists_path, VectorFileFormat::Fvecs);
  if (ids.n != ds.n || ids.d != ds.d)
    throw std::runtime_error("ground-truth id/distance files disagree");
  GroundTruth gt;
  gt.nq = ids.n;
  gt.k = ids.d;
  gt.ids.resize(ids.data.size());
  for (size_t i = 0; i < ids.data.size(); ++i) gt.ids[i] = uint32_t(ids.data[i]);
  gt.dists = std::move(ds.data);
  return gt;
}

}  // namespace vecscan
