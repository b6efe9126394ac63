#include "vecscan/prunelab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>

namespace vecscan {

// ---------------------------------------------------------------------------
// direction-based sign vectors
// ---------------------------------------------------------------------------

SignIndex build_sign_index(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, uint32_t h, uint64_t seed) {
  const uint32_t d = set.d;
  if (h == 0 || h > 64) throw std::invalid_argument("build_sign_index: h must be in [1,64]");
  h = std::min(h, d);

  SignIndex idx;
  idx.h = h;
  idx.normals.assign(size_t(h) * d, 0.f);
  SplitMix64 rng(seed);

  // Gaussian draws orthonormalized by Gram-Schmidt; redraw on collapse.
  for (uint32_t b = 0; b < h; ++b) {
    float* nb = idx.normals.data() + size_t(b) * d;
    for (uint32_t attempt = 0; attempt < 16; ++attempt) {
      for (uint32_t t = 0; t < d; ++t) nb[t] = rng.next_gaussian();
      for (uint32_t prev = 0; prev < b; ++prev) {
        const float* np = idx.normals.data() + size_t(prev) * d;
        float proj = dot(nb, np, d);
        for (uint32_t t = 0; t < d; ++t) nb[t] -= proj * np[t];
      }
      float nrm = norm2(nb, d);
      if (nrm > 1e-6f) {
        for (uint32_t t = 0; t < d; ++t) nb[t] /= nrm;
        break;
      }
    }
  }

  idx.signs.resize(members.size());
  for (size_t i = 0; i < members.size(); ++i)
    idx.signs[i] = sign_vector(set.row_span(members[i]), centroid, idx);
  return idx;
}

uint64_t sign_vector(std::span<const float> v, const float* centroid, const SignIndex& index) {
  const uint32_t d = uint32_t(v.size());
  uint64_t word = 0;
  for (uint32_t b = 0; b < index.h; ++b) {
    const float* nb = index.normals.data() + size_t(b) * d;
    float proj = 0.f;
#pragma omp simd reduction(+ : proj)
    for (uint32_t t = 0; t < d; ++t) proj += (v[t] - centroid[t]) * nb[t];
    if (proj >= 0.f) word |= uint64_t(1) << b;
  }
  return word;
}

std::vector<uint8_t> sign_filter(uint64_t query_signs, const SignIndex& index,
                                 uint32_t hamming_threshold) {
  std::vector<uint8_t> keep(index.signs.size());
  for (size_t i = 0; i < index.signs.size(); ++i)
    keep[i] = std::popcount(query_signs ^ index.signs[i]) <= int(hamming_threshold);
  return keep;
}

// ---------------------------------------------------------------------------
// strips
// ---------------------------------------------------------------------------

StripsIndex build_strips_index(const std::vector<float>& member_projections, uint32_t n_strips) {
  if (n_strips == 0) throw std::invalid_argument("build_strips_index: need n_strips >= 1");
  StripsIndex idx;
  idx.n_strips = n_strips;
  const uint32_t n = uint32_t(member_projections.size());
  idx.order.resize(n);
  for (uint32_t i = 0; i < n; ++i) idx.order[i] = i;
  std::sort(idx.order.begin(), idx.order.end(), [&](uint32_t a, uint32_t b) {
    return member_projections[a] < member_projections[b] ||
           (member_projections[a] == member_projections[b] && a < b);
  });
  idx.projections.resize(n);
  for (uint32_t i = 0; i < n; ++i) idx.projections[i] = member_projections[idx.order[i]];

  float lo = n ? idx.projections.front() : 0.f;
  float hi = n ? idx.projections.back() : 0.f;
  idx.boundaries.resize(n_strips + 1);
  for (uint32_t s = 0; s <= n_strips; ++s)
    idx.boundaries[s] = lo + (hi - lo) * float(s) / float(n_strips);
  idx.boundaries.back() = hi;  // guard fp drift at the top edge

  idx.strip_start.assign(n_strips + 1, n);
  uint32_t cursor = 0;
  for (uint32_t s = 0; s < n_strips; ++s) {
    idx.strip_start[s] = cursor;
    float upper = idx.boundaries[s + 1];
    while (cursor < n &&
           (s + 1 == n_strips ? idx.projections[cursor] <= upper : idx.projections[cursor] < upper))
      ++cursor;
  }
  idx.strip_start[n_strips] = n;
  return idx;
}

StripsScanResult strips_scan(float q_projection, const StripsIndex& index, float pool_worst) {
  StripsScanResult res;
  const uint32_t S = index.n_strips;
  std::vector<std::pair<float, uint32_t>> ordered(S);
  for (uint32_t s = 0; s < S; ++s) {
    float lo = index.boundaries[s], hi = index.boundaries[s + 1];
    float gap = 0.f;
    if (q_projection < lo) gap = lo - q_projection;
    else if (q_projection > hi) gap = q_projection - hi;
    ordered[s] = {gap * gap, s};  // squared L2 lower bound for the strip
  }
  std::sort(ordered.begin(), ordered.end());
  for (const auto& [bound, s] : ordered) {
    if (bound > pool_worst) break;
    res.strips_visited++;
    for (uint32_t i = index.strip_start[s]; i < index.strip_start[s + 1]; ++i)
      res.kept.push_back(index.order[i]);
  }
  return res;
}

// ---------------------------------------------------------------------------
// convex hull in a PCA subspace
// ---------------------------------------------------------------------------

namespace {

struct Hull2D {
  std::vector<uint8_t> vertex;
  std::vector<float> faces;  // (nx, ny, off) per edge
};

Hull2D hull_2d(const std::vector<float>& coords, uint32_t n, uint32_t stride) {
  Hull2D out;
  out.vertex.assign(n, 0);
  auto px = [&](uint32_t i) { return coords[size_t(i) * stride]; };
  auto py = [&](uint32_t i) { return coords[size_t(i) * stride + 1]; };

  std::vector<uint32_t> idx(n);
  for (uint32_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) {
    return px(a) < px(b) || (px(a) == px(b) && py(a) < py(b));
  });

  double span = 0;
  for (uint32_t i = 0; i < n; ++i)
    span = std::max({span, std::abs(double(px(i))), std::abs(double(py(i)))});
  double eps = 1e-9 * std::max(1.0, span);

  auto cross = [&](uint32_t o, uint32_t a, uint32_t b) {
    return (double(px(a)) - px(o)) * (double(py(b)) - py(o)) -
           (double(py(a)) - py(o)) * (double(px(b)) - px(o));
  };

  std::vector<uint32_t> hull;
  auto chain = [&](auto begin, auto end) {
    size_t base = hull.size();
    for (auto it = begin; it != end; ++it) {
      while (hull.size() >= base + 2 &&
             cross(hull[hull.size() - 2], hull[hull.size() - 1], *it) <= eps)
        hull.pop_back();
      hull.push_back(*it);
    }
    hull.pop_back();  // endpoint repeats as the next chain's start
  };
  chain(idx.begin(), idx.end());
  chain(idx.rbegin(), idx.rend());

  if (hull.size() < 2) {
    for (uint32_t i : hull) out.vertex[i] = 1;
    return out;
  }
  // Flag every point sharing coordinates with a hull corner (duplicates).
  for (uint32_t c : hull)
    for (uint32_t i = 0; i < n; ++i)
      if (px(i) == px(c) && py(i) == py(c)) out.vertex[i] = 1;

  for (size_t e = 0; e < hull.size(); ++e) {
    uint32_t a = hull[e], b = hull[(e + 1) % hull.size()];
    double dx = double(px(b)) - px(a), dy = double(py(b)) - py(a);
    double nx = dy, ny = -dx;  // outward for the counter-clockwise chain
    double nrm = std::sqrt(nx * nx + ny * ny);
    if (nrm < 1e-30) continue;
    nx /= nrm;
    ny /= nrm;
    out.faces.push_back(float(nx));
    out.faces.push_back(float(ny));
    out.faces.push_back(float(nx * px(a) + ny * py(a)));
  }
  return out;
}

struct Hull3D {
  bool ok = false;
  std::vector<uint8_t> vertex;
  std::vector<float> faces;  // (nx, ny, nz, off)
};

struct QhFace {
  uint32_t a, b, c;
  double nx, ny, nz, off;
  std::vector<uint32_t> outside;
  bool alive = true;
};

Hull3D quickhull_3d(const std::vector<float>& coords, uint32_t n, uint32_t stride) {
  Hull3D out;
  out.vertex.assign(n, 0);
  if (n < 4) return out;

  auto p = [&](uint32_t i, uint32_t ax) { return double(coords[size_t(i) * stride + ax]); };

  double span = 0;
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t ax = 0; ax < 3; ++ax) span = std::max(span, std::abs(p(i, ax)));
  const double eps = 1e-7 * std::max(1.0, span);

  // Initial tetrahedron from the axis extremes.
  uint32_t lo[3], hi[3];
  for (uint32_t ax = 0; ax < 3; ++ax) {
    lo[ax] = hi[ax] = 0;
    for (uint32_t i = 1; i < n; ++i) {
      if (p(i, ax) < p(lo[ax], ax)) lo[ax] = i;
      if (p(i, ax) > p(hi[ax], ax)) hi[ax] = i;
    }
  }
  uint32_t e0 = 0, e1 = 0;
  double best = -1;
  uint32_t extremes[6] = {lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]};
  for (uint32_t a : extremes)
    for (uint32_t b : extremes) {
      double dx = p(a, 0) - p(b, 0), dy = p(a, 1) - p(b, 1), dz = p(a, 2) - p(b, 2);
      double dd = dx * dx + dy * dy + dz * dz;
      if (dd > best) { best = dd; e0 = a; e1 = b; }
    }
  if (std::sqrt(best) < eps) return out;  // rank 0

  auto line_dist = [&](uint32_t i) {
    double ux = p(e1, 0) - p(e0, 0), uy = p(e1, 1) - p(e0, 1), uz = p(e1, 2) - p(e0, 2);
    double wx = p(i, 0) - p(e0, 0), wy = p(i, 1) - p(e0, 1), wz = p(i, 2) - p(e0, 2);
    double cx = uy * wz - uz * wy, cy = uz * wx - ux * wz, cz = ux * wy - uy * wx;
    double un = std::sqrt(ux * ux + uy * uy + uz * uz);
    return un > 0 ? std::sqrt(cx * cx + cy * cy + cz * cz) / un : 0.0;
  };
  uint32_t e2 = 0;
  best = -1;
  for (uint32_t i = 0; i < n; ++i) {
    double dd = line_dist(i);
    if (dd > best) { best = dd; e2 = i; }
  }
  if (best < eps) return out;  // rank 1

  auto plane_normal = [&](uint32_t a, uint32_t b, uint32_t c, double& nx, double& ny, double& nz) {
    double ux = p(b, 0) - p(a, 0), uy = p(b, 1) - p(a, 1), uz = p(b, 2) - p(a, 2);
    double vx = p(c, 0) - p(a, 0), vy = p(c, 1) - p(a, 1), vz = p(c, 2) - p(a, 2);
    nx = uy * vz - uz * vy;
    ny = uz * vx - ux * vz;
    nz = ux * vy - uy * vx;
    double nrm = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (nrm > 0) { nx /= nrm; ny /= nrm; nz /= nrm; }
  };
  double nx, ny, nz;
  plane_normal(e0, e1, e2, nx, ny, nz);
  uint32_t e3 = 0;
  best = -1;
  for (uint32_t i = 0; i < n; ++i) {
    double dd = std::abs(nx * (p(i, 0) - p(e0, 0)) + ny * (p(i, 1) - p(e0, 1)) +
                         nz * (p(i, 2) - p(e0, 2)));
    if (dd > best) { best = dd; e3 = i; }
  }
  if (best < eps) return out;  // rank 2

  double ix = (p(e0, 0) + p(e1, 0) + p(e2, 0) + p(e3, 0)) / 4;
  double iy = (p(e0, 1) + p(e1, 1) + p(e2, 1) + p(e3, 1)) / 4;
  double iz = (p(e0, 2) + p(e1, 2) + p(e2, 2) + p(e3, 2)) / 4;

  std::vector<QhFace> faces;
  auto add_face = [&](uint32_t a, uint32_t b, uint32_t c) {
    QhFace f{a, b, c, 0, 0, 0, 0, {}, true};
    plane_normal(a, b, c, f.nx, f.ny, f.nz);
    f.off = f.nx * p(a, 0) + f.ny * p(a, 1) + f.nz * p(a, 2);
    if (f.nx * ix + f.ny * iy + f.nz * iz > f.off) {  // flip outward
      std::swap(f.b, f.c);
      f.nx = -f.nx; f.ny = -f.ny; f.nz = -f.nz; f.off = -f.off;
    }
    faces.push_back(std::move(f));
    return uint32_t(faces.size() - 1);
  };
  auto face_dist = [&](const QhFace& f, uint32_t i) {
    return f.nx * p(i, 0) + f.ny * p(i, 1) + f.nz * p(i, 2) - f.off;
  };

  add_face(e0, e1, e2);
  add_face(e0, e1, e3);
  add_face(e0, e2, e3);
  add_face(e1, e2, e3);
  for (uint32_t i = 0; i < n; ++i)
    for (QhFace& f : faces)
      if (face_dist(f, i) > eps) { f.outside.push_back(i); break; }

  for (uint64_t guard = 0; guard < uint64_t(16) * n + 64; ++guard) {
    // farthest outside point over all faces
    int fi = -1;
    uint32_t far = 0;
    double far_d = eps;
    for (size_t f = 0; f < faces.size(); ++f) {
      if (!faces[f].alive) continue;
      for (uint32_t i : faces[f].outside) {
        double dd = face_dist(faces[f], i);
        if (dd > far_d) { far_d = dd; fi = int(f); far = i; }
      }
    }
    if (fi < 0) {  // converged
      for (const QhFace& f : faces) {
        if (!f.alive) continue;
        out.vertex[f.a] = out.vertex[f.b] = out.vertex[f.c] = 1;
        out.faces.push_back(float(f.nx));
        out.faces.push_back(float(f.ny));
        out.faces.push_back(float(f.nz));
        out.faces.push_back(float(f.off));
      }
      out.ok = true;
      return out;
    }

    std::vector<uint32_t> visible;
    for (size_t f = 0; f < faces.size(); ++f)
      if (faces[f].alive && face_dist(faces[f], far) > eps) visible.push_back(uint32_t(f));

    std::map<std::pair<uint32_t, uint32_t>, int> edge_count;
    std::vector<uint32_t> orphans;
    for (uint32_t f : visible) {
      const QhFace& face = faces[f];
      uint32_t vs[3] = {face.a, face.b, face.c};
      for (int e = 0; e < 3; ++e) {
        uint32_t u = vs[e], v = vs[(e + 1) % 3];
        edge_count[{std::min(u, v), std::max(u, v)}]++;
      }
      for (uint32_t i : face.outside)
        if (i != far) orphans.push_back(i);
      faces[f].alive = false;
    }

    std::vector<uint32_t> fresh;
    for (const auto& [edge, count] : edge_count) {
      if (count != 1) continue;  // interior edge of the visible region
      fresh.push_back(add_face(edge.first, edge.second, far));
    }
    for (uint32_t i : orphans)
      for (uint32_t f : fresh)
        if (face_dist(faces[f], i) > eps) { faces[f].outside.push_back(i); break; }
  }
  return out;  // guard tripped; caller falls back to all-vertices
}

}  // namespace

HullIndex build_hull_index(const VectorSet& set, const std::vector<uint32_t>& members,
                           const float* centroid, uint32_t r, uint64_t seed) {
  const uint32_t d = set.d;
  const uint32_t n = uint32_t(members.size());
  HullIndex hull;

  r = std::min(r, d);
  SplitMix64 rng(seed);
  std::vector<std::vector<float>> pcs;
  std::vector<const float*> deflate;
  for (uint32_t axis = 0; axis < r; ++axis) {
    std::vector<float> pc = principal_component(set, members, centroid, deflate, rng);
    if (norm2(pc.data(), d) == 0.f) break;
    pcs.push_back(std::move(pc));
    deflate.push_back(pcs.back().data());
  }

  // Drop axes with negligible spread so the hull runs at the true rank.
  std::vector<float> coords(size_t(n) * std::max<size_t>(1, pcs.size()));
  std::vector<uint32_t> live;
  for (uint32_t axis = 0; axis < pcs.size(); ++axis) {
    float lo = 0.f, hi = 0.f;
    for (uint32_t i = 0; i < n; ++i) {
      float proj = 0.f;
      const float* x = set.row(members[i]);
      for (uint32_t t = 0; t < d; ++t) proj += (x[t] - centroid[t]) * pcs[axis][t];
      coords[size_t(i) * pcs.size() + axis] = proj;
      lo = std::min(lo, proj);
      hi = std::max(hi, proj);
    }
    if (hi - lo > 1e-9f * std::max(1.f, std::abs(hi) + std::abs(lo)) && hi - lo > 0.f)
      live.push_back(axis);
  }

  hull.rank = uint32_t(live.size());
  hull.face_stride = hull.rank + 1;
  hull.is_vertex.assign(n, 0);
  hull.basis.resize(size_t(hull.rank) * d);
  hull.projected.resize(size_t(n) * std::max(1u, hull.rank));
  for (uint32_t a = 0; a < hull.rank; ++a) {
    std::copy(pcs[live[a]].begin(), pcs[live[a]].end(), hull.basis.begin() + size_t(a) * d);
    for (uint32_t i = 0; i < n; ++i)
      hull.projected[size_t(i) * hull.rank + a] = coords[size_t(i) * pcs.size() + live[a]];
  }

  if (n == 0) return hull;
  if (hull.rank == 0) {
    hull.is_vertex[0] = 1;  // coincident points: single representative
    return hull;
  }
  if (hull.rank == 1) {
    float lo = hull.projected[0], hi = hull.projected[0];
    for (uint32_t i = 1; i < n; ++i) {
      lo = std::min(lo, hull.projected[i]);
      hi = std::max(hi, hull.projected[i]);
    }
    for (uint32_t i = 0; i < n; ++i)
      if (hull.projected[i] == lo || hull.projected[i] == hi) hull.is_vertex[i] = 1;
    hull.faces = {1.f, hi, -1.f, -lo};
    return hull;
  }
  if (hull.rank == 2) {
    Hull2D h2 = hull_2d(hull.projected, n, 2);
    hull.is_vertex = h2.vertex;
    hull.faces = h2.faces;
    return hull;
  }
  Hull3D h3 = quickhull_3d(hull.projected, n, 3);
  if (!h3.ok) {
    hull.is_vertex.assign(n, 1);  // safe fallback: prune nothing
    hull.faces.clear();
    return hull;
  }
  hull.is_vertex = h3.vertex;
  hull.faces = h3.faces;
  return hull;
}

bool point_in_hull(const HullIndex& hull, uint32_t member_pos, float slack) {
  if (hull.rank == 0 || hull.faces.empty()) return true;
  const float* pt = hull.projected.data() + size_t(member_pos) * hull.rank;
  size_t n_faces = hull.faces.size() / hull.face_stride;
  for (size_t f = 0; f < n_faces; ++f) {
    const float* face = hull.faces.data() + f * hull.face_stride;
    float s = -face[hull.rank];  // offset
    for (uint32_t a = 0; a < hull.rank; ++a) s += face[a] * pt[a];
    if (s > slack) return false;
  }
  return true;
}

std::vector<std::pair<float, uint32_t>> hull_filter(std::span<const float> q, const VectorSet& set,
                                                    const std::vector<uint32_t>& members,
                                                    const HullIndex& hull) {
  if (set.metric != Metric::InnerProduct)
    throw std::invalid_argument("hull_filter: inner-product metric required");
  std::vector<std::pair<float, uint32_t>> scored;
  for (uint32_t i = 0; i < members.size(); ++i) {
    if (!hull.is_vertex[i]) continue;
    scored.emplace_back(-dot(q.data(), set.row(members[i]), set.d), i);
  }
  std::sort(scored.begin(), scored.end());
  return scored;
}

// ---------------------------------------------------------------------------
// annulus
// ---------------------------------------------------------------------------

AnnulusData build_annulus_data(const VectorSet& set, const std::vector<uint32_t>& members,
                               const float* centroid) {
  AnnulusData data;
  data.center_dist.resize(members.size());
  for (size_t i = 0; i < members.size(); ++i)
    data.center_dist[i] = std::sqrt(l2_sq(set.row(members[i]), centroid, set.d));
  return data;
}

std::vector<uint8_t> annulus_filter(float d_qc, float ub, const AnnulusData& data) {
  if (ub < 0.f) throw std::invalid_argument("annulus_filter: negative ub");
  std::vector<uint8_t> keep(data.center_dist.size());
  for (size_t i = 0; i < data.center_dist.size(); ++i) {
    float dcx = data.center_dist[i];
    keep[i] = (dcx >= d_qc - ub) && (dcx <= d_qc + ub);
  }
  return keep;
}

// ---------------------------------------------------------------------------
// measurement driver
// ---------------------------------------------------------------------------

LabStrategy lab_strategy_from_string(const std::string& s) {
  if (s == "none") return LabStrategy::None;
  if (s == "sign") return LabStrategy::Sign;
  if (s == "strips") return LabStrategy::Strips;
  if (s == "hull") return LabStrategy::Hull;
  if (s == "annulus") return LabStrategy::Annulus;
  throw std::invalid_argument("unknown lab strategy: " + s);
}

namespace {

struct TopK {
  uint32_t k;
  std::vector<std::pair<float, uint32_t>> heap;  // max-heap, worst on top

  explicit TopK(uint32_t kk) : k(kk) { heap.reserve(kk + 1); }
  bool full() const { return heap.size() >= k; }
  float worst() const { return heap.front().first; }
  void push(float dist, uint32_t id) {
    std::pair<float, uint32_t> c{dist, id};
    if (heap.size() < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end());
    } else if (c < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end());
    }
  }
};

}  // namespace

std::vector<LabReportRow> measure_prune_stats(const Index& index, const VectorSet& queries,
                                              const GroundTruth& gt, const LabConfig& config) {
  if (gt.nq != queries.n || gt.k < config.k)
    throw std::invalid_argument("measure_prune_stats: ground truth does not cover the queries");
  const uint32_t L = index.L();
  const uint32_t nprob = std::min(config.nprob, L);
  const uint32_t k = config.k;

  std::vector<float> sweep = config.sweep;
  if (sweep.empty()) {
    switch (config.strategy) {
      case LabStrategy::Sign: sweep = {float(config.sign_h)}; break;
      case LabStrategy::Strips: sweep = {float(config.n_strips)}; break;
      default: sweep = {0.f}; break;
    }
  }

  // Strategy state shared across sweep rows where possible.
  std::vector<SignIndex> sign_indices;
  std::vector<AnnulusData> annulus;
  std::vector<HullIndex> hulls;
  std::vector<float> strip_dir;
  std::vector<std::vector<float>> strip_projections(L);

  if (config.strategy == LabStrategy::Sign) {
    sign_indices.resize(L);
#pragma omp parallel for schedule(dynamic)
    for (int64_t j = 0; j < int64_t(L); ++j)
      sign_indices[j] = build_sign_index(index.X, index.clusters[j].members,
                                         index.clustering.centroid(uint32_t(j)), config.sign_h,
                                         SplitMix64(config.seed, uint64_t(j)).next());
  } else if (config.strategy == LabStrategy::Annulus) {
    annulus.resize(L);
#pragma omp parallel for schedule(dynamic)
    for (int64_t j = 0; j < int64_t(L); ++j)
      annulus[j] = build_annulus_data(index.X, index.clusters[j].members,
                                      index.clustering.centroid(uint32_t(j)));
  } else if (config.strategy == LabStrategy::Hull) {
    hulls.resize(L);
#pragma omp parallel for schedule(dynamic)
    for (int64_t j = 0; j < int64_t(L); ++j)
      hulls[j] = build_hull_index(index.X, index.clusters[j].members,
                                  index.clustering.centroid(uint32_t(j)), config.hull_r,
                                  SplitMix64(config.seed, uint64_t(j)).next());
  } else if (config.strategy == LabStrategy::Strips) {
    std::vector<uint32_t> all(index.n);
    for (uint32_t i = 0; i < index.n; ++i) all[i] = i;
    std::vector<float> mean(index.d, 0.f);
    for (uint32_t i = 0; i < index.n; ++i) {
      const float* x = index.X.row(i);
      for (uint32_t t = 0; t < index.d; ++t) mean[t] += x[t];
    }
    for (float& v : mean) v /= float(index.n);
    SplitMix64 rng(config.seed);
    strip_dir = principal_component(index.X, all, mean.data(), {}, rng);
    for (uint32_t j = 0; j < L; ++j) {
      const std::vector<uint32_t>& mem = index.clusters[j].members;
      strip_projections[j].resize(mem.size());
      for (size_t i = 0; i < mem.size(); ++i)
        strip_projections[j][i] = dot(index.X.row(mem[i]), strip_dir.data(), index.d);
    }
  }

  std::vector<LabReportRow> rows;
  for (float param : sweep) {
    std::vector<StripsIndex> strips;
    if (config.strategy == LabStrategy::Strips) {
      uint32_t n_strips = std::max(1u, uint32_t(param));
      strips.resize(L);
      for (uint32_t j = 0; j < L; ++j)
        strips[j] = build_strips_index(strip_projections[j], n_strips);
    }

    double total_candidates = 0, total_pruned = 0, recall_sum = 0;
#pragma omp parallel for schedule(dynamic, 8) \
    reduction(+ : total_candidates, total_pruned, recall_sum)
    for (int64_t qi = 0; qi < int64_t(queries.n); ++qi) {
      std::span<const float> q = queries.row_span(uint32_t(qi));
      std::vector<float> qf = preprocess_query(index, q);
      std::vector<uint32_t> probe =
          top_n_clusters(qf, index.clustering, nprob, index.metric);
      TopK pool(k);

      for (uint32_t cid : probe) {
        const std::vector<uint32_t>& mem = index.clusters[cid].members;
        total_candidates += double(mem.size());
        std::vector<uint32_t> kept_pos;

        switch (config.strategy) {
          case LabStrategy::None: {
            kept_pos.resize(mem.size());
            for (uint32_t i = 0; i < mem.size(); ++i) kept_pos[i] = i;
            break;
          }
          case LabStrategy::Sign: {
            uint64_t qs = sign_vector(qf, index.clustering.centroid(cid), sign_indices[cid]);
            std::vector<uint8_t> keep = sign_filter(qs, sign_indices[cid], uint32_t(param));
            for (uint32_t i = 0; i < keep.size(); ++i)
              if (keep[i]) kept_pos.push_back(i);
            break;
          }
          case LabStrategy::Strips: {
            float qp = dot(qf.data(), strip_dir.data(), index.d);
            float bound = pool.full() ? pool.worst() : std::numeric_limits<float>::infinity();
            StripsScanResult sr = strips_scan(qp, strips[cid], bound);
            kept_pos = std::move(sr.kept);
            break;
          }
          case LabStrategy::Annulus: {
            float d_qc = std::sqrt(l2_sq(qf.data(), index.clustering.centroid(cid), index.d));
            float ub = pool.full() ? std::sqrt(std::max(0.f, pool.worst()))
                                   : std::numeric_limits<float>::infinity();
            if (std::isfinite(ub)) {
              std::vector<uint8_t> keep = annulus_filter(d_qc, ub, annulus[cid]);
              for (uint32_t i = 0; i < keep.size(); ++i)
                if (keep[i]) kept_pos.push_back(i);
            } else {
              kept_pos.resize(mem.size());
              for (uint32_t i = 0; i < mem.size(); ++i) kept_pos[i] = i;
            }
            break;
          }
          case LabStrategy::Hull: {
            auto vertices = hull_filter(qf, index.X, mem, hulls[cid]);
            bool interior_too = !pool.full();
            for (const auto& [score, pos] : vertices) {
              if (pool.full() && score < pool.worst()) interior_too = true;
              break;  // best vertex decides
            }
            if (vertices.empty()) interior_too = true;
            if (interior_too) {
              kept_pos.resize(mem.size());
              for (uint32_t i = 0; i < mem.size(); ++i) kept_pos[i] = i;
            } else {
              for (const auto& [score, pos] : vertices) kept_pos.push_back(pos);
            }
            break;
          }
        }

        total_pruned += double(mem.size() - kept_pos.size());
        for (uint32_t pos : kept_pos) {
          uint32_t id = mem[pos];
          pool.push(metric_distance(qf.data(), index.X.row(id), index.d, index.metric), id);
        }
      }

      // exact re-rank in the original space, then recall@k
      std::vector<Neighbor> final_ids;
      final_ids.reserve(pool.heap.size());
      for (const auto& [dist_x, id] : pool.heap)
        final_ids.push_back(
            {id, metric_distance(q.data(), index.rerank_set().row(id), index.d_init, index.metric)});
      std::sort(final_ids.begin(), final_ids.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
      });
      if (final_ids.size() > k) final_ids.resize(k);
      uint32_t hits = 0;
      for (const Neighbor& nb : final_ids)
        for (uint32_t j = 0; j < k; ++j)
          if (gt.ids_for(uint32_t(qi))[j] == nb.id) { hits++; break; }
      recall_sum += double(hits) / double(k);
    }

    LabReportRow row;
    row.param = param;
    row.pruned_fraction = total_candidates > 0 ? total_pruned / total_candidates : 0.0;
    row.recall = recall_sum / double(queries.n);
    row.evals_avoided = total_pruned / double(queries.n);
    rows.push_back(row);
  }
  return rows;
}

void write_lab_csv(const std::string& path, const std::vector<LabReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "param,pruned_fraction,recall,evals_avoided\n";
  for (const LabReportRow& r : rows)
    out << r.param << ',' << r.pruned_fraction << ',' << r.recall << ',' << r.evals_avoided
        << '\n';
}

}  // namespace vecscan
