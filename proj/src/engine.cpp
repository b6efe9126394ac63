#include "vecscan/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace vecscan {

namespace {

const float* residual_centroid(const Index& index, uint32_t cluster) {
  if (index.params.residual_mode == ResidualMode::Normalized &&
      !index.clustering.normalized_centroids.empty())
    return index.clustering.normalized_centroid(cluster);
  return index.clustering.centroid(cluster);
}

float query_cluster_distance(const Index& index, std::span<const float> qf, uint32_t cluster) {
  const bool angular =
      index.metric == Metric::Angular && !index.clustering.normalized_centroids.empty();
  const float* c = angular ? index.clustering.normalized_centroid(cluster)
                           : index.clustering.centroid(cluster);
  return metric_distance(qf.data(), c, index.d, index.metric);
}

// Per-cluster LUT under residual encoding: L2/Angular shift the query by
// the cluster centroid; InnerProduct keeps q and folds -<q,c> into the
// dequantization offset.
QuantizedLut cluster_lut(const Index& index, std::span<const float> qf, uint32_t cluster) {
  FloatLut flut;
  if (index.metric == Metric::InnerProduct) {
    flut = compute_float_lut(qf, index.codebooks, index.metric);
    flut.offset = -dot(qf.data(), residual_centroid(index, cluster), index.d);
  } else {
    const float* c = residual_centroid(index, cluster);
    std::vector<float> q_res(index.d);
    for (uint32_t t = 0; t < index.d; ++t) q_res[t] = qf[t] - c[t];
    flut = compute_float_lut(q_res, index.codebooks, index.metric);
  }
  return quantize_lut(flut);
}

}  // namespace

std::vector<float> preprocess_query(const Index& index, std::span<const float> q) {
  if (q.size() != index.d_init) throw std::invalid_argument("query dimension mismatch");
  std::vector<float> qf;
  if (index.has_filter && !index.filter.identity())
    qf = apply_filter(q, index.filter);
  else
    qf.assign(q.begin(), q.end());
  if (index.metric == Metric::Angular && index.params.normalize_angular) {
    float nrm = norm2(qf.data(), uint32_t(qf.size()));
    if (nrm > 0.f && std::abs(nrm - 1.f) >= 1e-6f)
      for (float& v : qf) v /= nrm;
  }
  return qf;
}

Index build_index(const VectorSet& set, const BuildParams& params) {
  Index index;
  index.metric = set.metric;
  index.n = set.n;
  index.d_init = set.d;
  index.params = params;

  if (set.n == 0) throw std::invalid_argument("build_index: empty dataset");

  VectorSet X = set;
  if (set.metric == Metric::Angular && params.normalize_angular) X = normalize_all(X);

  index.has_filter = params.filtration;
  if (params.filtration) {
    std::vector<float> fractions = compute_dim_stats(X);
    index.filter = select_dims(fractions, params.filter_threshold, params.filter_d_min);
    if (!index.filter.identity()) {
      index.X_init = X;
      index.has_x_init = true;
      X = apply_filter(X, index.filter);
    }
  } else {
    index.filter.mask.assign(set.d, 1);
    index.filter.d_kept = set.d;
    index.filter.fractions.assign(set.d, 0.f);
    index.filter.threshold = 1.f;
  }
  index.d = X.d;

  uint32_t L = params.clusters ? params.clusters : uint32_t(std::lround(std::sqrt(double(set.n))));
  L = std::max(1u, L);
  if (L > set.n) throw std::invalid_argument("build_index: L > n");

  KMeansConfig kcfg;
  kcfg.max_iters = params.kmeans_iters;
  kcfg.epsilon = params.kmeans_epsilon;
  kcfg.seed = SplitMix64(params.seed, 1).next();
  index.clustering = train_kmeans(X, L, kcfg);

  if (params.residual_mode == ResidualMode::Normalized &&
      index.clustering.normalized_centroids.empty()) {
    index.clustering.normalized_centroids = index.clustering.centroids;
    for (uint32_t j = 0; j < L; ++j) {
      float* c = index.clustering.normalized_centroids.data() + size_t(j) * X.d;
      float nrm = norm2(c, X.d);
      if (nrm > 0.f)
        for (uint32_t t = 0; t < X.d; ++t) c[t] /= nrm;
    }
  }

  VectorSet residuals = compute_residuals(X, index.clustering, params.residual_mode);
  index.codebooks = train_codebooks(residuals, params.dprime, SplitMix64(params.seed, 2).next(),
                                    &X.zero_rows);
  std::vector<uint8_t> codes = encode_all(residuals, index.codebooks);

  index.clusters.resize(L);
  for (uint32_t i = 0; i < set.n; ++i) index.clusters[index.clustering.assignment[i]].members.push_back(i);
  const uint32_t m = index.codebooks.m;
#pragma omp parallel for schedule(dynamic)
  for (int64_t j = 0; j < int64_t(L); ++j) {
    ClusterData& cd = index.clusters[j];
    std::vector<uint8_t> sub(size_t(cd.members.size()) * m);
    for (size_t i = 0; i < cd.members.size(); ++i)
      std::copy_n(codes.data() + size_t(cd.members[i]) * m, m, sub.data() + i * m);
    cd.blocks = pack_blocks(sub, m, cd.members, uint32_t(j));
  }

  if (params.graph) {
#pragma omp parallel for schedule(dynamic)
    for (int64_t j = 0; j < int64_t(L); ++j) {
      ClusterData& cd = index.clusters[j];
      cd.graph = build_leaf_graph(X, cd.members, index.clustering.centroid(uint32_t(j)),
                                  index.metric, params.graph_degree);
    }
  }

  index.stats = build_cluster_stats(X, index.clustering, SplitMix64(params.seed, 3).next());
  index.X = std::move(X);
  index.kernel_lanes = params.lanes_override ? params.lanes_override : preferred_lanes_per_pass();
  return index;
}

void search_in_cluster(const Index& index, uint32_t cluster, uint32_t rank,
                       const QuantizedLut& qlut, const LutKernel& kernel,
                       const SearchRequest& request, CandidatePool& pool,
                       SearchDiagnostics& diag) {
  const ClusterData& cd = index.clusters[cluster];
  const bool graph_available = request.use_graph && cd.graph.n > 0;
  ClusterStrategy strategy = graph_available ? choose_strategy(rank, request.policy)
                                             : ClusterStrategy::BruteForce;
  BlockDistances bd;
  if (strategy == ClusterStrategy::BruteForce) {
    for (const CodeBlock& b : cd.blocks) {
      kernel.compute(b, bd);
      update_pool(pool, bd, b.ids, qlut);
      diag.points_scanned += b.valid_count;
    }
    return;
  }

  uint32_t efs = request.policy.efs_small ? request.policy.efs_small : 2 * request.k;
  efs = std::max(efs, request.k);
  GraphSearchResult res = graph_search(cd.graph, cd.blocks, qlut, kernel, efs);
  diag.points_scanned += res.evaluations;
  if (should_escalate(res.candidates, pool, request.policy, efs)) {
    diag.escalations++;
    for (const CodeBlock& b : cd.blocks) {
      kernel.compute(b, bd);
      update_pool(pool, bd, b.ids, qlut);
      diag.points_scanned += b.valid_count;
    }
  } else {
    for (const PoolEntry& e : res.candidates) pool.insert(e.dist, e.id, e.acc);
  }
}

std::vector<Neighbor> rerank_exact(const std::vector<PoolEntry>& entries,
                                   std::span<const float> q_init, const VectorSet& exact_set,
                                   uint32_t k, Metric metric) {
  std::vector<uint32_t> ids;
  ids.reserve(entries.size());
  {
    std::unordered_set<uint32_t> seen;
    seen.reserve(entries.size() * 2);
    for (const PoolEntry& e : entries)
      if (seen.insert(e.id).second) ids.push_back(e.id);
  }
  std::vector<Neighbor> scored(ids.size());
  for (size_t i = 0; i < ids.size(); ++i)
    scored[i] = {ids[i],
                 metric_distance(q_init.data(), exact_set.row(ids[i]), exact_set.d, metric)};
  auto cmp = [](const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
  };
  size_t take = std::min<size_t>(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), cmp);
  scored.resize(take);
  return scored;
}

SearchResult search(const Index& index, std::span<const float> q, const SearchRequest& request) {
  if (request.k == 0) throw std::invalid_argument("search: k must be >= 1");
  if (request.k > request.reorder) throw std::invalid_argument("search: k > reorder");
  if (request.k > index.n) throw std::invalid_argument("search: k > n");
  if (request.nprob == 0) throw std::invalid_argument("search: nprob must be >= 1");
  if (request.theta > 0.f && !index.models.has_prune)
    throw std::invalid_argument("search: theta > 0 requires a trained prune model");
  if (request.adaptive && !index.models.has_nprob && !index.models.has_reorder)
    throw std::invalid_argument("search: adaptive requested but index has no models");

  std::vector<float> qf = preprocess_query(index, q);
  std::vector<uint32_t> order = rank_clusters(qf, index.clustering, index.metric);

  uint32_t nprob = std::min(request.nprob, index.L());
  uint32_t reorder = request.reorder;
  if (request.adaptive) {
    std::vector<float> feats =
        query_features(qf, index.clustering, index.metric, index.stats,
                       index.models.params.t_features, &order);
    if (index.models.has_nprob)
      nprob = interpolate_nprob(index.models.nprob_model.predict(feats), index.models.params);
    if (index.models.has_reorder)
      reorder = interpolate_reorder(index.models.reorder_model.predict(feats), index.models.params);
  }
  nprob = std::max(1u, std::min(nprob, index.L()));
  reorder = std::max(reorder, request.k);

  SearchResult out;
  out.diag.nprob_used = nprob;
  out.diag.reorder_used = reorder;

  CandidatePool pool(reorder);
  const bool global_lut = index.params.residual_mode == ResidualMode::None;
  QuantizedLut qlut;
  LutKernel kernel;
  if (global_lut) {
    qlut = quantize_lut(compute_float_lut(qf, index.codebooks, index.metric));
    kernel = LutKernel(qlut, index.kernel_lanes);
  }

  float d_nearest = query_cluster_distance(index, qf, order[0]);
  uint32_t rank_searched = 0;
  for (uint32_t idx = 0; idx < nprob; ++idx) {
    uint32_t cid = order[idx];
    if (request.theta > 0.f) {
      float d_qc = query_cluster_distance(index, qf, cid);
      std::vector<float> cf =
          cluster_features(qf, cid, d_qc, d_nearest, index.clustering, index.stats);
      if (!predict_keep(cf, index.models.prune_model, request.theta)) {
        out.diag.clusters_pruned++;
        continue;
      }
    }
    if (!global_lut) {
      qlut = cluster_lut(index, qf, cid);
      kernel = LutKernel(qlut, index.kernel_lanes);
    }
    search_in_cluster(index, cid, rank_searched, qlut, kernel, request, pool, out.diag);
    out.diag.clusters_probed++;
    rank_searched++;
  }

  out.neighbors = rerank_exact(dequantize_pool(pool), q, index.rerank_set(), request.k, index.metric);
  return out;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'K', 'S', 'C', 'N'};

void write_vectorset(ByteWriter& w, const VectorSet& v) {
  w.pod(v.n);
  w.pod(v.d);
  w.pod(uint8_t(v.metric));
  w.vec(v.data);
  w.vec(v.zero_rows);
}

VectorSet read_vectorset(ByteReader& r) {
  VectorSet v;
  v.n = r.pod<uint32_t>();
  v.d = r.pod<uint32_t>();
  v.metric = Metric(r.pod<uint8_t>());
  v.data = r.vec<float>();
  v.zero_rows = r.vec<uint32_t>();
  return v;
}

void write_params(ByteWriter& w, const BuildParams& p) {
  w.pod(p.clusters);
  w.pod(p.dprime);
  w.pod(uint8_t(p.residual_mode));
  w.pod(uint8_t(p.graph));
  w.pod(p.graph_degree);
  w.pod(uint8_t(p.filtration));
  w.pod(p.filter_threshold);
  w.pod(p.filter_d_min);
  w.pod(uint8_t(p.normalize_angular));
  w.pod(p.kmeans_iters);
  w.pod(p.kmeans_epsilon);
  w.pod(p.seed);
}

BuildParams read_params(ByteReader& r) {
  BuildParams p;
  p.clusters = r.pod<uint32_t>();
  p.dprime = r.pod<uint32_t>();
  p.residual_mode = ResidualMode(r.pod<uint8_t>());
  p.graph = r.pod<uint8_t>() != 0;
  p.graph_degree = r.pod<uint32_t>();
  p.filtration = r.pod<uint8_t>() != 0;
  p.filter_threshold = r.pod<float>();
  p.filter_d_min = r.pod<uint32_t>();
  p.normalize_angular = r.pod<uint8_t>() != 0;
  p.kmeans_iters = r.pod<uint32_t>();
  p.kmeans_epsilon = r.pod<float>();
  p.seed = r.pod<uint64_t>();
  return p;
}

void write_adaptive_params(ByteWriter& w, const AdaptiveParams& p) {
  w.pod(p.nprob_min);
  w.pod(p.nprob_max);
  w.pod(p.p0);
  w.pod(p.p1);
  w.pod(p.reorder_min);
  w.pod(p.reorder_max);
  w.pod(p.p0_reorder);
  w.pod(p.p1_reorder);
  w.pod(p.theta);
  w.pod(p.t_features);
}

AdaptiveParams read_adaptive_params(ByteReader& r) {
  AdaptiveParams p;
  p.nprob_min = r.pod<uint32_t>();
  p.nprob_max = r.pod<uint32_t>();
  p.p0 = r.pod<float>();
  p.p1 = r.pod<float>();
  p.reorder_min = r.pod<uint32_t>();
  p.reorder_max = r.pod<uint32_t>();
  p.p0_reorder = r.pod<float>();
  p.p1_reorder = r.pod<float>();
  p.theta = r.pod<float>();
  p.t_features = r.pod<uint32_t>();
  return p;
}

}  // namespace

void save_index(const Index& index, const std::string& path) {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.pod(uint32_t(Index::kFormatVersion));

  w.pod(uint8_t(index.metric));
  w.pod(index.n);
  w.pod(index.d_init);
  w.pod(index.d);
  write_params(w, index.params);

  w.pod(uint8_t(index.has_filter));
  w.vec(index.filter.mask);
  w.vec(index.filter.fractions);
  w.pod(index.filter.threshold);
  w.pod(index.filter.d_kept);

  write_vectorset(w, index.X);
  w.pod(uint8_t(index.has_x_init));
  if (index.has_x_init) write_vectorset(w, index.X_init);

  w.pod(index.clustering.k);
  w.pod(index.clustering.d);
  w.vec(index.clustering.centroids);
  w.vec(index.clustering.normalized_centroids);
  w.vec(index.clustering.assignment);
  w.vec(index.clustering.sizes);

  w.pod(index.codebooks.m);
  w.pod(index.codebooks.dprime);
  w.pod(index.codebooks.d);
  w.vec(index.codebooks.tables);

  w.pod(uint32_t(index.clusters.size()));
  for (const ClusterData& cd : index.clusters) {
    w.vec(cd.members);
    w.pod(uint32_t(cd.blocks.size()));
    for (const CodeBlock& b : cd.blocks) {
      w.pod(b.cluster);
      w.pod(b.valid_count);
      w.bytes(b.ids.data(), b.ids.size() * sizeof(uint32_t));
      w.vec(b.packed);
    }
    w.pod(cd.graph.degree);
    w.pod(cd.graph.n);
    w.pod(cd.graph.entry_point);
    w.vec(cd.graph.adjacency);
  }

  w.pod(uint32_t(index.stats.size()));
  for (const ClusterStats& s : index.stats) {
    w.pod(s.radius);
    w.vec(s.pc1);
    w.vec(s.pc2);
    w.bytes(s.histogram.data(), s.histogram.size() * sizeof(uint32_t));
    w.pod(s.outlier_count);
    w.vec(s.outlier_dir);
    w.pod(s.degenerate_pcs);
  }

  w.pod(uint8_t(index.models.has_nprob));
  w.pod(uint8_t(index.models.has_reorder));
  w.pod(uint8_t(index.models.has_prune));
  if (index.models.has_nprob) index.models.nprob_model.serialize(w);
  if (index.models.has_reorder) index.models.reorder_model.serialize(w);
  if (index.models.has_prune) index.models.prune_model.serialize(w);
  write_adaptive_params(w, index.models.params);

  uint64_t checksum = fnv1a64(w.buf.data(), w.buf.size());
  w.pod(checksum);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(w.buf.data()), std::streamsize(w.buf.size()));
  if (!out) throw std::runtime_error("index write failed: " + path);
}

Index load_index(const std::string& path, uint32_t lanes_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw std::runtime_error("index file too short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw std::runtime_error("index file: bad magic");

  uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a64(bytes.data(), bytes.size() - 8) != stored)
    throw std::runtime_error("index file: checksum mismatch");

  ByteReader r(bytes.data() + 4, bytes.size() - 12);
  uint32_t version = r.pod<uint32_t>();
  if (version != Index::kFormatVersion)
    throw std::runtime_error("index file: unsupported version " + std::to_string(version));

  Index index;
  index.metric = Metric(r.pod<uint8_t>());
  index.n = r.pod<uint32_t>();
  index.d_init = r.pod<uint32_t>();
  index.d = r.pod<uint32_t>();
  index.params = read_params(r);

  index.has_filter = r.pod<uint8_t>() != 0;
  index.filter.mask = r.vec<uint8_t>();
  index.filter.fractions = r.vec<float>();
  index.filter.threshold = r.pod<float>();
  index.filter.d_kept = r.pod<uint32_t>();

  index.X = read_vectorset(r);
  index.has_x_init = r.pod<uint8_t>() != 0;
  if (index.has_x_init) index.X_init = read_vectorset(r);

  index.clustering.k = r.pod<uint32_t>();
  index.clustering.d = r.pod<uint32_t>();
  index.clustering.centroids = r.vec<float>();
  index.clustering.normalized_centroids = r.vec<float>();
  index.clustering.assignment = r.vec<uint32_t>();
  index.clustering.sizes = r.vec<uint32_t>();

  index.codebooks.m = r.pod<uint32_t>();
  index.codebooks.dprime = r.pod<uint32_t>();
  index.codebooks.d = r.pod<uint32_t>();
  index.codebooks.tables = r.vec<float>();

  uint32_t nc = r.pod<uint32_t>();
  index.clusters.resize(nc);
  for (ClusterData& cd : index.clusters) {
    cd.members = r.vec<uint32_t>();
    uint32_t nb = r.pod<uint32_t>();
    cd.blocks.resize(nb);
    for (CodeBlock& b : cd.blocks) {
      b.cluster = r.pod<uint32_t>();
      b.valid_count = r.pod<uint32_t>();
      r.bytes(b.ids.data(), b.ids.size() * sizeof(uint32_t));
      b.packed = r.vec<uint8_t>();
    }
    cd.graph.degree = r.pod<uint32_t>();
    cd.graph.n = r.pod<uint32_t>();
    cd.graph.entry_point = r.pod<uint32_t>();
    cd.graph.adjacency = r.vec<uint32_t>();
  }

  uint32_t ns = r.pod<uint32_t>();
  index.stats.resize(ns);
  for (ClusterStats& s : index.stats) {
    s.radius = r.pod<float>();
    s.pc1 = r.vec<float>();
    s.pc2 = r.vec<float>();
    r.bytes(s.histogram.data(), s.histogram.size() * sizeof(uint32_t));
    s.outlier_count = r.pod<uint32_t>();
    s.outlier_dir = r.vec<float>();
    s.degenerate_pcs = r.pod<uint8_t>();
  }

  index.models.has_nprob = r.pod<uint8_t>() != 0;
  index.models.has_reorder = r.pod<uint8_t>() != 0;
  index.models.has_prune = r.pod<uint8_t>() != 0;
  if (index.models.has_nprob) index.models.nprob_model = GbdtModel::deserialize(r);
  if (index.models.has_reorder) index.models.reorder_model = GbdtModel::deserialize(r);
  if (index.models.has_prune) index.models.prune_model = GbdtModel::deserialize(r);
  index.models.params = read_adaptive_params(r);

  uint32_t t = std::min(index.models.params.t_features, index.L());
  if (index.models.has_nprob && index.models.nprob_model.n_features() != 4 * t)
    throw std::runtime_error("index file: nprob model schema mismatch");
  if (index.models.has_reorder && index.models.reorder_model.n_features() != 4 * t)
    throw std::runtime_error("index file: reorder model schema mismatch");
  if (index.models.has_prune && index.models.prune_model.n_features() != kClusterFeatureCount)
    throw std::runtime_error("index file: prune model schema mismatch");

  index.kernel_lanes = lanes_override ? lanes_override : preferred_lanes_per_pass();
  return index;
}

// ---------------------------------------------------------------------------
// adaptive training
// ---------------------------------------------------------------------------

void train_adaptive(Index& index, const VectorSet& training_queries, const TrainParams& params) {
  if (training_queries.n < 50)
    throw std::invalid_argument("train_adaptive: need at least 50 training queries");
  if (training_queries.d != index.d_init)
    throw std::invalid_argument("train_adaptive: query dimension mismatch");
  const uint32_t L = index.L();
  const uint32_t k = params.k;

  AdaptiveParams ap;
  ap.nprob_min = params.nprob_min ? params.nprob_min
                                  : std::max(1u, uint32_t(std::lround(0.02 * L)));
  ap.nprob_max = params.nprob_max ? params.nprob_max
                                  : std::max(ap.nprob_min + 1, uint32_t(std::lround(0.25 * L)));
  ap.nprob_max = std::min(ap.nprob_max, L);
  ap.nprob_min = std::min(ap.nprob_min, ap.nprob_max);
  ap.reorder_min = params.reorder_min ? params.reorder_min : std::max(50u, 5 * k);
  ap.reorder_max = params.reorder_max ? params.reorder_max : std::max(4 * ap.reorder_min, 200u);
  ap.reorder_max = std::max(ap.reorder_max, ap.reorder_min);
  ap.p0 = params.p0;
  ap.p1 = params.p1;
  ap.p0_reorder = params.p0_reorder;
  ap.p1_reorder = params.p1_reorder;
  ap.theta = params.theta;
  ap.t_features = params.t_features;

  GroundTruth gt = brute_force_topk(index.rerank_set(), training_queries, k);

  // Queries in index space plus their full cluster ordering.
  const uint32_t nq = training_queries.n;
  VectorSet qf_set;
  qf_set.n = nq;
  qf_set.d = index.d;
  qf_set.metric = index.metric;
  qf_set.data.resize(size_t(nq) * index.d);
  std::vector<std::vector<uint32_t>> orders(nq);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t qi = 0; qi < int64_t(nq); ++qi) {
    std::vector<float> qf = preprocess_query(index, training_queries.row_span(uint32_t(qi)));
    std::copy(qf.begin(), qf.end(), qf_set.row(uint32_t(qi)));
    orders[qi] = rank_clusters(qf, index.clustering, index.metric);
  }

  const uint32_t t = std::min(ap.t_features, L);
  std::vector<float> feats(size_t(nq) * 4 * t);
#pragma omp parallel for schedule(dynamic, 16)
  for (int64_t qi = 0; qi < int64_t(nq); ++qi) {
    std::vector<float> f = query_features(qf_set.row_span(uint32_t(qi)), index.clustering,
                                          index.metric, index.stats, t, &orders[qi]);
    std::copy(f.begin(), f.end(), feats.begin() + size_t(qi) * 4 * t);
  }

  if (params.train_nprob) {
    std::vector<uint8_t> labels = make_labels(index.clustering, index.metric, qf_set, gt,
                                              ap.nprob_min, k);
    GbdtConfig cfg = params.gbdt;
    cfg.seed = SplitMix64(params.seed, 10).next();
    index.models.nprob_model = train_prob_model(feats, 4 * t, labels, cfg);
    index.models.has_nprob = true;
  }

  if (params.train_reorder) {
    // Hard iff probing nprob_max clusters with a reorder_min pool misses a
    // true neighbor: the pool, not the probe count, is the binding limit.
    std::vector<uint8_t> labels(nq, 0);
    SearchRequest req;
    req.k = k;
    req.nprob = ap.nprob_max;
    req.reorder = std::max(ap.reorder_min, k);
    req.use_graph = false;
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t qi = 0; qi < int64_t(nq); ++qi) {
      SearchResult res = search(index, training_queries.row_span(uint32_t(qi)), req);
      std::vector<char> found(k, 0);
      for (const Neighbor& nb : res.neighbors)
        for (uint32_t j = 0; j < k; ++j)
          if (gt.ids_for(uint32_t(qi))[j] == nb.id) found[j] = 1;
      for (uint32_t j = 0; j < k; ++j)
        if (!found[j]) { labels[qi] = 1; break; }
    }
    GbdtConfig cfg = params.gbdt;
    cfg.seed = SplitMix64(params.seed, 11).next();
    index.models.reorder_model = train_prob_model(feats, 4 * t, labels, cfg);
    index.models.has_reorder = true;
  }

  if (params.train_prune) {
    uint32_t per_query = std::min(ap.nprob_max, L);
    std::vector<float> cfeats;
    std::vector<uint8_t> clabels;
    uint64_t total = uint64_t(nq) * per_query;
    uint32_t stride = std::max<uint64_t>(1, total / std::max(1u, params.max_prune_samples));
    SplitMix64 pick(params.seed, 12);
    uint64_t cursor = pick.next_below(stride);
    for (uint32_t qi = 0; qi < nq; ++qi) {
      std::span<const float> qf = qf_set.row_span(qi);
      const std::vector<uint32_t>& order = orders[qi];
      float d_nearest = query_cluster_distance(index, qf, order[0]);
      std::vector<char> contains(L, 0);
      for (uint32_t j = 0; j < k; ++j)
        contains[index.clustering.assignment[gt.ids_for(qi)[j]]] = 1;
      for (uint32_t rank = 0; rank < per_query; ++rank) {
        uint64_t flat = uint64_t(qi) * per_query + rank;
        if (flat != cursor) continue;
        cursor += stride;
        uint32_t cid = order[rank];
        float d_qc = query_cluster_distance(index, qf, cid);
        std::vector<float> cf =
            cluster_features(qf, cid, d_qc, d_nearest, index.clustering, index.stats);
        cfeats.insert(cfeats.end(), cf.begin(), cf.end());
        clabels.push_back(contains[cid]);
      }
    }
    GbdtConfig cfg = params.gbdt;
    cfg.seed = SplitMix64(params.seed, 13).next();
    index.models.prune_model = train_prob_model(cfeats, kClusterFeatureCount, clabels, cfg);
    index.models.has_prune = true;
  }

  index.models.params = ap;
}

}  // namespace vecscan
