#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vecscan/dataset.hpp"

using namespace vecscan;

namespace {

VectorSet make_set(uint32_t n, uint32_t d, Metric metric, uint64_t seed) {
  VectorSet s;
  s.n = n;
  s.d = d;
  s.metric = metric;
  s.data.resize(size_t(n) * d);
  SplitMix64 rng(seed);
  for (float& v : s.data) v = rng.next_gaussian();
  return s;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Independent oracle: plain double-loop top-k, no heap, no shortcuts.
std::vector<std::pair<float, uint32_t>> naive_topk(const VectorSet& base, const float* q,
                                                   uint32_t k) {
  std::vector<std::pair<float, uint32_t>> all(base.n);
  for (uint32_t i = 0; i < base.n; ++i)
    all[i] = {distance({q, base.d}, base.row_span(i), base.metric), i};
  std::sort(all.begin(), all.end());
  all.resize(k);
  return all;
}

}  // namespace

TEST_CASE("fvecs round trip is byte-identical") {
  VectorSet s = make_set(37, 9, Metric::L2, 1);
  std::string path = temp_path("vecscan_roundtrip.fvecs");
  save_fvecs(path, s);
  VectorSet r = load_vectors(path, VectorFileFormat::Fvecs);
  CHECK(r.n == s.n);
  CHECK(r.d == s.d);
  CHECK(r.data == s.data);

  // byte-for-byte on a second save
  save_fvecs(path + ".2", r);
  std::ifstream a(path, std::ios::binary), b(path + ".2", std::ios::binary);
  std::vector<char> ba((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::vector<char> bb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(ba == bb);
  std::remove(path.c_str());
  std::remove((path + ".2").c_str());
}

TEST_CASE("load_vectors handles empty and single-record files") {
  std::string path = temp_path("vecscan_empty.fvecs");
  { std::ofstream out(path, std::ios::binary); }
  VectorSet empty = load_vectors(path, VectorFileFormat::Fvecs);
  CHECK(empty.n == 0);

  {
    std::ofstream out(path, std::ios::binary);
    int32_t d = 4;
    float zeros[4] = {0, 0, 0, 0};
    out.write(reinterpret_cast<char*>(&d), 4);
    out.write(reinterpret_cast<char*>(zeros), 16);
  }
  VectorSet one = load_vectors(path, VectorFileFormat::Fvecs);
  CHECK(one.n == 1);
  CHECK(one.d == 4);
  CHECK(one.data == std::vector<float>{0, 0, 0, 0});
  std::remove(path.c_str());
}

TEST_CASE("load_vectors rejects malformed files") {
  std::string path = temp_path("vecscan_bad.fvecs");
  {
    // two records with different dimensions
    std::ofstream out(path, std::ios::binary);
    int32_t d1 = 2, d2 = 3;
    float v[3] = {1, 2, 3};
    out.write(reinterpret_cast<char*>(&d1), 4);
    out.write(reinterpret_cast<char*>(v), 8);
    out.write(reinterpret_cast<char*>(&d2), 4);
    out.write(reinterpret_cast<char*>(v), 12);
  }
  CHECK_THROWS_AS(load_vectors(path, VectorFileFormat::Fvecs), std::runtime_error);

  {
    // truncated payload
    std::ofstream out(path, std::ios::binary);
    int32_t d = 4;
    float v[2] = {1, 2};
    out.write(reinterpret_cast<char*>(&d), 4);
    out.write(reinterpret_cast<char*>(v), 8);
  }
  CHECK_THROWS_AS(load_vectors(path, VectorFileFormat::Fvecs), std::runtime_error);

  {
    // non-positive dimension
    std::ofstream out(path, std::ios::binary);
    int32_t d = 0;
    out.write(reinterpret_cast<char*>(&d), 4);
  }
  CHECK_THROWS_AS(load_vectors(path, VectorFileFormat::Fvecs), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("bvecs widen to float") {
  std::string path = temp_path("vecscan_b.bvecs");
  {
    std::ofstream out(path, std::ios::binary);
    int32_t d = 3;
    uint8_t v[3] = {0, 128, 255};
    out.write(reinterpret_cast<char*>(&d), 4);
    out.write(reinterpret_cast<char*>(v), 3);
  }
  VectorSet s = load_vectors(path, VectorFileFormat::Bvecs);
  CHECK(s.data == std::vector<float>{0.f, 128.f, 255.f});
  std::remove(path.c_str());
}

TEST_CASE("distance basics") {
  std::vector<float> x{0, 0}, y{3, 4};
  CHECK(distance(x, x, Metric::L2) == 0.f);
  CHECK(distance(x, y, Metric::L2) == 25.f);

  std::vector<float> e1{1, 0}, e2{0, 1};
  CHECK(distance(e1, e2, Metric::Angular) == doctest::Approx(1.0));
  CHECK(distance(e1, e1, Metric::Angular) == doctest::Approx(0.0));
  CHECK(distance(e1, e2, Metric::InnerProduct) == 0.f);
  CHECK(distance(y, y, Metric::InnerProduct) == -25.f);

  std::vector<float> z{1, 2, 3};
  CHECK_THROWS_AS(distance(x, z, Metric::L2), std::invalid_argument);
}

TEST_CASE("distance symmetry for L2 and Angular") {
  SplitMix64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<float> x(8), y(8);
    for (auto& v : x) v = rng.next_gaussian();
    for (auto& v : y) v = rng.next_gaussian();
    CHECK(distance(x, y, Metric::L2) == distance(y, x, Metric::L2));
    CHECK(distance(x, y, Metric::Angular) == distance(y, x, Metric::Angular));
  }
}

TEST_CASE("normalize_all") {
  VectorSet s;
  s.n = 3;
  s.d = 2;
  s.metric = Metric::Angular;
  s.data = {3, 4, 0.6f, 0.8f, 0, 0};
  VectorSet r = normalize_all(s);
  CHECK(r.data[0] == doctest::Approx(0.6));
  CHECK(r.data[1] == doctest::Approx(0.8));
  // already-unit row untouched
  CHECK(r.data[2] == 0.6f);
  CHECK(r.data[3] == 0.8f);
  // zero row untouched and flagged
  CHECK(r.data[4] == 0.f);
  CHECK(r.zero_rows == std::vector<uint32_t>{2});

  // idempotent
  VectorSet rr = normalize_all(r);
  CHECK(rr.data == r.data);
}

TEST_CASE("brute_force_topk matches the naive double-loop oracle") {
  for (Metric metric : {Metric::L2, Metric::Angular, Metric::InnerProduct}) {
    VectorSet base = make_set(1000, 16, metric, 11);
    VectorSet qs = make_set(20, 16, metric, 12);
    GroundTruth gt = brute_force_topk(base, qs, 10);
    for (uint32_t qi = 0; qi < qs.n; ++qi) {
      auto oracle = naive_topk(base, qs.row(qi), 10);
      for (uint32_t j = 0; j < 10; ++j) {
        CHECK(gt.ids_for(qi)[j] == oracle[j].second);
        CHECK(gt.dists_for(qi)[j] == oracle[j].first);
      }
    }
  }
}

TEST_CASE("brute_force_topk edge cases") {
  VectorSet base = make_set(50, 8, Metric::L2, 3);
  VectorSet q;
  q.n = 1;
  q.d = 8;
  q.metric = Metric::L2;
  q.data.assign(base.row(17), base.row(17) + 8);

  GroundTruth gt1 = brute_force_topk(base, q, 1);
  CHECK(gt1.ids_for(0)[0] == 17);
  CHECK(gt1.dists_for(0)[0] == 0.f);

  GroundTruth gtn = brute_force_topk(base, q, base.n);
  for (uint32_t j = 1; j < base.n; ++j)
    CHECK(gtn.dists_for(0)[j] >= gtn.dists_for(0)[j - 1]);

  CHECK_THROWS_AS(brute_force_topk(base, q, base.n + 1), std::invalid_argument);
}

TEST_CASE("brute force tie-break prefers the smaller id") {
  VectorSet base;
  base.n = 4;
  base.d = 1;
  base.metric = Metric::L2;
  base.data = {5.f, 1.f, 1.f, 5.f};  // ids 1 and 2 tie, ids 0 and 3 tie
  VectorSet q;
  q.n = 1;
  q.d = 1;
  q.metric = Metric::L2;
  q.data = {1.f};
  GroundTruth gt = brute_force_topk(base, q, 4);
  CHECK(gt.ids_for(0)[0] == 1);
  CHECK(gt.ids_for(0)[1] == 2);
  CHECK(gt.ids_for(0)[2] == 0);
  CHECK(gt.ids_for(0)[3] == 3);
}

TEST_CASE("ground truth file round trip") {
  VectorSet base = make_set(100, 4, Metric::L2, 5);
  VectorSet qs = make_set(7, 4, Metric::L2, 6);
  GroundTruth gt = brute_force_topk(base, qs, 5);
  std::string ids = temp_path("vecscan_gt.ivecs"), ds = temp_path("vecscan_gt.fvecs");
  save_ground_truth(gt, ids, ds);
  GroundTruth r = load_ground_truth(ids, ds);
  CHECK(r.ids == gt.ids);
  CHECK(r.dists == gt.dists);
  std::remove(ids.c_str());
  std::remove(ds.c_str());
}
