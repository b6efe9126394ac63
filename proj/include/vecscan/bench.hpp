#pragma once

#include <iosfwd>

#include "vecscan/engine.hpp"

namespace vecscan {

struct BenchConfig {
  SearchRequest request;
  uint32_t workers = 1;
  uint64_t seed = 0;
};

struct BenchReport {
  double recall = 0.0;
  double mean_latency_us = 0.0;
  double median_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double qps = 0.0;
  double mean_nprob = 0.0;
  double mean_points_scanned = 0.0;
  uint32_t k = 0;
  uint32_t workers = 1;
  uint64_t seed = 0;
  std::string config_echo;
};

// Mean over queries of |returned ids ∩ true top-k| / k.
double recall_at_k(const std::vector<std::vector<uint32_t>>& results, const GroundTruth& gt,
                   uint32_t k);

// One query at a time per worker; each worker owns an independent stride of
// the query stream. Worker count changes throughput fields only.
BenchReport run_bench(const Index& index, const VectorSet& queries, const GroundTruth& gt,
                      const BenchConfig& config);

void print_report(std::ostream& os, const BenchReport& report);
void write_report_csv(const std::string& path, const BenchReport& report);

}  // namespace vecscan
