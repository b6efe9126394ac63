#include "vecscan/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace vecscan {

double recall_at_k(const std::vector<std::vector<uint32_t>>& results, const GroundTruth& gt,
                   uint32_t k) {
  if (results.size() != gt.nq) throw std::invalid_argument("recall_at_k: result count mismatch");
  if (k > gt.k) throw std::invalid_argument("recall_at_k: ground truth has fewer than k entries");
  double total = 0.0;
  for (uint32_t q = 0; q < gt.nq; ++q) {
    const uint32_t* truth = gt.ids_for(q);
    uint32_t hits = 0;
    for (uint32_t id : results[q])
      for (uint32_t j = 0; j < k; ++j)
        if (truth[j] == id) { hits++; break; }
    total += double(hits) / double(k);
  }
  return total / double(gt.nq);
}

BenchReport run_bench(const Index& index, const VectorSet& queries, const GroundTruth& gt,
                      const BenchConfig& config) {
  const uint32_t nq = queries.n;
  const uint32_t workers = std::max(1u, config.workers);
  std::vector<std::vector<uint32_t>> results(nq);
  std::vector<double> latency_us(nq);
  std::vector<double> nprobs(nq), points(nq);

  auto t0 = std::chrono::steady_clock::now();
  auto stream = [&](uint32_t w) {
    for (uint32_t qi = w; qi < nq; qi += workers) {
      auto q0 = std::chrono::steady_clock::now();
      SearchResult res = search(index, queries.row_span(qi), config.request);
      auto q1 = std::chrono::steady_clock::now();
      latency_us[qi] = std::chrono::duration<double, std::micro>(q1 - q0).count();
      nprobs[qi] = res.diag.clusters_probed + res.diag.clusters_pruned;
      points[qi] = double(res.diag.points_scanned);
      results[qi].reserve(res.neighbors.size());
      for (const Neighbor& nb : res.neighbors) results[qi].push_back(nb.id);
    }
  };
  if (workers == 1) {
    stream(0);
  } else {
    std::vector<std::thread> pool;
    for (uint32_t w = 0; w < workers; ++w) pool.emplace_back(stream, w);
    for (std::thread& t : pool) t.join();
  }
  auto t1 = std::chrono::steady_clock::now();
  double wall_s = std::chrono::duration<double>(t1 - t0).count();

  BenchReport rep;
  rep.k = config.request.k;
  rep.workers = workers;
  rep.seed = config.seed;
  rep.recall = recall_at_k(results, gt, config.request.k);
  rep.qps = wall_s > 0 ? double(nq) / wall_s : 0.0;

  std::vector<double> sorted = latency_us;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (double v : sorted) sum += v;
  rep.mean_latency_us = nq ? sum / nq : 0;
  rep.median_latency_us = nq ? sorted[nq / 2] : 0;
  rep.p99_latency_us = nq ? sorted[std::min<size_t>(nq - 1, size_t(0.99 * nq))] : 0;

  double np = 0, pt = 0;
  for (uint32_t i = 0; i < nq; ++i) {
    np += nprobs[i];
    pt += points[i];
  }
  rep.mean_nprob = nq ? np / nq : 0;
  rep.mean_points_scanned = nq ? pt / nq : 0;

  std::ostringstream echo;
  echo << "k=" << config.request.k << " nprob=" << config.request.nprob
       << " reorder=" << config.request.reorder
       << " adaptive=" << (config.request.adaptive ? "on" : "off")
       << " theta=" << config.request.theta
       << " graph=" << (config.request.use_graph ? "on" : "off");
  rep.config_echo = echo.str();
  return rep;
}

void print_report(std::ostream& os, const BenchReport& r) {
  os << std::fixed << std::setprecision(4);
  os << "config    : " << r.config_echo << " workers=" << r.workers << " seed=" << r.seed << "\n";
  os << "recall@" << r.k << " : " << r.recall << "\n";
  os << std::setprecision(1);
  os << "latency us: mean " << r.mean_latency_us << "  median " << r.median_latency_us
     << "  p99 " << r.p99_latency_us << "\n";
  os << "qps       : " << r.qps << "\n";
  os << "mean nprob: " << r.mean_nprob << "  mean points scanned: " << r.mean_points_scanned
     << "\n";
}

void write_report_csv(const std::string& path, const BenchReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "recall,mean_latency_us,median_latency_us,p99_latency_us,qps,mean_nprob,"
         "mean_points_scanned,k,workers,seed,config\n";
  out << std::setprecision(10) << r.recall << ',' << r.mean_latency_us << ','
      << r.median_latency_us << ',' << r.p99_latency_us << ',' << r.qps << ',' << r.mean_nprob
      << ',' << r.mean_points_scanned << ',' << r.k << ',' << r.workers << ',' << r.seed << ",\""
      << r.config_echo << "\"\n";
}

}  // namespace vecscan
