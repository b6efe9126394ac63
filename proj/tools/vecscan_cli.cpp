// Benchmark harness and index tooling for the vecscan library.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vecscan/bench.hpp"
#include "vecscan/prunelab.hpp"

using namespace vecscan;

namespace {

VectorSet load_any(const std::string& path, Metric metric) {
  return load_vectors(path, format_from_path(path), metric);
}

bool flag_on(const std::string& v, const char* name) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw CLI::ValidationError(std::string(name) + " must be 'on' or 'off'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vecscan: partition-based approximate nearest neighbor search"};
  app.require_subcommand(1);

  std::string base, queries, gt_prefix, index_path, out, metric_str = "l2";
  std::string adaptive_str = "off", graph_str = "off", filter_str = "off";
  std::string residuals_str = "raw_mean", strategy_str = "annulus", sweep_str;
  uint32_t k = 10, nprob = 16, reorder = 100, workers = 1, clusters = 0, dprime = 2;
  uint32_t graph_degree = 16, kmeans_iters = 25, sign_h = 32, n_strips = 16, hull_r = 3;
  uint32_t nprob_min = 0, nprob_max = 0, reorder_min = 0, reorder_max = 0;
  float theta = 0.f, filter_threshold = 0.95f, train_theta = 0.2f;
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "global 64-bit seed");
    cmd->add_option("--out", out, "output path");
  };

  CLI::App* cmd_gt = app.add_subcommand("gt", "exact ground truth via exhaustive search");
  cmd_gt->add_option("--base", base)->required();
  cmd_gt->add_option("--queries", queries)->required();
  cmd_gt->add_option("--metric", metric_str, "l2|angular|ip");
  cmd_gt->add_option("--k", k);
  add_common(cmd_gt);

  CLI::App* cmd_build = app.add_subcommand("build", "construct an index");
  cmd_build->add_option("--base", base)->required();
  cmd_build->add_option("--metric", metric_str, "l2|angular|ip");
  cmd_build->add_option("--clusters", clusters, "IVF cluster count L (0 = sqrt(n))");
  cmd_build->add_option("--dprime", dprime, "PQ subspace dimension");
  cmd_build->add_option("--graph", graph_str, "on|off: intra-cluster graphs");
  cmd_build->add_option("--graph-degree", graph_degree);
  cmd_build->add_option("--filter", filter_str, "on|off: component filtration");
  cmd_build->add_option("--filter-threshold", filter_threshold);
  cmd_build->add_option("--residuals", residuals_str, "raw_mean|normalized|none");
  cmd_build->add_option("--kmeans-iters", kmeans_iters);
  add_common(cmd_build);

  CLI::App* cmd_search = app.add_subcommand("search", "query an index");
  cmd_search->add_option("--index", index_path)->required();
  cmd_search->add_option("--queries", queries)->required();
  cmd_search->add_option("--k", k);
  cmd_search->add_option("--nprob", nprob);
  cmd_search->add_option("--reorder", reorder);
  cmd_search->add_option("--adaptive", adaptive_str, "on|off");
  cmd_search->add_option("--graph", graph_str, "on|off");
  cmd_search->add_option("--theta", theta, "cluster prune threshold");
  add_common(cmd_search);

  CLI::App* cmd_train = app.add_subcommand("train", "fit the adaptive models");
  cmd_train->add_option("--index", index_path)->required();
  cmd_train->add_option("--queries", queries, "training queries")->required();
  cmd_train->add_option("--k", k);
  cmd_train->add_option("--nprob-min", nprob_min);
  cmd_train->add_option("--nprob-max", nprob_max);
  cmd_train->add_option("--reorder-min", reorder_min);
  cmd_train->add_option("--reorder-max", reorder_max);
  cmd_train->add_option("--theta", train_theta);
  add_common(cmd_train);

  CLI::App* cmd_bench = app.add_subcommand("bench", "recall/latency benchmark, batch size 1");
  cmd_bench->add_option("--index", index_path)->required();
  cmd_bench->add_option("--queries", queries)->required();
  cmd_bench->add_option("--gt", gt_prefix, "ground-truth path prefix")->required();
  cmd_bench->add_option("--k", k);
  cmd_bench->add_option("--nprob", nprob);
  cmd_bench->add_option("--reorder", reorder);
  cmd_bench->add_option("--adaptive", adaptive_str, "on|off");
  cmd_bench->add_option("--graph", graph_str, "on|off");
  cmd_bench->add_option("--theta", theta);
  cmd_bench->add_option("--workers", workers);
  add_common(cmd_bench);

  CLI::App* cmd_dims = app.add_subcommand("dims", "per-dimension uninformative fractions");
  cmd_dims->add_option("--base", base)->required();
  cmd_dims->add_option("--metric", metric_str);
  add_common(cmd_dims);

  CLI::App* cmd_lab = app.add_subcommand("lab", "pruning-strategy measurements");
  cmd_lab->add_option("--index", index_path)->required();
  cmd_lab->add_option("--queries", queries)->required();
  cmd_lab->add_option("--gt", gt_prefix)->required();
  cmd_lab->add_option("--strategy", strategy_str, "none|sign|strips|hull|annulus");
  cmd_lab->add_option("--nprob", nprob);
  cmd_lab->add_option("--k", k);
  cmd_lab->add_option("--sweep", sweep_str, "comma-separated parameter values");
  cmd_lab->add_option("--sign-h", sign_h);
  cmd_lab->add_option("--strips", n_strips);
  cmd_lab->add_option("--hull-r", hull_r);
  add_common(cmd_lab);

  CLI11_PARSE(app, argc, argv);

  try {
    Metric metric = metric_from_string(metric_str);

    if (cmd_gt->parsed()) {
      if (out.empty()) throw std::runtime_error("gt: --out prefix required");
      VectorSet b = load_any(base, metric);
      VectorSet q = load_any(queries, metric);
      GroundTruth gt = brute_force_topk(b, q, k);
      save_ground_truth(gt, out + ".ivecs", out + ".fvecs");
      std::cout << "wrote " << out << ".ivecs / .fvecs for " << gt.nq << " queries, k=" << gt.k
                << "\n";
    } else if (cmd_build->parsed()) {
      if (out.empty()) throw std::runtime_error("build: --out index path required");
      VectorSet b = load_any(base, metric);
      BuildParams params;
      params.clusters = clusters;
      params.dprime = dprime;
      params.graph = flag_on(graph_str, "--graph");
      params.graph_degree = graph_degree;
      params.filtration = flag_on(filter_str, "--filter");
      params.filter_threshold = filter_threshold;
      params.kmeans_iters = kmeans_iters;
      params.seed = seed;
      if (residuals_str == "raw_mean") params.residual_mode = ResidualMode::RawMean;
      else if (residuals_str == "normalized") params.residual_mode = ResidualMode::Normalized;
      else if (residuals_str == "none") params.residual_mode = ResidualMode::None;
      else throw std::runtime_error("--residuals must be raw_mean|normalized|none");
      Index index = build_index(b, params);
      save_index(index, out);
      std::cout << "built index: n=" << index.n << " d=" << index.d << " L=" << index.L()
                << " m=" << index.codebooks.m << " -> " << out << "\n";
    } else if (cmd_search->parsed()) {
      Index index = load_index(index_path);
      VectorSet q = load_any(queries, index.metric);
      SearchRequest req;
      req.k = k;
      req.nprob = nprob;
      req.reorder = reorder;
      req.adaptive = flag_on(adaptive_str, "--adaptive");
      req.use_graph = flag_on(graph_str, "--graph");
      req.theta = theta;
      GroundTruth results;
      results.nq = q.n;
      results.k = k;
      results.ids.assign(size_t(q.n) * k, 0);
      results.dists.assign(size_t(q.n) * k, 0.f);
      for (uint32_t qi = 0; qi < q.n; ++qi) {
        SearchResult res = search(index, q.row_span(qi), req);
        for (size_t j = 0; j < res.neighbors.size() && j < k; ++j) {
          results.ids[size_t(qi) * k + j] = res.neighbors[j].id;
          results.dists[size_t(qi) * k + j] = res.neighbors[j].dist;
        }
        if (qi < 5) {
          std::cout << "q" << qi << ":";
          for (const Neighbor& nb : res.neighbors) std::cout << " " << nb.id << "(" << nb.dist << ")";
          std::cout << "\n";
        }
      }
      if (!out.empty()) {
        save_ground_truth(results, out + ".ivecs", out + ".fvecs");
        std::cout << "wrote " << out << ".ivecs / .fvecs\n";
      }
    } else if (cmd_train->parsed()) {
      Index index = load_index(index_path);
      VectorSet q = load_any(queries, index.metric);
      TrainParams params;
      params.k = k;
      params.nprob_min = nprob_min;
      params.nprob_max = nprob_max;
      params.reorder_min = reorder_min;
      params.reorder_max = reorder_max;
      params.theta = train_theta;
      params.seed = seed;
      train_adaptive(index, q, params);
      const std::string dest = out.empty() ? index_path : out;
      save_index(index, dest);
      std::cout << "trained adaptive models (nprob " << index.models.params.nprob_min << ".."
                << index.models.params.nprob_max << ", reorder "
                << index.models.params.reorder_min << ".." << index.models.params.reorder_max
                << ") -> " << dest << "\n";
    } else if (cmd_bench->parsed()) {
      Index index = load_index(index_path);
      VectorSet q = load_any(queries, index.metric);
      GroundTruth gt = load_ground_truth(gt_prefix + ".ivecs", gt_prefix + ".fvecs");
      BenchConfig cfg;
      cfg.request.k = k;
      cfg.request.nprob = nprob;
      cfg.request.reorder = reorder;
      cfg.request.adaptive = flag_on(adaptive_str, "--adaptive");
      cfg.request.use_graph = flag_on(graph_str, "--graph");
      cfg.request.theta = theta;
      cfg.workers = workers;
      cfg.seed = seed;
      BenchReport rep = run_bench(index, q, gt, cfg);
      print_report(std::cout, rep);
      if (!out.empty()) {
        write_report_csv(out, rep);
        std::cout << "wrote " << out << "\n";
      }
    } else if (cmd_dims->parsed()) {
      VectorSet b = load_any(base, metric);
      std::vector<float> fractions = compute_dim_stats(b);
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!out.empty()) {
        file.open(out);
        if (!file) throw std::runtime_error("cannot open " + out);
        os = &file;
      }
      (*os) << "dimension,fraction\n";
      for (size_t j = 0; j < fractions.size(); ++j) (*os) << j << ',' << fractions[j] << '\n';
    } else if (cmd_lab->parsed()) {
      Index index = load_index(index_path);
      VectorSet q = load_any(queries, index.metric);
      GroundTruth gt = load_ground_truth(gt_prefix + ".ivecs", gt_prefix + ".fvecs");
      LabConfig cfg;
      cfg.strategy = lab_strategy_from_string(strategy_str);
      cfg.nprob = nprob;
      cfg.k = k;
      cfg.sign_h = sign_h;
      cfg.n_strips = n_strips;
      cfg.hull_r = hull_r;
      cfg.seed = seed;
      if (!sweep_str.empty()) {
        std::stringstream ss(sweep_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.sweep.push_back(std::stof(tok));
      }
      std::vector<LabReportRow> rows = measure_prune_stats(index, q, gt, cfg);
      for (const LabReportRow& r : rows)
        std::cout << "param=" << r.param << " pruned=" << r.pruned_fraction
                  << " recall=" << r.recall << " avoided/query=" << r.evals_avoided << "\n";
      if (!out.empty()) {
        write_lab_csv(out, rows);
        std::cout << "wrote " << out << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
