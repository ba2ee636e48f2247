// Acceptance checks. Each criterion prints one line:
//   criterion <n>: PASS|FAIL  <details>
// Usage: epann_acceptance [n ...]   (no arguments runs all eleven)

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "epann/bench.hpp"
#include "epann/clustering.hpp"
#include "epann/datagen.hpp"
#include "epann/graph.hpp"
#include "epann/hardcase.hpp"
#include "epann/monotonicity.hpp"
#include "epann/search.hpp"
#include "oracles.hpp"

using namespace epann;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

void log(const std::string& s) { std::cerr << "  [" << s << "]" << std::endl; }

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

NavGraph as_graph(const oracle::Adjacency& adj) {
  std::size_t R = 1;
  for (const auto& row : adj) R = std::max(R, row.size());
  return NavGraph(adj, static_cast<std::uint32_t>(R), 0);
}

// 1 ------------------------------------------------------------------------

Outcome telescoping() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> dim_of(16, 128), len_of(2, 50);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int c = 0; c < 10000; ++c) {
    const std::size_t dim = dim_of(rng), len = len_of(rng);
    const auto pts = oracle::random_set(60, dim, rng);
    std::uniform_int_distribution<NodeId> node(0, 59);
    std::vector<NodeId> path(len);
    for (auto& v : path) v = node(rng);
    const NodeId target = node(rng);
    path.back() = target;
    const auto prof = r_profile(pts, path, target);
    const double ds = oracle::dist(pts[path.front()], pts[target]);
    const double err = std::abs(prof.sum() - ds) / std::max(1.0, ds);
    worst = std::max(worst, err);
    bad += err > 1e-4;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0,
          "10000 paths, worst relative error " + fmt(worst) + ", " + fmt(secs, 3) + " s (limit 10 s)"};
}

// 2 ------------------------------------------------------------------------

Outcome min_b_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1002);
  std::size_t pairs = 0, mismatches = 0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 2 + c % 11;
    const auto pts = oracle::random_set(n, 1 + c % 6, rng);
    const auto adj = oracle::random_digraph(n, 0.15 + 0.05 * (c % 10), rng);
    const auto g = as_graph(adj);
    for (NodeId s = 0; s < n; ++s)
      for (NodeId t = 0; t < n; ++t) {
        const auto r = min_b(g, pts, s, t);
        const int ref = oracle::min_b_enumerate(adj, pts, s, t);
        ++pairs;
        if (r.reachable != (ref >= 0) || (ref >= 0 && static_cast<int>(r.b) != ref)) ++mismatches;
      }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0, "200 graphs, " + std::to_string(pairs) + " ordered pairs, " +
                                              std::to_string(mismatches) + " mismatches, " + fmt(secs, 3) +
                                              " s (limit 60 s)"};
}

// 3 ------------------------------------------------------------------------

Outcome full_queue_exact() {
  MixtureSpec ms;
  ms.n = 1000;
  ms.dim = 32;
  ms.seed = 3;
  const auto ds = gaussian_mixture(ms, 100);
  const auto g = build_graph(ds.base, BuildParams::nsg_defaults());
  SearchParams p;
  p.queue_len = ds.base.size();
  std::vector<NeighborList> res;
  for (std::size_t i = 0; i < ds.queries.size(); ++i)
    res.push_back(greedy_search(g, ds.base, g.default_entry(), ds.queries[i], p).topk);
  const double r = recall_at_k(res, brute_force_knn_batch(ds.queries, ds.base, 10), 10);
  return {r == 1.0, "recall@10 at L = N over 100 queries: " + fmt(r)};
}

// 4 ------------------------------------------------------------------------

Outcome hand_trace() {
  const VectorSet pts(1, {0, 1, 2, 3});
  const NavGraph g({{1}, {0, 2}, {1, 3}, {2}}, 2, 0);
  const std::vector<float> q{3};
  SearchParams p;
  p.queue_len = 2;
  p.k = 1;
  p.capture_trace = true;
  const auto r = greedy_search(g, pts, 0, q, p);
  const std::vector<NodeId> expect{0, 1, 2, 3};
  std::string got;
  for (NodeId v : r.trace->expanded) got += std::string(1, static_cast<char>('a' + v));
  return {r.trace->expanded == expect, "expanded order " + got + " (expected abcd)"};
}

// 5, 6 ---------------------------------------------------------------------

Outcome hard_instance(Algorithm algo) {
  const auto t0 = Clock::now();
  const auto inst = gen_hard_instance(HardInstanceSpec{});
  BuildParams bp = algo == Algorithm::vamana ? BuildParams::vamana_defaults() : BuildParams::nsg_defaults();
  const auto g = build_graph(inst.base, bp);
  const double build_secs = seconds_since(t0);
  log("built " + to_string(algo) + " in " + fmt(build_secs, 4) + " s");

  // Baseline: fixed central entry.
  SweepConfig cfg;
  cfg.dataset = "hard";
  cfg.time_queries = false;
  cfg.L_list = {10, 20, 50, 100, 200, 500, 1000};
  const auto base_recs = sweep(g, inst.base, {}, inst.queries, inst.gt, cfg);
  double max_base_recall = 0.0;
  for (const auto& r : base_recs) max_base_recall = std::max(max_base_recall, r.recall);

  std::size_t base_L = 0;
  double base_qps = 0.0;
  for (std::size_t L : {1000, 2000, 5000, 10000, 20000, 50000, 100000}) {
    if (L > inst.base.size()) L = inst.base.size();
    SweepConfig one = cfg;
    one.L_list = {L};
    one.time_queries = true;
    one.repeats = 3;
    const auto rec = sweep(g, inst.base, {}, inst.queries, inst.gt, one).at(0);
    log("baseline L=" + std::to_string(L) + " recall " + fmt(rec.recall) + " qps " + fmt(rec.qps));
    if (rec.recall > 0.0) {
      base_L = L;
      base_qps = rec.qps;
      break;
    }
    if (L == inst.base.size()) break;
  }

  // Adaptive entries.
  const std::size_t K_max = algo == Algorithm::vamana ? 512 : 256;
  std::map<std::size_t, EntryPointIndex> eps;
  for (std::size_t K = 2; K <= K_max; K *= 2) {
    EntryBuildOptions o;
    o.K = K;
    o.max_points_per_center = 256;
    eps[K] = build_entry_index(inst.base, o).index;
  }
  SweepConfig acfg = cfg;
  acfg.L_list = {10};
  acfg.time_queries = true;
  acfg.repeats = 5;
  const auto recs = sweep(g, inst.base, eps, inst.queries, inst.gt, acfg);
  std::size_t first_K = 0;
  double best_qps = 0.0;
  for (const auto& r : recs) {
    if (r.K == 1) continue;
    if (r.recall == 1.0 && first_K == 0) first_K = r.K;
    if (r.recall > 0.0) best_qps = std::max(best_qps, r.qps);
  }
  const double secs = seconds_since(t0);

  std::string d = to_string(algo) + ": baseline max recall " + fmt(max_base_recall) + " over L <= 1000";
  d += base_L ? ", first non-zero at L = " + std::to_string(base_L) : ", never non-zero";
  d += "; smallest K with recall 1.0 at L = 10: " + (first_K ? std::to_string(first_K) : std::string("none"));
  if (algo == Algorithm::nsg) {
    const double ratio = base_qps > 0 ? best_qps / base_qps : 0.0;
    d += "; qps " + fmt(best_qps) + " vs " + fmt(base_qps) + " = " + fmt(ratio) + "x (need >= 10x)";
    d += "; " + fmt(secs, 4) + " s (limit 1800 s)";
    return {max_base_recall == 0.0 && first_K != 0 && ratio >= 10.0 && secs < 1800.0, d};
  }
  d += "; " + fmt(secs, 4) + " s";
  return {first_K != 0 && first_K <= 512, d};
}

// 7 ------------------------------------------------------------------------

Outcome speedup_trend() {
  const std::vector<std::size_t> Ks{4, 8, 16, 32, 64, 128, 256};
  std::size_t wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    MixtureSpec ms;
    ms.n = 100000;
    ms.dim = 128;
    ms.components = 10;
    ms.seed = seed;
    const auto ds = gaussian_mixture(ms, 1000);
    const auto gt = brute_force_knn_batch(ds.queries, ds.base, 10);
    const auto g = build_graph(ds.base, BuildParams::nsg_defaults());
    std::map<std::size_t, EntryPointIndex> eps;
    for (std::size_t K : Ks) {
      EntryBuildOptions o;
      o.K = K;
      o.seed = seed;
      o.max_points_per_center = 256;
      eps[K] = build_entry_index(ds.base, o).index;
    }
    SweepConfig cfg;
    cfg.dataset = "gauss" + std::to_string(seed);
    cfg.L_list = {10, 12, 14, 16, 20, 24, 28, 32, 40, 48, 64, 96, 128};
    cfg.repeats = 5;
    const auto recs = sweep(g, ds.base, eps, ds.queries, gt, cfg);
    const double fixed = best_qps_at_recall(recs, 0.90, false);
    const double adaptive = best_qps_at_recall(recs, 0.90, true);
    const double ratio = fixed > 0 ? adaptive / fixed : 0.0;
    wins += ratio >= 1.2;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " + fmt(ratio, 3) + "x";
    log("seed " + std::to_string(seed) + ": fixed " + fmt(fixed) + " qps, adaptive " + fmt(adaptive) + " qps, " +
        fmt(seconds_since(t0), 4) + " s");
  }
  return {wins >= 4, "adaptive/fixed qps at recall >= 0.90: " + detail + " (need >= 1.2x on 4 of 5)"};
}

// 8 ------------------------------------------------------------------------

Outcome k_sensitivity() {
  DeepLikeSpec spec;
  spec.n = 100000;
  spec.seed = 8;
  const auto ds = deep_like(spec, 1000);
  const auto gt = brute_force_knn_batch(ds.queries, ds.base, 10);
  const auto g = build_graph(ds.base, BuildParams::nsg_defaults());
  std::map<std::size_t, EntryPointIndex> eps;
  for (std::size_t K = 4; K <= 444; K += 40) {
    EntryBuildOptions o;
    o.K = K;
    o.max_points_per_center = 256;
    eps[K] = build_entry_index(ds.base, o).index;
  }
  SweepConfig cfg;
  cfg.dataset = "deep-like";
  cfg.L_list = {32};
  cfg.repeats = 5;
  const auto recs = sweep(g, ds.base, eps, ds.queries, gt, cfg);
  double lo = 1.0, hi = 0.0, best = -1.0;
  std::size_t best_K = 0;
  std::string row;
  for (const auto& r : recs) {
    if (r.K == 1) continue;
    lo = std::min(lo, r.recall);
    hi = std::max(hi, r.recall);
    if (r.qps > best) {
      best = r.qps;
      best_K = r.K;
    }
    log("K=" + std::to_string(r.K) + " recall " + fmt(r.recall) + " qps " + fmt(r.qps));
  }
  const bool interior = best_K != 4 && best_K != 444;
  return {hi - lo <= 0.05 && interior, "recall range [" + fmt(lo) + ", " + fmt(hi) + "] spread " + fmt(hi - lo) +
                                           " (limit 0.05); max-qps K = " + std::to_string(best_K) +
                                           (interior ? " (interior)" : " (at an end)")};
}

// 9 ------------------------------------------------------------------------

Outcome memory_overhead() {
  // Graph size of an R = 32 graph on 100k nodes; index vectors at d = 96.
  const std::uint64_t graph = graph_file_bytes(100000, 32);
  const std::uint64_t dim = 96;
  std::size_t largest_ok = 0;
  double worst = 0.0;
  for (std::size_t K = 1; K <= 1024; ++K) {
    const double ratio = static_cast<double>(entry_index_bytes(K, dim)) / static_cast<double>(graph);
    worst = std::max(worst, ratio);
    if (ratio <= 0.002) largest_ok = K;
  }
  // Cross-check the size formula against a real encoding.
  EntryPointIndex e{std::vector<NodeId>(1024, 0), VectorSet(dim, std::vector<float>(1024 * dim, 0.0f))};
  const bool formula_ok = encode_entry_index(e).size() == entry_index_bytes(1024, dim);
  return {worst <= 0.002 && formula_ok, "graph " + std::to_string(graph) + " bytes; ratio at K = 1024, d = 96 is " +
                                            fmt(100.0 * worst, 3) + "% (limit 0.2%); largest passing K = " +
                                            std::to_string(largest_ok)};
}

// 10 -----------------------------------------------------------------------

Outcome theorem_consistency() {
  std::size_t tagged = 0, violations = 0, unordered = 0, instances = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    MixtureSpec ms;
    ms.n = 1000;
    ms.dim = 8;
    ms.components = 5;
    ms.seed = seed;
    const auto ds = gaussian_mixture(ms, 100);
    const auto g = build_graph(ds.base, BuildParams::nsg_defaults());
    CertifyOptions co;
    co.force_exact = true;
    const auto cert = certify_bmsnet(g, ds.base, co);
    EntryBuildOptions eo;
    eo.K = 16;
    const auto eps = build_entry_index(ds.base, eo).index;
    std::vector<NodeId> gt;
    for (const auto& l : brute_force_knn_batch(ds.queries, ds.base, 1)) gt.push_back(l.ids[0]);
    TheoremInputs in;
    in.graph = &g;
    in.base = &ds.base;
    in.queries = &ds.queries;
    in.eps = &eps;
    in.gt = gt;
    in.B = cert.B;
    const auto rep = theorem_quantities(in);
    ++instances;
    for (const auto& q : rep.queries) {
      if (q.condition == Condition::neither || !q.bound_holds) continue;
      ++tagged;
      violations += !*q.bound_holds;
    }
    unordered += !rep.all_cells_ordered();
    log("seed " + std::to_string(seed) + ": exact B = " + std::to_string(cert.B) + ", (i) " +
        std::to_string(rep.count(Condition::i)) + ", (ii) " + std::to_string(rep.count(Condition::ii)));
  }
  return {tagged > 0 && violations == 0 && unordered == 0,
          std::to_string(instances) + " instances, " + std::to_string(tagged) + " tagged queries, " +
              std::to_string(violations) + " bound violations, " + std::to_string(unordered) +
              " instances with a cell ordering failure"};
}

// 11 -----------------------------------------------------------------------

Outcome property_suites() {
  const std::string cmd = std::string("\"") + EPANN_TESTS_BINARY + "\" -ts=property -m > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, std::string("property suites (1000 cases each) ") + (rc == 0 ? "passed" : "failed")};
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_num_threads(1);
  const std::map<int, std::function<Outcome()>> criteria{
      {1, telescoping},
      {2, min_b_equivalence},
      {3, full_queue_exact},
      {4, hand_trace},
      {5, [] { return hard_instance(Algorithm::nsg); }},
      {6, [] { return hard_instance(Algorithm::vamana); }},
      {7, speedup_trend},
      {8, k_sensitivity},
      {9, memory_overhead},
      {10, theorem_consistency},
      {11, property_suites},
  };
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.push_back(std::atoi(argv[i]));
  if (chosen.empty())
    for (const auto& [n, f] : criteria) chosen.push_back(n);

  int failed = 0;
  for (int n : chosen) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << n << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
