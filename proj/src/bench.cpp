#include "epann/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "epann/errors.hpp"
#include "epann/search.hpp"

namespace epann {

double recall_at_k(std::span<const NeighborList> results, std::span<const NeighborList> gt, std::size_t k) {
  if (k == 0) throw UsageError("recall_at_k: k must be positive");
  if (results.size() != gt.size()) throw UsageError("recall_at_k: result and ground-truth counts differ");
  if (gt.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].ids.size() < k) throw UsageError("recall_at_k: ground truth has fewer than k ids");
    const std::unordered_set<NodeId> truth(gt[i].ids.begin(), gt[i].ids.begin() + static_cast<std::ptrdiff_t>(k));
    const std::size_t m = std::min(k, results[i].ids.size());
    std::unordered_set<NodeId> got(results[i].ids.begin(), results[i].ids.begin() + static_cast<std::ptrdiff_t>(m));
    std::size_t hit = 0;
    for (NodeId id : got) hit += truth.count(id);
    total += static_cast<double>(hit) / static_cast<double>(k);
  }
  return total / static_cast<double>(gt.size());
}

QpsMeasurement measure_qps(std::size_t n_queries, const QueryRunner& runner, int threads, int repeats) {
  if (repeats < 1) throw UsageError("measure_qps: repeats must be >= 1");
  if (threads < 1) throw UsageError("measure_qps: threads must be >= 1");
  auto pass = [&] {
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_queries); ++i)
      runner(static_cast<std::size_t>(i), static_cast<std::size_t>(omp_get_thread_num()));
  };
  pass();  // warm-up
  QpsMeasurement m;
  double sum_qps = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    pass();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.seconds.push_back(s);
    sum_qps += static_cast<double>(n_queries) / std::max(s, 1e-12);
  }
  m.qps = sum_qps / repeats;
  return m;
}

std::vector<BenchRecord> sweep(const NavGraph& g, const VectorSet& base,
                               const std::map<std::size_t, EntryPointIndex>& eps_per_K, const VectorSet& queries,
                               std::span<const NeighborList> gt, const SweepConfig& cfg) {
  if (gt.size() != queries.size()) throw UsageError("sweep: one ground-truth list per query required");
  std::vector<std::size_t> Ks{1};
  for (const auto& [K, eps] : eps_per_K) {
    if (K == 1) continue;
    if (eps.size() != K) throw UsageError("sweep: entry index for K=" + std::to_string(K) + " has " +
                                          std::to_string(eps.size()) + " candidates");
    Ks.push_back(K);
  }
  const std::string algo = g.build_meta().value("algorithm", "unknown");
  const int workers = std::max(cfg.threads, 1);
  std::vector<SearchScratch> scratch(static_cast<std::size_t>(workers));

  std::vector<BenchRecord> out;
  for (std::size_t K : Ks) {
    const EntryPointIndex* eps = K == 1 ? nullptr : &eps_per_K.at(K);
    for (std::size_t L : cfg.L_list) {
      SearchParams p;
      p.queue_len = L;
      p.k = cfg.k;
      auto run = [&](std::size_t qi, std::size_t w) {
        return eps ? adaptive_search(g, base, *eps, queries[qi], p, scratch[w])
                   : greedy_search(g, base, g.default_entry(), queries[qi], p, scratch[w]);
      };

      // Untimed pass: quality and work counters.
      std::vector<NeighborList> results(queries.size());
      std::vector<std::size_t> hops(queries.size()), evals(queries.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i) {
        const auto qi = static_cast<std::size_t>(i);
        auto r = run(qi, static_cast<std::size_t>(omp_get_thread_num()));
        hops[qi] = r.hops;
        evals[qi] = r.dist_evals;
        results[qi] = std::move(r.topk);
      }

      BenchRecord rec;
      rec.dataset = cfg.dataset;
      rec.algorithm = algo;
      rec.K = K;
      rec.L = L;
      rec.k = cfg.k;
      rec.recall = recall_at_k(results, gt, cfg.k);
      const double nq = std::max<double>(1.0, static_cast<double>(queries.size()));
      rec.mean_hops = static_cast<double>(std::accumulate(hops.begin(), hops.end(), std::size_t{0})) / nq;
      rec.mean_dist_evals = static_cast<double>(std::accumulate(evals.begin(), evals.end(), std::size_t{0})) / nq;
      rec.threads = workers;
      rec.repeats = cfg.repeats;
      if (cfg.time_queries) {
        std::vector<std::size_t> sink(static_cast<std::size_t>(workers), 0);
        rec.qps = measure_qps(queries.size(), [&](std::size_t qi, std::size_t w) { sink[w] += run(qi, w).hops; },
                              workers, cfg.repeats)
                      .qps;
      }
      out.push_back(rec);
    }
  }
  return out;
}

double best_qps_at_recall(std::span<const BenchRecord> records, double min_recall, bool adaptive) {
  double best = 0.0;
  for (const auto& r : records)
    if ((r.K != 1) == adaptive && r.recall >= min_recall) best = std::max(best, r.qps);
  return best;
}

std::size_t first_nonzero_L(std::span<const BenchRecord> records, std::size_t K) {
  std::size_t best = 0;
  for (const auto& r : records)
    if (r.K == K && r.recall > 0.0 && (best == 0 || r.L < best)) best = r.L;
  return best;
}

const char* const kCsvHeader = "dataset,algorithm,K,L,k,recall,qps,mean_hops,mean_dist_evals,threads,repeats";

void write_csv(std::ostream& os, std::span<const BenchRecord> records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.dataset << ',' << r.algorithm << ',' << r.K << ',' << r.L << ',' << r.k << ',' << r.recall << ','
       << r.qps << ',' << r.mean_hops << ',' << r.mean_dist_evals << ',' << r.threads << ',' << r.repeats << '\n';
  }
}

std::string to_csv(std::span<const BenchRecord> records) {
  std::ostringstream os;
  os.precision(10);
  write_csv(os, records);
  return os.str();
}

OverheadReport overhead_report(const EntryPointIndex& eps, std::uint64_t graph_file_size, double prep_seconds) {
  if (graph_file_size == 0) throw UsageError("overhead_report: graph file size must be positive");
  OverheadReport r;
  r.eps_bytes = entry_index_bytes(eps.size(), eps.vectors.dim());
  r.graph_bytes = graph_file_size;
  r.ratio = static_cast<double>(r.eps_bytes) / static_cast<double>(graph_file_size);
  r.prep_seconds = prep_seconds;
  return r;
}

}  // namespace epann
