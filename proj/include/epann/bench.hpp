#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epann/clustering.hpp"
#include "epann/graph.hpp"
#include "epann/vectors.hpp"

namespace epann {

/// Mean over queries of |R intersect R_hat| / k, using the first k ids of
/// each list. Throws UsageError if a ground-truth list has fewer than k ids;
/// a short result list simply scores fewer hits.
double recall_at_k(std::span<const NeighborList> results, std::span<const NeighborList> gt, std::size_t k);

struct QpsMeasurement {
  double qps = 0.0;                  // mean of per-repeat throughputs
  std::vector<double> seconds;       // wall time per timed repeat
};

/// runner(query_index, worker_index). Runs every query once untimed, then
/// `repeats` timed passes over all queries with `threads` workers.
using QueryRunner = std::function<void(std::size_t, std::size_t)>;
QpsMeasurement measure_qps(std::size_t n_queries, const QueryRunner& runner, int threads, int repeats);

struct BenchRecord {
  std::string dataset;
  std::string algorithm;
  std::size_t K = 1;  // 1 = fixed central entry
  std::size_t L = 0;
  std::size_t k = 10;
  double recall = 0.0;
  double qps = 0.0;
  double mean_hops = 0.0;
  double mean_dist_evals = 0.0;
  int threads = 1;
  int repeats = 1;
};

struct SweepConfig {
  std::string dataset = "dataset";
  std::vector<std::size_t> L_list{16, 24, 32, 48, 64, 96, 128, 256, 512};
  std::size_t k = 10;
  int threads = 1;
  int repeats = 5;
  bool time_queries = true;  // false: recall/hops only, qps left at 0
};

/// One record per (K, L). eps_per_K[1] may be absent: K = 1 always means
/// the graph's default entry.
std::vector<BenchRecord> sweep(const NavGraph& g, const VectorSet& base,
                               const std::map<std::size_t, EntryPointIndex>& eps_per_K, const VectorSet& queries,
                               std::span<const NeighborList> gt, const SweepConfig& cfg);

/// Highest qps among records with recall >= min_recall and the given K
/// (any K != 1 when adaptive is true). Returns 0 if none qualifies.
double best_qps_at_recall(std::span<const BenchRecord> records, double min_recall, bool adaptive);

/// Smallest L with recall > 0 for K, or 0 if none.
std::size_t first_nonzero_L(std::span<const BenchRecord> records, std::size_t K);

extern const char* const kCsvHeader;
void write_csv(std::ostream& os, std::span<const BenchRecord> records);
std::string to_csv(std::span<const BenchRecord> records);

struct OverheadReport {
  std::uint64_t eps_bytes = 0;
  std::uint64_t graph_bytes = 0;
  double ratio = 0.0;  // eps_bytes / graph_bytes
  double prep_seconds = 0.0;
};

OverheadReport overhead_report(const EntryPointIndex& eps, std::uint64_t graph_file_size, double prep_seconds = 0.0);

/// Size of a graph file with N nodes of out-degree `degree` and no metadata.
constexpr std::uint64_t graph_file_bytes(std::uint64_t N, std::uint64_t degree) {
  return 4 + 4 + 8 + 4 + 8 + (N + 1) * 8 + N * degree * 4 + 8;
}

}  // namespace epann
