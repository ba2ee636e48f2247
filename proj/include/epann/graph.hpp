#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "epann/vectors.hpp"

namespace epann {

using json = nlohmann::json;

/// Directed adjacency in CSR form over node ids 0..N-1 (node i is row i of the
/// VectorSet it was built on). Immutable; safe to share between threads.
class NavGraph {
 public:
  NavGraph() = default;

  /// Validates: ids in range, no self-loops, no duplicate out-neighbors,
  /// every out-degree <= max_degree, default_entry < N. Throws UsageError.
  NavGraph(const std::vector<std::vector<NodeId>>& adjacency, std::uint32_t max_degree, NodeId default_entry,
           json build_meta = json::object());

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const NodeId> neighbors(NodeId u) const noexcept {
    return {ids_.data() + offsets_[u], static_cast<std::size_t>(offsets_[u + 1] - offsets_[u])};
  }
  std::size_t degree(NodeId u) const noexcept { return offsets_[u + 1] - offsets_[u]; }
  std::uint32_t max_degree() const noexcept { return max_degree_; }  // declared cap R
  std::size_t largest_degree() const noexcept;                      // realized maximum
  std::size_t num_edges() const noexcept { return ids_.size(); }
  NodeId default_entry() const noexcept { return entry_; }
  const json& build_meta() const noexcept { return meta_; }

  std::span<const std::uint64_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> flat_ids() const noexcept { return ids_; }

  std::vector<std::vector<NodeId>> adjacency() const;

  friend bool operator==(const NavGraph&, const NavGraph&) = default;

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> ids_;
  std::uint32_t max_degree_ = 0;
  NodeId entry_ = 0;
  json meta_;
};

/// Number of nodes reachable from `from` by directed edges (including itself).
std::size_t count_reachable(const NavGraph& g, NodeId from);
bool all_reachable_from_entry(const NavGraph& g);

// ---------------------------------------------------------------------------
// Construction

enum class KnnMethod { brute, nn_descent, automatic };

struct NnDescentParams {
  std::size_t K = 64;     // neighbors kept in the output graph
  std::size_t L = 114;    // candidate pool per node
  std::size_t R = 100;    // cap on reverse-neighbor samples
  std::size_t S = 10;     // new samples per node per iteration
  int iterations = 10;
};

enum class Algorithm { nsg, vamana, knn, brute };

struct BuildParams {
  Algorithm algorithm = Algorithm::nsg;
  std::uint32_t R = 32;
  std::uint32_t L = 64;
  std::uint32_t C = 132;
  double alpha = 1.0;
  NnDescentParams knn;
  KnnMethod knn_method = KnnMethod::automatic;
  std::size_t brute_threshold = 5000;  // automatic method uses brute force up to this N
  std::uint64_t seed = 0;

  static BuildParams nsg_defaults();     // R=32, L=64, C=132 over an NN-Descent graph
  static BuildParams vamana_defaults();  // R=70, L=125, alpha=1.2, C=750

  void validate() const;  // alpha >= 1, L >= R, positive caps
};

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
json to_json(const BuildParams& p);

/// Node nearest to the component-wise mean (ties to the lower id).
NodeId central_entry(const VectorSet& set);

/// Exact or NN-Descent k-NN digraph. The default entry is central_entry.
/// build_meta carries, for nn_descent, nothing about recall; use
/// knn_graph_recall to compare against an exact graph.
NavGraph build_knn_graph(const VectorSet& set, std::size_t k, KnnMethod method, const NnDescentParams& params,
                         std::uint64_t seed);

/// Fraction of exact k-NN edges present in `approx` (same k, same N).
double knn_graph_recall(const NavGraph& approx, const NavGraph& exact);

/// NSG refinement of a base k-NN graph. Candidate pool per node: every node
/// visited by a medoid-seeded search of queue length L on the base graph,
/// plus the node's base neighbors, truncated to the C nearest.
NavGraph nsg_refine(const NavGraph& knn_graph, const VectorSet& set, const BuildParams& params);

/// Two-pass Vamana (alpha = 1, then alpha = params.alpha) from a seeded
/// random R-regular start.
NavGraph vamana_refine(const VectorSet& set, const BuildParams& params);

/// Dispatches on params.algorithm (nsg builds its own base graph).
NavGraph build_graph(const VectorSet& set, const BuildParams& params);

// ---------------------------------------------------------------------------
// File IO
//
// "MNSG", u32 version, u64 N, u32 R, u64 default_entry, (N+1) x u64 offsets,
// E x u32 neighbor ids, then u64 length + UTF-8 JSON build metadata.

std::vector<char> encode_graph(const NavGraph& g);
NavGraph decode_graph(std::span<const char> bytes);
void save_graph(const NavGraph& g, const std::filesystem::path& path);
NavGraph load_graph(const std::filesystem::path& path);

}  // namespace epann
