#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "epann/clustering.hpp"
#include "epann/detail/beam_search.hpp"
#include "epann/graph.hpp"
#include "epann/vectors.hpp"

namespace epann {

struct SearchParams {
  std::size_t queue_len = 64;  // L
  std::size_t k = 10;
  bool capture_trace = false;

  void validate() const;  // 1 <= k <= L
};

struct SearchTrace {
  std::vector<NodeId> expanded;  // nodes in the order they were expanded, entry first
  std::vector<NodeId> visited;   // nodes in the order their distance was computed
};

struct SearchResult {
  NeighborList topk;
  std::size_t hops = 0;        // expanded nodes
  std::size_t dist_evals = 0;  // distance computations, entry selection included
  NodeId entry = 0;
  std::optional<SearchTrace> trace;
};

/// Per-worker buffers. Reuse across queries on one thread; never share one
/// between concurrent searches.
using SearchScratch = detail::BeamScratch;

/// Best-first search over `g` from `entry` toward q with a candidate queue of
/// at most L (distance, id)-ordered entries. Ends when every queued node has
/// been expanded and returns the k nearest queued nodes.
SearchResult greedy_search(const NavGraph& g, const VectorSet& set, NodeId entry, std::span<const float> q,
                           const SearchParams& p, SearchScratch& scratch);
SearchResult greedy_search(const NavGraph& g, const VectorSet& set, NodeId entry, std::span<const float> q,
                           const SearchParams& p);

/// greedy_search from select_entry(q, eps); dist_evals includes the K
/// selection distances.
SearchResult adaptive_search(const NavGraph& g, const VectorSet& set, const EntryPointIndex& eps,
                             std::span<const float> q, const SearchParams& p, SearchScratch& scratch);
SearchResult adaptive_search(const NavGraph& g, const VectorSet& set, const EntryPointIndex& eps,
                             std::span<const float> q, const SearchParams& p);

}  // namespace epann
