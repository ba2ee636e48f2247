#include "epann/search.hpp"

#include <cmath>
#include <string>

#include "epann/errors.hpp"

namespace epann {

void SearchParams::validate() const {
  if (k == 0) throw UsageError("k must be positive");
  if (k > queue_len) throw UsageError("k=" + std::to_string(k) + " exceeds queue length L=" + std::to_string(queue_len));
}

SearchResult greedy_search(const NavGraph& g, const VectorSet& set, NodeId entry, std::span<const float> q,
                           const SearchParams& p, SearchScratch& scratch) {
  p.validate();
  if (g.size() != set.size()) throw UsageError("graph and vectors differ in size");
  if (entry >= g.size()) throw UsageError("entry node out of range");
  if (q.size() != set.dim()) throw UsageError("query dimension mismatch");

  const auto stats = detail::beam_search(
      g.size(), entry, p.queue_len, [&](NodeId v) { return g.neighbors(v); },
      [&](NodeId v) { return squared_l2(q, set[v]); }, scratch);

  SearchResult res;
  res.entry = entry;
  res.hops = stats.hops;
  res.dist_evals = stats.dist_evals;
  const std::size_t k = std::min(p.k, scratch.queue.size());
  res.topk.ids.reserve(k);
  res.topk.dists.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    res.topk.ids.push_back(scratch.queue[i].id);
    res.topk.dists.push_back(std::sqrt(scratch.queue[i].d2));
  }
  if (p.capture_trace) {
    SearchTrace t;
    t.expanded = scratch.expanded;
    auto order = scratch.visited.order();
    t.visited.assign(order.begin(), order.end());
    res.trace = std::move(t);
  }
  return res;
}

SearchResult greedy_search(const NavGraph& g, const VectorSet& set, NodeId entry, std::span<const float> q,
                           const SearchParams& p) {
  SearchScratch scratch;
  return greedy_search(g, set, entry, q, p, scratch);
}

SearchResult adaptive_search(const NavGraph& g, const VectorSet& set, const EntryPointIndex& eps,
                             std::span<const float> q, const SearchParams& p, SearchScratch& scratch) {
  const NodeId entry = select_entry(q, eps);
  auto res = greedy_search(g, set, entry, q, p, scratch);
  res.dist_evals += eps.size();
  return res;
}

SearchResult adaptive_search(const NavGraph& g, const VectorSet& set, const EntryPointIndex& eps,
                             std::span<const float> q, const SearchParams& p) {
  SearchScratch scratch;
  return adaptive_search(g, set, eps, q, p, scratch);
}

}  // namespace epann
