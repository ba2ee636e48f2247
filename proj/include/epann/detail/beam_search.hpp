#pragma once

// Best-first beam search shared by query-time search and graph construction.
// The queue is a vector kept sorted by (squared distance, id) and capped at L.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "epann/vectors.hpp"

namespace epann::detail {

struct QueueEntry {
  double d2;
  NodeId id;
  bool expanded;
};

inline bool closer(double da, NodeId ia, double db, NodeId ib) noexcept {
  return da < db || (da == db && ia < ib);
}

/// Bitmap over node ids that remembers which words it dirtied, so clearing
/// costs O(touched) instead of O(N).
class VisitedSet {
 public:
  void prepare(std::size_t n) {
    if (bits_.size() * 64 < n) bits_.assign((n + 63) / 64, 0);
    clear();
  }

  bool insert(NodeId id) {
    std::uint64_t& w = bits_[id >> 6];
    const std::uint64_t m = std::uint64_t{1} << (id & 63);
    if (w & m) return false;
    w |= m;
    order_.push_back(id);
    return true;
  }

  bool contains(NodeId id) const noexcept { return (bits_[id >> 6] >> (id & 63)) & 1; }

  void clear() {
    for (NodeId id : order_) bits_[id >> 6] = 0;
    order_.clear();
  }

  /// Ids in insertion order.
  std::span<const NodeId> order() const noexcept { return order_; }

 private:
  std::vector<std::uint64_t> bits_;
  std::vector<NodeId> order_;
};

struct BeamScratch {
  VisitedSet visited;
  std::vector<QueueEntry> queue;
  std::vector<NodeId> expanded;
};

struct BeamStats {
  std::size_t hops = 0;
  std::size_t dist_evals = 0;
};

struct NoVisitHook {
  void operator()(NodeId, double) const noexcept {}
};

/// Runs the search and leaves the final queue (best L visited, sorted) in
/// scratch.queue, the expansion order in scratch.expanded and the visit
/// order in scratch.visited.order().
///
/// `neighbors(u)` returns an iterable of NodeId; `dist2(v)` the squared
/// distance of v to the query; `on_visit(v, d2)` sees every evaluated node.
template <class NeighborFn, class Dist2Fn, class VisitFn = NoVisitHook>
BeamStats beam_search(std::size_t n, NodeId entry, std::size_t L, NeighborFn&& neighbors, Dist2Fn&& dist2,
                      BeamScratch& s, VisitFn&& on_visit = {}) {
  BeamStats stats;
  s.visited.prepare(n);
  s.queue.clear();
  s.expanded.clear();

  s.visited.insert(entry);
  const double d_entry = dist2(entry);
  ++stats.dist_evals;
  on_visit(entry, d_entry);
  s.queue.push_back({d_entry, entry, false});

  std::size_t cursor = 0;
  while (cursor < s.queue.size()) {
    QueueEntry& cur = s.queue[cursor];
    cur.expanded = true;
    const NodeId u = cur.id;
    s.expanded.push_back(u);
    ++stats.hops;

    std::size_t lowest = s.queue.size();
    for (NodeId v : neighbors(u)) {
      if (!s.visited.insert(v)) continue;
      const double d = dist2(v);
      ++stats.dist_evals;
      on_visit(v, d);
      // Enqueue, then drop the farthest if the queue overflows. A candidate
      // that would itself be the one dropped is simply not inserted.
      if (s.queue.size() == L && !closer(d, v, s.queue.back().d2, s.queue.back().id)) continue;
      auto it = std::lower_bound(s.queue.begin(), s.queue.end(), QueueEntry{d, v, false},
                                 [](const QueueEntry& a, const QueueEntry& b) { return closer(a.d2, a.id, b.d2, b.id); });
      const auto pos = static_cast<std::size_t>(it - s.queue.begin());
      s.queue.insert(it, {d, v, false});
      if (s.queue.size() > L) s.queue.pop_back();
      lowest = std::min(lowest, pos);
    }

    cursor = std::min(lowest, cursor + 1);
    while (cursor < s.queue.size() && s.queue[cursor].expanded) ++cursor;
  }
  return stats;
}

}  // namespace epann::detail
