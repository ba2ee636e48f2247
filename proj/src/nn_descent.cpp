#include "nn_descent.hpp"

#include <algorithm>
#include <random>

#include "epann/errors.hpp"

namespace epann::detail {

namespace {

struct PoolEntry {
  double d2;
  NodeId id;
  bool fresh;

  friend bool operator<(const PoolEntry& a, const PoolEntry& b) noexcept {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
  }
};

struct Nhood {
  std::vector<PoolEntry> pool;  // max-heap while joining, sorted while sampling
  std::size_t M = 0;
  std::vector<NodeId> nn_new, nn_old, rnn_new, rnn_old;

  void insert(NodeId id, double d2, std::size_t cap) {
    const PoolEntry e{d2, id, true};
    if (pool.size() == cap && !(e < pool.front())) return;
    for (const auto& p : pool)
      if (p.id == id) return;
    if (pool.size() < cap) {
      pool.push_back(e);
      std::push_heap(pool.begin(), pool.end());
    } else {
      std::pop_heap(pool.begin(), pool.end());
      pool.back() = e;
      std::push_heap(pool.begin(), pool.end());
    }
  }
};

// `count` distinct ids in [0, n), excluding `self`.
std::vector<NodeId> sample_distinct(std::mt19937_64& rng, std::size_t count, std::size_t n, NodeId self) {
  count = std::min(count, n - 1);
  std::vector<NodeId> out;
  out.reserve(count);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  while (out.size() < count) {
    const NodeId id = pick(rng);
    if (id == self || std::find(out.begin(), out.end(), id) != out.end()) continue;
    out.push_back(id);
  }
  return out;
}

}  // namespace

std::vector<std::vector<NodeId>> nn_descent(const VectorSet& set, const NnDescentParams& params,
                                            std::uint64_t seed) {
  const std::size_t n = set.size();
  if (params.K >= n) throw UsageError("nn_descent: K must be < N");
  const std::size_t L = std::min(params.L, n - 1);
  const std::size_t S = params.S;
  const std::size_t R = params.R;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 7741);

  std::vector<Nhood> graph(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = graph[i];
    const auto self = static_cast<NodeId>(i);
    node.M = S;
    node.nn_new = sample_distinct(rng, 2 * S, n, self);
    for (NodeId id : sample_distinct(rng, S, n, self)) node.pool.push_back({squared_l2(set[i], set[id]), id, true});
    std::make_heap(node.pool.begin(), node.pool.end());
  }

  auto join = [&] {
    for (std::size_t u = 0; u < n; ++u) {
      const auto& node = graph[u];
      auto link = [&](NodeId a, NodeId b) {
        if (a == b) return;
        const double d = squared_l2(set[a], set[b]);
        graph[a].insert(b, d, L);
        graph[b].insert(a, d, L);
      };
      for (NodeId a : node.nn_new) {
        for (NodeId b : node.nn_new)
          if (a < b) link(a, b);
        for (NodeId b : node.nn_old) link(a, b);
      }
    }
  };

  auto update = [&] {
    for (auto& node : graph) {
      node.nn_new.clear();
      node.nn_old.clear();
      std::sort(node.pool.begin(), node.pool.end());
      if (node.pool.size() > L) node.pool.resize(L);
      const std::size_t maxl = std::min(node.M + S, node.pool.size());
      std::size_t c = 0, l = 0;
      while (l < maxl && c < S) {
        if (node.pool[l].fresh) ++c;
        ++l;
      }
      node.M = l;
    }

    auto push_reverse = [&](std::vector<NodeId>& list, NodeId who) {
      if (list.size() < R) {
        list.push_back(who);
      } else {
        const std::size_t pos = std::uniform_int_distribution<std::size_t>(0, R - 1)(rng);
        list[pos] = who;
      }
    };
    for (std::size_t u = 0; u < n; ++u) {
      auto& node = graph[u];
      for (std::size_t l = 0; l < node.M; ++l) {
        auto& e = node.pool[l];
        auto& other = graph[e.id];
        const bool beyond = other.pool.empty() || other.pool.back().d2 < e.d2;
        if (e.fresh) {
          node.nn_new.push_back(e.id);
          if (beyond) push_reverse(other.rnn_new, static_cast<NodeId>(u));
          e.fresh = false;
        } else {
          node.nn_old.push_back(e.id);
          if (beyond) push_reverse(other.rnn_old, static_cast<NodeId>(u));
        }
      }
    }

    for (auto& node : graph) {
      std::make_heap(node.pool.begin(), node.pool.end());
      node.nn_new.insert(node.nn_new.end(), node.rnn_new.begin(), node.rnn_new.end());
      node.nn_old.insert(node.nn_old.end(), node.rnn_old.begin(), node.rnn_old.end());
      if (node.nn_old.size() > 2 * R) node.nn_old.resize(2 * R);
      node.rnn_new.clear();
      node.rnn_old.clear();
    }
  };

  for (int it = 0; it < params.iterations; ++it) {
    join();
    update();
  }

  std::vector<std::vector<NodeId>> out(n);
  for (std::size_t u = 0; u < n; ++u) {
    auto& pool = graph[u].pool;
    std::sort(pool.begin(), pool.end());
    if (pool.size() < params.K) {
      // Starved pool (tiny or degenerate inputs): fall back to exact search.
      const auto exact = brute_force_knn(set[u], set, params.K + 1);
      for (NodeId id : exact.ids)
        if (id != u && out[u].size() < params.K) out[u].push_back(id);
      continue;
    }
    for (std::size_t j = 0; j < params.K; ++j) out[u].push_back(pool[j].id);
  }
  return out;
}

}  // namespace epann::detail
