// NSG and Vamana refinement plus the connectivity repair both share.

#include <algorithm>
#include <numeric>
#include <random>

#include "epann/detail/beam_search.hpp"
#include "epann/detail/prune.hpp"
#include "epann/errors.hpp"
#include "epann/graph.hpp"

namespace epann {

namespace {

using detail::BeamScratch;
using detail::Candidate;
using Adjacency = std::vector<std::vector<NodeId>>;

bool contains(const std::vector<NodeId>& row, NodeId v) { return std::find(row.begin(), row.end(), v) != row.end(); }

std::vector<NodeId> ids_of(const std::vector<Candidate>& cs) {
  std::vector<NodeId> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(c.id);
  return out;
}

// Adds edge `from -> to` to a possibly saturated row: appended while there is
// room, otherwise the row is re-pruned together with the new candidate.
void insert_reverse(Adjacency& adj, const VectorSet& set, NodeId from, NodeId to, std::size_t R, std::size_t C,
                    double alpha) {
  auto& row = adj[from];
  if (contains(row, to)) return;
  if (row.size() < R) {
    row.push_back(to);
    return;
  }
  std::vector<Candidate> pool;
  pool.reserve(row.size() + 1);
  const auto x = set[from];
  for (NodeId v : row) pool.push_back({squared_l2(x, set[v]), v});
  pool.push_back({squared_l2(x, set[to]), to});
  detail::normalize_pool(pool, from, C);
  row = ids_of(detail::robust_prune(set, pool, R, alpha));
}

struct GraftStats {
  std::size_t attached = 0;   // edges added from a reached node with spare degree
  std::size_t displaced = 0;  // edges replaced because every candidate was saturated
};

// Marks everything reachable from `start` through not-yet-reached nodes.
std::size_t flood(const Adjacency& adj, NodeId start, std::vector<char>& reached) {
  std::size_t count = 0;
  std::vector<NodeId> stack;
  if (!reached[start]) {
    reached[start] = 1;
    ++count;
    stack.push_back(start);
  }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u]) {
      if (reached[v]) continue;
      reached[v] = 1;
      ++count;
      stack.push_back(v);
    }
  }
  return count;
}

// Links every node unreachable from `entry` into the reached region, one
// smallest-id orphan at a time, without exceeding out-degree R.
GraftStats graft(Adjacency& adj, const VectorSet& set, NodeId entry, std::size_t R, std::size_t L) {
  const std::size_t n = adj.size();
  GraftStats stats;
  std::vector<char> reached(n, 0);
  std::size_t reached_count = flood(adj, entry, reached);
  BeamScratch scratch;
  std::size_t scan = 0;

  while (reached_count < n) {
    while (reached[scan]) ++scan;
    const auto u = static_cast<NodeId>(scan);
    const auto target = set[u];

    detail::beam_search(
        n, entry, L, [&](NodeId v) -> const std::vector<NodeId>& { return adj[v]; },
        [&](NodeId v) { return squared_l2(target, set[v]); }, scratch);
    std::vector<Candidate> near;
    for (NodeId v : scratch.visited.order()) near.push_back({squared_l2(target, set[v]), v});
    std::sort(near.begin(), near.end());

    NodeId host = static_cast<NodeId>(n);
    for (const auto& c : near)
      if (adj[c.id].size() < R) {
        host = c.id;
        break;
      }
    if (host == n) {
      near.clear();
      for (std::size_t v = 0; v < n; ++v)
        if (reached[v]) near.push_back({squared_l2(target, set[v]), static_cast<NodeId>(v)});
      std::sort(near.begin(), near.end());
      for (const auto& c : near)
        if (adj[c.id].size() < R) {
          host = c.id;
          break;
        }
    }

    if (host != n) {
      adj[host].push_back(u);
      ++stats.attached;
      reached_count += flood(adj, u, reached);
      continue;
    }

    // Every reached node is saturated. Reroute the nearest one's longest edge
    // through u and keep the displaced neighbor reachable via u.
    const NodeId r = near.front().id;
    auto& row = adj[r];
    std::size_t far = 0;
    double far_d2 = -1.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double d2 = squared_l2(set[r], set[row[j]]);
      if (d2 > far_d2 || (d2 == far_d2 && row[j] > row[far])) {
        far_d2 = d2;
        far = j;
      }
    }
    const NodeId w = row[far];
    row[far] = u;
    auto& urow = adj[u];
    if (!contains(urow, w) && w != u) {
      if (urow.size() < R) {
        urow.push_back(w);
      } else {
        std::size_t ufar = 0;
        double ufar_d2 = -1.0;
        for (std::size_t j = 0; j < urow.size(); ++j) {
          const double d2 = squared_l2(target, set[urow[j]]);
          if (d2 > ufar_d2) {
            ufar_d2 = d2;
            ufar = j;
          }
        }
        urow[ufar] = w;
      }
    }
    ++stats.displaced;
    std::fill(reached.begin(), reached.end(), 0);
    reached_count = flood(adj, entry, reached);
    scan = 0;
  }
  return stats;
}

NavGraph finish(const Adjacency& adj, std::uint32_t R, NodeId entry, json meta) {
  NavGraph g(adj, R, entry, std::move(meta));
  if (!all_reachable_from_entry(g)) throw InternalError("refined graph is not reachable from its entry");
  return g;
}

}  // namespace

NavGraph nsg_refine(const NavGraph& knn_graph, const VectorSet& set, const BuildParams& params) {
  params.validate();
  const std::size_t n = set.size();
  if (knn_graph.size() != n) throw UsageError("nsg_refine: base graph and vectors differ in size");
  const NodeId entry = knn_graph.default_entry();
  const std::size_t R = params.R, L = params.L, C = params.C;

  std::vector<std::vector<Candidate>> pruned(n);
#pragma omp parallel
  {
    BeamScratch scratch;
    std::vector<Candidate> pool;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const auto u = static_cast<NodeId>(i);
      const auto x = set[u];
      pool.clear();
      detail::beam_search(
          n, entry, L, [&](NodeId v) { return knn_graph.neighbors(v); }, [&](NodeId v) { return squared_l2(x, set[v]); },
          scratch, [&](NodeId v, double d2) { pool.push_back({d2, v}); });
      for (NodeId v : knn_graph.neighbors(u)) pool.push_back({squared_l2(x, set[v]), v});
      detail::normalize_pool(pool, u, C);
      pruned[u] = detail::occlusion_prune(set, pool, R);
    }
  }

  Adjacency adj(n);
  for (std::size_t i = 0; i < n; ++i) adj[i] = ids_of(pruned[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& c : pruned[i]) insert_reverse(adj, set, c.id, static_cast<NodeId>(i), R, C, 1.0);

  const auto gs = graft(adj, set, entry, R, L);
  json meta = to_json(params);
  meta["algorithm"] = "nsg";
  meta["entry"] = "medoid";
  meta["pool"] = "visited set of a queue-L search from the medoid on the base graph, plus base neighbors, nearest C";
  meta["base_graph"] = knn_graph.build_meta();
  meta["graft"] = {{"attached", gs.attached}, {"displaced", gs.displaced}};
  return finish(adj, params.R, entry, std::move(meta));
}

NavGraph vamana_refine(const VectorSet& set, const BuildParams& params) {
  params.validate();
  const std::size_t n = set.size();
  if (n == 0) throw UsageError("vamana_refine: empty set");
  const std::size_t R = params.R, L = params.L, C = params.C;
  const NodeId entry = central_entry(set);
  std::mt19937_64 rng(params.seed);

  Adjacency adj(n);
  const std::size_t init_deg = std::min(R, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = adj[i];
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    while (row.size() < init_deg) {
      const NodeId v = pick(rng);
      if (v != i && !contains(row, v)) row.push_back(v);
    }
  }

  BeamScratch scratch;
  std::vector<Candidate> pool;
  const double passes[2] = {1.0, params.alpha};
  for (double alpha : passes) {
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (NodeId p : order) {
      const auto x = set[p];
      detail::beam_search(
          n, entry, L, [&](NodeId v) -> const std::vector<NodeId>& { return adj[v]; },
          [&](NodeId v) { return squared_l2(x, set[v]); }, scratch);
      pool.clear();
      for (NodeId v : scratch.expanded) pool.push_back({squared_l2(x, set[v]), v});
      for (NodeId v : adj[p]) pool.push_back({squared_l2(x, set[v]), v});
      detail::normalize_pool(pool, p, C);
      adj[p] = ids_of(detail::robust_prune(set, pool, R, alpha));
      for (NodeId j : adj[p]) insert_reverse(adj, set, j, p, R, C, alpha);
    }
  }

  const auto gs = graft(adj, set, entry, R, L);
  json meta = to_json(params);
  meta["algorithm"] = "vamana";
  meta["entry"] = "medoid";
  meta["pool"] = "expanded nodes of a queue-L search from the medoid plus current out-neighbors, nearest C";
  meta["passes"] = {1.0, params.alpha};
  meta["graft"] = {{"attached", gs.attached}, {"displaced", gs.displaced}};
  meta.erase("knn");
  return finish(adj, params.R, entry, std::move(meta));
}

}  // namespace epann
