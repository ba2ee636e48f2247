#include "epann/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

#include "epann/errors.hpp"

namespace epann {

namespace {

PathRProfile profile_from_distances(std::span<const NodeId> path, const std::vector<double>& d) {
  PathRProfile p;
  p.path.assign(path.begin(), path.end());
  p.start_distance = d.front();
  p.end_distance = d.back();
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    const double r = d[i] - d[i + 1];
    p.r.push_back(r);
    (r >= 0.0 ? p.r_plus : p.r_minus).push_back(i);
  }
  return p;
}

}  // namespace

double PathRProfile::sum() const noexcept {
  double s = 0.0;
  for (double x : r) s += x;
  return s;
}

PathRProfile r_profile(const VectorSet& set, std::span<const NodeId> path, std::span<const float> target) {
  if (path.size() < 2) throw UsageError("r_profile: a path needs at least two nodes");
  if (target.size() != set.dim()) throw UsageError("r_profile: target dimension mismatch");
  std::vector<double> d;
  d.reserve(path.size());
  for (NodeId v : path) {
    if (v >= set.size()) throw UsageError("r_profile: node id out of range");
    d.push_back(std::sqrt(squared_l2(set[v], target)));
  }
  return profile_from_distances(path, d);
}

PathRProfile r_profile(const VectorSet& set, std::span<const NodeId> path, NodeId target) {
  if (target >= set.size()) throw UsageError("r_profile: target out of range");
  return r_profile(set, path, set[target]);
}

// ---------------------------------------------------------------------------

ReverseGraph::ReverseGraph(const NavGraph& g) {
  const std::size_t n = g.size();
  offsets_.assign(n + 1, 0);
  for (NodeId v : g.flat_ids()) ++offsets_[v + 1];
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  ids_.resize(g.num_edges());
  std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t u = 0; u < n; ++u)
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) ids_[fill[v]++] = static_cast<NodeId>(u);
}

MinBField::MinBField(const NavGraph& g, const ReverseGraph& rg, const VectorSet& set, NodeId target)
    : target_(target) {
  const std::size_t n = g.size();
  if (set.size() != n) throw UsageError("min-b: graph and vectors differ in size");
  if (target >= n) throw UsageError("min-b: target out of range");
  dt_.resize(n);
  const auto t = set[target];
  for (std::size_t v = 0; v < n; ++v) dt_[v] = std::sqrt(squared_l2(set[v], t));

  // 0/1 BFS on reversed edges: edge w -> u costs 1 when it moves away from t.
  b_.assign(n, kNoPath);
  std::vector<char> done(n, 0);
  std::deque<NodeId> dq{target};
  b_[target] = 0;
  while (!dq.empty()) {
    const NodeId u = dq.front();
    dq.pop_front();
    if (done[u]) continue;
    done[u] = 1;
    for (NodeId w : rg.in_neighbors(u)) {
      const std::uint32_t wt = dt_[u] > dt_[w] ? 1 : 0;
      const std::uint32_t nb = b_[u] + wt;
      if (nb < b_[w]) {
        b_[w] = nb;
        if (wt) dq.push_back(w);
        else dq.push_front(w);
      }
    }
  }

  auto tight = [&](NodeId w, NodeId u) {
    return b_[w] != kNoPath && b_[u] != kNoPath && b_[w] == b_[u] + (dt_[u] > dt_[w] ? 1u : 0u);
  };

  hops_.assign(n, kNoPath);
  hops_[target] = 0;
  std::vector<NodeId> frontier{target}, nextf;
  while (!frontier.empty()) {
    nextf.clear();
    for (NodeId u : frontier)
      for (NodeId w : rg.in_neighbors(u))
        if (hops_[w] == kNoPath && tight(w, u)) {
          hops_[w] = hops_[u] + 1;
          nextf.push_back(w);
        }
    frontier.swap(nextf);
  }

  next_.assign(n, static_cast<NodeId>(n));
  for (std::size_t s = 0; s < n; ++s) {
    if (s == target || b_[s] == kNoPath) continue;
    for (NodeId v : g.neighbors(static_cast<NodeId>(s)))
      if (tight(static_cast<NodeId>(s), v) && hops_[v] + 1 == hops_[s] && v < next_[s]) next_[s] = v;
    if (next_[s] == n) throw InternalError("min-b: witness successor missing");
  }
}

std::vector<NodeId> MinBField::witness(NodeId s) const {
  if (b_[s] == kNoPath) return {};
  std::vector<NodeId> path{s};
  while (path.back() != target_) path.push_back(next_[path.back()]);
  return path;
}

MinBPath min_b(const NavGraph& g, const VectorSet& set, NodeId s, NodeId t) {
  if (s >= g.size() || t >= g.size()) throw UsageError("min_b: node id out of range");
  const ReverseGraph rg(g);
  const MinBField field(g, rg, set, t);
  MinBPath out;
  out.reachable = field.b(s) != kNoPath;
  if (out.reachable) {
    out.b = field.b(s);
    out.path = field.witness(s);
  }
  return out;
}

// ---------------------------------------------------------------------------

MsnetCertificate certify_bmsnet(const NavGraph& g, const VectorSet& set, const CertifyOptions& opts) {
  const std::size_t n = g.size();
  if (set.size() != n) throw UsageError("certify_bmsnet: graph and vectors differ in size");
  MsnetCertificate cert;
  cert.node_count = n;
  cert.exact = opts.force_exact || n <= opts.exact_threshold;
  const ReverseGraph rg(g);

  // sources[t] = the sources evaluated toward t.
  std::vector<std::vector<NodeId>> sources(n);
  if (cert.exact) {
    cert.b_matrix.assign(n * n, kNoPath);
    for (std::size_t t = 0; t < n; ++t) cert.b_matrix[t * n + t] = 0;
  } else if (n > 1) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    for (std::size_t i = 0; i < opts.pair_budget; ++i) {
      NodeId s = pick(rng), t = pick(rng);
      while (t == s) t = pick(rng);
      sources[t].push_back(s);
    }
  }

  std::vector<std::uint64_t> hist;
  std::vector<std::vector<PairWitness>> per_target_witnesses(opts.keep_witnesses ? n : 0);
  std::size_t unreachable = 0, evaluated = 0;
  std::uint32_t B = 0;
  std::optional<std::pair<NodeId, NodeId>> worst;  // (t, s)

#pragma omp parallel
  {
    std::vector<std::uint64_t> local_hist;
    std::size_t local_unreachable = 0, local_evaluated = 0;
    std::uint32_t local_B = 0;
    std::optional<std::pair<NodeId, NodeId>> local_worst;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(n); ++ti) {
      const auto t = static_cast<NodeId>(ti);
      if (!cert.exact && sources[t].empty()) continue;
      const MinBField field(g, rg, set, t);
      auto visit = [&](NodeId s) {
        ++local_evaluated;
        const auto b = field.b(s);
        if (cert.exact) cert.b_matrix[static_cast<std::size_t>(s) * n + t] = b;
        if (b == kNoPath) {
          ++local_unreachable;
          return;
        }
        if (local_hist.size() <= b) local_hist.resize(b + 1, 0);
        ++local_hist[b];
        const std::pair<NodeId, NodeId> key{t, s};
        if (b > local_B || (b == local_B && (!local_worst || key < *local_worst))) {
          local_B = b;
          local_worst = key;
        }
        if (opts.keep_witnesses) per_target_witnesses[t].push_back({s, t, b, field.witness(s)});
      };
      if (cert.exact) {
        for (std::size_t s = 0; s < n; ++s)
          if (s != t) visit(static_cast<NodeId>(s));
      } else {
        for (NodeId s : sources[t]) visit(s);
      }
    }
#pragma omp critical
    {
      if (hist.size() < local_hist.size()) hist.resize(local_hist.size(), 0);
      for (std::size_t b = 0; b < local_hist.size(); ++b) hist[b] += local_hist[b];
      unreachable += local_unreachable;
      evaluated += local_evaluated;
      if (local_worst && (local_B > B || (local_B == B && (!worst || *local_worst < *worst)))) {
        B = local_B;
        worst = local_worst;
      }
    }
  }

  cert.B = B;
  cert.histogram = std::move(hist);
  cert.unreachable_pairs = unreachable;
  cert.pairs_evaluated = evaluated;
  if (worst) {
    const auto [t, s] = *worst;
    const auto w = min_b(g, set, s, t);
    cert.worst = PairWitness{s, t, w.b, w.path};
  }
  for (auto& list : per_target_witnesses)
    for (auto& w : list) cert.witnesses.push_back(std::move(w));
  return cert;
}

json to_json(const MsnetCertificate& c) {
  json j = {{"B", c.B},
            {"exact", c.exact},
            {"bound", c.exact ? "exact" : "lower_bound"},
            {"node_count", c.node_count},
            {"pairs_evaluated", c.pairs_evaluated},
            {"unreachable_pairs", c.unreachable_pairs},
            {"histogram", c.histogram}};
  if (c.worst) j["worst"] = {{"s", c.worst->s}, {"t", c.worst->t}, {"b", c.worst->b}, {"path", c.worst->path}};
  return j;
}

// ---------------------------------------------------------------------------

std::string to_string(Condition c) {
  switch (c) {
    case Condition::i: return "i";
    case Condition::ii: return "ii";
    case Condition::neither: return "neither";
  }
  return "?";
}

std::size_t TheoremReport::count(Condition c) const {
  return static_cast<std::size_t>(
      std::count_if(queries.begin(), queries.end(), [c](const QueryBound& q) { return q.condition == c; }));
}

bool TheoremReport::all_bounds_hold() const {
  return std::all_of(queries.begin(), queries.end(),
                     [](const QueryBound& q) { return !q.bound_holds || *q.bound_holds; });
}

bool TheoremReport::all_cells_ordered() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellQuantities& c) { return c.ordering_holds; });
}

namespace {

struct RAccumulator {
  std::size_t hops = 0;
  double r_plus = std::numeric_limits<double>::infinity();
  double r_minus = 0.0;

  void add(double r) {
    ++hops;
    if (r >= 0.0) r_plus = std::min(r_plus, r);
    else r_minus = std::max(r_minus, -r);
  }
  std::optional<double> plus() const {
    if (!std::isfinite(r_plus) || r_plus <= 0.0) return std::nullopt;
    return r_plus;
  }
};

double hop_bound(double diameter, double r_plus, double r_minus, std::uint32_t B) {
  return diameter / r_plus + static_cast<double>(B) * (1.0 + r_minus / r_plus);
}

}  // namespace

TheoremReport theorem_quantities(const TheoremInputs& in) {
  if (!in.graph || !in.base || !in.eps) throw UsageError("theorem_quantities: graph, base and eps are required");
  const NavGraph& g = *in.graph;
  const VectorSet& base = *in.base;
  const std::size_t n = base.size();
  if (g.size() != n) throw UsageError("theorem_quantities: graph and vectors differ in size");
  const VectorSet empty_queries;
  const VectorSet& queries = in.queries ? *in.queries : empty_queries;
  if (in.gt.size() != queries.size()) throw UsageError("theorem_quantities: one ground-truth id per query required");

  const VectorSet members = queries.empty() ? base : concat(base, queries);
  const auto part = voronoi_assign(members, in.eps->vectors);
  const std::size_t K = part.num_cells();

  TheoremReport rep;
  rep.B = in.B;
  rep.family = in.use_witnesses ? "min_b_witnesses" : "provided";
  if (!in.provided.empty() && in.use_witnesses) rep.family += "+provided";

  std::vector<std::vector<std::size_t>> cell_rows(K);
  for (std::size_t i = 0; i < members.size(); ++i) cell_rows[part.cell_of[i]].push_back(i);
  rep.cells.resize(K);
  for (std::size_t j = 0; j < K; ++j) {
    for (auto i : cell_rows[j]) (i < n ? rep.cells[j].db_members : rep.cells[j].query_members)++;
    rep.cells[j].diameter = cell_diameter(members, cell_rows[j]);
  }
  std::vector<std::size_t> all_rows(members.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  rep.diameter = cell_diameter(members, all_rows);

  RAccumulator global;
  std::vector<RAccumulator> per_cell(K);

  if (in.use_witnesses) {
    const ReverseGraph rg(g);
    std::vector<RAccumulator> locals;
#pragma omp parallel
    {
      RAccumulator g_local;
      std::vector<RAccumulator> c_local(K);
      std::vector<char> marked(n);
#pragma omp for schedule(dynamic, 4)
      for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(n); ++ti) {
        const auto t = static_cast<NodeId>(ti);
        const MinBField field(g, rg, base, t);
        auto r_of = [&](NodeId s) { return field.distance_to_target(s) - field.distance_to_target(field.next(s)); };
        // Witness paths toward t form a tree, so each hop s -> next(s) is
        // counted once per family no matter how many paths share it.
        for (std::size_t s = 0; s < n; ++s)
          if (s != t && field.b(static_cast<NodeId>(s)) <= in.B) g_local.add(r_of(static_cast<NodeId>(s)));
        const auto cell = part.cell_of[t];
        std::fill(marked.begin(), marked.end(), 0);
        for (std::size_t s0 = 0; s0 < n; ++s0) {
          if (s0 == t || part.cell_of[s0] != cell || field.b(static_cast<NodeId>(s0)) > in.B) continue;
          for (auto s = static_cast<NodeId>(s0); s != t && !marked[s]; s = field.next(s)) {
            marked[s] = 1;
            c_local[cell].add(r_of(s));
          }
        }
      }
#pragma omp critical
      {
        global.hops += g_local.hops;
        global.r_plus = std::min(global.r_plus, g_local.r_plus);
        global.r_minus = std::max(global.r_minus, g_local.r_minus);
        for (std::size_t j = 0; j < K; ++j) {
          per_cell[j].hops += c_local[j].hops;
          per_cell[j].r_plus = std::min(per_cell[j].r_plus, c_local[j].r_plus);
          per_cell[j].r_minus = std::max(per_cell[j].r_minus, c_local[j].r_minus);
        }
      }
    }
  }

  for (const auto& pp : in.provided) {
    if (pp.path.size() < 2) continue;
    const auto prof = r_profile(base, pp.path, pp.target);
    if (prof.b() > in.B) continue;
    for (double r : prof.r) global.add(r);
    if (part.cell_of[pp.path.front()] == part.cell_of[pp.target])
      for (double r : prof.r) per_cell[part.cell_of[pp.target]].add(r);
  }

  rep.hops_in_family = global.hops;
  rep.r_plus = global.plus();
  rep.r_minus = global.r_minus;
  if (rep.r_plus) rep.l0 = hop_bound(rep.diameter, *rep.r_plus, rep.r_minus, in.B);

  for (std::size_t j = 0; j < K; ++j) {
    auto& c = rep.cells[j];
    c.hops_in_family = per_cell[j].hops;
    c.r_plus = c.db_members >= 2 ? per_cell[j].plus() : std::nullopt;
    c.r_minus = per_cell[j].r_minus;
    if (c.r_plus) c.l_bar = hop_bound(c.diameter, *c.r_plus, c.r_minus, in.B);
    c.ordering_holds = c.diameter <= rep.diameter && c.r_minus <= rep.r_minus &&
                       (!c.r_plus || !rep.r_plus || *rep.r_plus <= *c.r_plus);
  }

  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    QueryBound qb;
    qb.query = qi;
    qb.gt = in.gt[qi];
    if (qb.gt >= n) throw UsageError("theorem_quantities: ground-truth id out of range");
    qb.cell_query = part.cell_of[n + qi];
    qb.cell_gt = part.cell_of[qb.gt];
    qb.delta = std::sqrt(squared_l2(queries[qi], base[qb.gt]));
    const auto& cell = rep.cells[qb.cell_query];
    if (qb.cell_query == qb.cell_gt) {
      qb.condition = Condition::i;
      qb.l_bar = cell.l_bar;
    } else if (cell.diameter + qb.delta <= rep.diameter) {
      qb.condition = Condition::ii;
      if (rep.r_plus) qb.l_bar = hop_bound(cell.diameter + qb.delta, *rep.r_plus, rep.r_minus, in.B);
    }
    if (qb.l_bar && rep.l0) qb.bound_holds = *qb.l_bar <= *rep.l0;
    rep.queries.push_back(qb);
  }
  return rep;
}

json to_json(const TheoremReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json cells = json::array();
  for (std::size_t j = 0; j < r.cells.size(); ++j) {
    const auto& c = r.cells[j];
    cells.push_back({{"cell", j},
                     {"db_members", c.db_members},
                     {"query_members", c.query_members},
                     {"R_j", c.diameter},
                     {"hops_in_family", c.hops_in_family},
                     {"r_plus_j", opt(c.r_plus)},
                     {"r_minus_j", c.r_minus},
                     {"l_bar_j", opt(c.l_bar)},
                     {"defined", c.l_bar.has_value()},
                     {"ordering_holds", c.ordering_holds}});
  }
  json qs = json::array();
  for (const auto& q : r.queries) {
    qs.push_back({{"query", q.query},
                  {"gt", q.gt},
                  {"cell_query", q.cell_query},
                  {"cell_gt", q.cell_gt},
                  {"condition", to_string(q.condition)},
                  {"delta", q.delta},
                  {"l_bar", opt(q.l_bar)},
                  {"bound_holds", q.bound_holds ? json(*q.bound_holds) : json(nullptr)}});
  }
  return {{"B", r.B},
          {"family", r.family},
          {"R", r.diameter},
          {"hops_in_family", r.hops_in_family},
          {"r_plus", opt(r.r_plus)},
          {"r_minus", r.r_minus},
          {"l0", opt(r.l0)},
          {"counts",
           {{"i", r.count(Condition::i)}, {"ii", r.count(Condition::ii)}, {"neither", r.count(Condition::neither)}}},
          {"all_bounds_hold", r.all_bounds_hold()},
          {"all_cells_ordered", r.all_cells_ordered()},
          {"cells", cells},
          {"queries", qs}};
}

}  // namespace epann
