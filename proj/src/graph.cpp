#include "epann/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_set>

#include "epann/detail/binary_io.hpp"
#include "epann/errors.hpp"
#include "nn_descent.hpp"

namespace epann {

namespace {
constexpr std::uint32_t kGraphVersion = 1;
}

NavGraph::NavGraph(const std::vector<std::vector<NodeId>>& adjacency, std::uint32_t max_degree,
                   NodeId default_entry, json build_meta)
    : max_degree_(max_degree), entry_(default_entry), meta_(std::move(build_meta)) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw UsageError("graph must have at least one node");
  if (default_entry >= n) throw UsageError("default entry out of range");
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  std::vector<NodeId> seen_stamp(n, static_cast<NodeId>(-1));
  for (std::size_t u = 0; u < n; ++u) {
    const auto& row = adjacency[u];
    if (row.size() > max_degree)
      throw UsageError("node " + std::to_string(u) + " has degree " + std::to_string(row.size()) + " > " +
                       std::to_string(max_degree));
    for (NodeId v : row) {
      if (v >= n) throw UsageError("node " + std::to_string(u) + " links to out-of-range id " + std::to_string(v));
      if (v == u) throw UsageError("self-loop at node " + std::to_string(u));
      if (seen_stamp[v] == u) throw UsageError("duplicate edge " + std::to_string(u) + "->" + std::to_string(v));
      seen_stamp[v] = static_cast<NodeId>(u);
    }
    ids_.insert(ids_.end(), row.begin(), row.end());
    offsets_.push_back(ids_.size());
  }
}

std::size_t NavGraph::largest_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t u = 0; u < size(); ++u) best = std::max(best, degree(static_cast<NodeId>(u)));
  return best;
}

std::vector<std::vector<NodeId>> NavGraph::adjacency() const {
  std::vector<std::vector<NodeId>> out(size());
  for (std::size_t u = 0; u < size(); ++u) {
    auto nb = neighbors(static_cast<NodeId>(u));
    out[u].assign(nb.begin(), nb.end());
  }
  return out;
}

std::size_t count_reachable(const NavGraph& g, NodeId from) {
  std::vector<char> seen(g.size(), 0);
  std::vector<NodeId> stack{from};
  seen[from] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : g.neighbors(u)) {
      if (seen[v]) continue;
      seen[v] = 1;
      ++count;
      stack.push_back(v);
    }
  }
  return count;
}

bool all_reachable_from_entry(const NavGraph& g) { return count_reachable(g, g.default_entry()) == g.size(); }

// ---------------------------------------------------------------------------

BuildParams BuildParams::nsg_defaults() { return BuildParams{}; }

BuildParams BuildParams::vamana_defaults() {
  BuildParams p;
  p.algorithm = Algorithm::vamana;
  p.R = 70;
  p.L = 125;
  p.C = 750;
  p.alpha = 1.2;
  return p;
}

void BuildParams::validate() const {
  if (R == 0 || L == 0 || C == 0) throw UsageError("R, L and C must be positive");
  if (alpha < 1.0) throw UsageError("alpha must be >= 1");
  if ((algorithm == Algorithm::nsg || algorithm == Algorithm::vamana) && L < R)
    throw UsageError("L must be >= R");
  if (knn.K == 0 || knn.L < knn.K || knn.S == 0 || knn.R == 0 || knn.iterations < 1)
    throw UsageError("invalid NN-Descent parameters");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nsg: return "nsg";
    case Algorithm::vamana: return "vamana";
    case Algorithm::knn: return "knn";
    case Algorithm::brute: return "brute";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "nsg") return Algorithm::nsg;
  if (s == "vamana") return Algorithm::vamana;
  if (s == "knn") return Algorithm::knn;
  if (s == "brute") return Algorithm::brute;
  throw UsageError("unknown algorithm '" + s + "'");
}

json to_json(const BuildParams& p) {
  return {{"algorithm", to_string(p.algorithm)},
          {"R", p.R},
          {"L", p.L},
          {"C", p.C},
          {"alpha", p.alpha},
          {"seed", p.seed},
          {"knn", {{"K", p.knn.K}, {"L", p.knn.L}, {"R", p.knn.R}, {"S", p.knn.S}, {"iter", p.knn.iterations}}}};
}

NodeId central_entry(const VectorSet& set) {
  const auto mean = mean_vector(set);
  return brute_force_knn(mean, set, 1).ids[0];
}

NavGraph build_knn_graph(const VectorSet& set, std::size_t k, KnnMethod method, const NnDescentParams& params,
                         std::uint64_t seed) {
  const std::size_t n = set.size();
  if (k == 0 || k >= n)
    throw UsageError("build_knn_graph: need 0 < k < N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  if (method == KnnMethod::automatic) method = n <= 5000 ? KnnMethod::brute : KnnMethod::nn_descent;

  std::vector<std::vector<NodeId>> adj(n);
  json meta = {{"algorithm", method == KnnMethod::brute ? "brute" : "knn"}, {"k", k}};
  if (method == KnnMethod::brute) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const auto u = static_cast<NodeId>(i);
      const auto nl = brute_force_knn(set[u], set, k + 1);
      auto& row = adj[u];
      for (NodeId v : nl.ids)
        if (v != u && row.size() < k) row.push_back(v);
    }
  } else {
    NnDescentParams p = params;
    p.K = k;
    p.L = std::max(p.L, k);
    adj = detail::nn_descent(set, p, seed);
    meta["nn_descent"] = {{"K", p.K}, {"L", p.L}, {"R", p.R}, {"S", p.S}, {"iter", p.iterations}, {"seed", seed}};
  }
  return NavGraph(adj, static_cast<std::uint32_t>(k), central_entry(set), std::move(meta));
}

double knn_graph_recall(const NavGraph& approx, const NavGraph& exact) {
  if (approx.size() != exact.size()) throw UsageError("knn_graph_recall: size mismatch");
  std::size_t hit = 0, total = 0;
  for (std::size_t u = 0; u < exact.size(); ++u) {
    auto truth = exact.neighbors(static_cast<NodeId>(u));
    auto got = approx.neighbors(static_cast<NodeId>(u));
    std::unordered_set<NodeId> s(got.begin(), got.end());
    for (NodeId v : truth) hit += s.count(v);
    total += truth.size();
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

NavGraph build_graph(const VectorSet& set, const BuildParams& params) {
  params.validate();
  switch (params.algorithm) {
    case Algorithm::nsg: {
      const std::size_t k = std::min<std::size_t>(params.knn.K, set.size() - 1);
      KnnMethod method = params.knn_method;
      if (method == KnnMethod::automatic)
        method = set.size() <= params.brute_threshold ? KnnMethod::brute : KnnMethod::nn_descent;
      const auto base = build_knn_graph(set, k, method, params.knn, params.seed);
      return nsg_refine(base, set, params);
    }
    case Algorithm::vamana: return vamana_refine(set, params);
    case Algorithm::knn:
      return build_knn_graph(set, std::min<std::size_t>(params.knn.K, set.size() - 1), KnnMethod::nn_descent,
                             params.knn, params.seed);
    case Algorithm::brute:
      return build_knn_graph(set, std::min<std::size_t>(params.knn.K, set.size() - 1), KnnMethod::brute,
                             params.knn, params.seed);
  }
  throw InternalError("unreachable algorithm");
}

// ---------------------------------------------------------------------------

std::vector<char> encode_graph(const NavGraph& g) {
  detail::ByteWriter w;
  const std::string meta = g.build_meta().dump();
  w.reserve(32 + g.offsets().size_bytes() + g.flat_ids().size_bytes() + 8 + meta.size());
  w.put_magic("MNSG");
  w.put<std::uint32_t>(kGraphVersion);
  w.put<std::uint64_t>(g.size());
  w.put<std::uint32_t>(g.max_degree());
  w.put<std::uint64_t>(g.default_entry());
  w.put_span(g.offsets());
  w.put_span(g.flat_ids());
  w.put<std::uint64_t>(meta.size());
  w.put_span(std::span<const char>(meta.data(), meta.size()));
  return std::move(w).take();
}

NavGraph decode_graph(std::span<const char> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("MNSG");
  const auto version_at = r.offset();
  if (r.get<std::uint32_t>("version") != kGraphVersion) throw FormatError("unsupported graph version", version_at);
  const auto n_at = r.offset();
  const auto n = r.get<std::uint64_t>("node count");
  if (n == 0 || n > std::numeric_limits<NodeId>::max()) throw FormatError("invalid node count", n_at);
  const auto R = r.get<std::uint32_t>("max degree");
  const auto entry_at = r.offset();
  const auto entry = r.get<std::uint64_t>("default entry");
  if (entry >= n) throw FormatError("default entry out of range", entry_at);
  if (r.remaining() / 8 < n + 1) throw FormatError("truncated offsets block", r.offset() + r.remaining());

  const auto offsets_at = r.offset();
  std::vector<std::uint64_t> offsets(n + 1);
  r.get_span(std::span<std::uint64_t>(offsets), "offsets");
  if (offsets[0] != 0) throw FormatError("first offset must be 0", offsets_at);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (offsets[i + 1] < offsets[i] || offsets[i + 1] - offsets[i] > R)
      throw FormatError("invalid offset for node " + std::to_string(i), offsets_at + 8 * (i + 1));
  }
  const auto E = offsets[n];
  if (r.remaining() / 4 < E) throw FormatError("truncated adjacency block", r.offset() + r.remaining());
  const auto ids_at = r.offset();
  std::vector<NodeId> ids(E);
  r.get_span(std::span<NodeId>(ids), "adjacency");

  std::vector<std::vector<NodeId>> adj(n);
  std::vector<NodeId> stamp(n, static_cast<NodeId>(-1));
  for (std::uint64_t u = 0; u < n; ++u) {
    for (auto e = offsets[u]; e < offsets[u + 1]; ++e) {
      const NodeId v = ids[e];
      if (v >= n) throw FormatError("neighbor id " + std::to_string(v) + " out of range", ids_at + 4 * e);
      if (v == u) throw FormatError("self-loop at node " + std::to_string(u), ids_at + 4 * e);
      if (stamp[v] == u) throw FormatError("duplicate neighbor at node " + std::to_string(u), ids_at + 4 * e);
      stamp[v] = static_cast<NodeId>(u);
    }
    adj[u].assign(ids.begin() + static_cast<std::ptrdiff_t>(offsets[u]),
                  ids.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]));
  }

  const auto len = r.get<std::uint64_t>("metadata length");
  if (len > r.remaining()) throw FormatError("truncated metadata", r.offset() + r.remaining());
  const auto meta_at = r.offset();
  std::string text(len, '\0');
  r.get_span(std::span<char>(text.data(), text.size()), "metadata");
  if (!r.at_end()) throw FormatError("trailing bytes", r.offset());
  json meta;
  try {
    meta = json::parse(text);
  } catch (const json::exception&) {
    throw FormatError("metadata is not valid JSON", meta_at);
  }

  NavGraph g(adj, R, static_cast<NodeId>(entry), std::move(meta));
  const std::string algo = g.build_meta().value("algorithm", "");
  if ((algo == "nsg" || algo == "vamana") && !all_reachable_from_entry(g))
    throw FormatError("refined graph has nodes unreachable from the default entry", entry_at);
  return g;
}

void save_graph(const NavGraph& g, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_graph(g));
}

NavGraph load_graph(const std::filesystem::path& path) { return decode_graph(detail::read_file(path)); }

}  // namespace epann
