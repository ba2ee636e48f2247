#pragma once

// Backward-hop analysis of paths and graphs: r-value profiles, minimum
// backward-hop paths, whole-graph certification of the backward-hop bound B,
// and the hop-bound quantities comparing adaptive and central entry points.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epann/clustering.hpp"
#include "epann/graph.hpp"
#include "epann/vectors.hpp"

namespace epann {

/// r[i] = d(x_i, t) - d(x_{i+1}, t) along a path; r >= 0 counts as forward.
struct PathRProfile {
  std::vector<NodeId> path;
  std::vector<double> r;
  std::vector<std::size_t> r_plus;   // indices with r >= 0
  std::vector<std::size_t> r_minus;  // indices with r < 0
  double start_distance = 0.0;       // d(x_0, t)
  double end_distance = 0.0;         // d(x_l, t)

  std::size_t b() const noexcept { return r_minus.size(); }
  double sum() const noexcept;
};

/// Profile of `path` toward database node `target`. The path need not end
/// at the target. Throws UsageError for fewer than two nodes.
PathRProfile r_profile(const VectorSet& set, std::span<const NodeId> path, NodeId target);
/// Same toward an arbitrary target vector.
PathRProfile r_profile(const VectorSet& set, std::span<const NodeId> path, std::span<const float> target);

/// In-neighbor lists of a NavGraph in CSR form.
class ReverseGraph {
 public:
  explicit ReverseGraph(const NavGraph& g);
  std::span<const NodeId> in_neighbors(NodeId v) const noexcept {
    return {ids_.data() + offsets_[v], static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }

 private:
  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> ids_;
};

inline constexpr std::uint32_t kNoPath = 0xFFFFFFFFu;

/// Minimum backward-hop counts from every source to one fixed target.
///
/// Relative to target t an edge (u, v) costs 1 when d(v, t) > d(u, t) and 0
/// otherwise; b(s) is the 0/1 shortest-path distance from s to t. Among
/// paths attaining b(s), witness(s) has the fewest hops and, among those, is
/// lexicographically smallest by node id.
class MinBField {
 public:
  MinBField(const NavGraph& g, const ReverseGraph& rg, const VectorSet& set, NodeId target);

  NodeId target() const noexcept { return target_; }
  std::uint32_t b(NodeId s) const noexcept { return b_[s]; }  // kNoPath when t is unreachable
  std::uint32_t hops(NodeId s) const noexcept { return hops_[s]; }
  NodeId next(NodeId s) const noexcept { return next_[s]; }  // successor on the witness
  double distance_to_target(NodeId v) const noexcept { return dt_[v]; }
  std::vector<NodeId> witness(NodeId s) const;  // empty when unreachable

 private:
  NodeId target_;
  std::vector<double> dt_;
  std::vector<std::uint32_t> b_;
  std::vector<std::uint32_t> hops_;
  std::vector<NodeId> next_;
};

struct MinBPath {
  bool reachable = false;
  std::uint32_t b = 0;
  std::vector<NodeId> path;  // s ... t; {s} when s == t
};

MinBPath min_b(const NavGraph& g, const VectorSet& set, NodeId s, NodeId t);

// ---------------------------------------------------------------------------

struct PairWitness {
  NodeId s = 0, t = 0;
  std::uint32_t b = 0;
  std::vector<NodeId> path;
};

struct CertifyOptions {
  std::size_t exact_threshold = 2000;  // all ordered pairs when N <= this
  std::size_t pair_budget = 200000;    // sampled ordered pairs otherwise
  std::uint64_t seed = 0;
  bool force_exact = false;
  bool keep_witnesses = false;         // store one witness path per evaluated pair
};

struct MsnetCertificate {
  std::uint32_t B = 0;                 // max min-b over evaluated, reachable pairs
  bool exact = false;                  // false: B is a lower bound from a sample
  std::size_t node_count = 0;
  std::size_t pairs_evaluated = 0;     // ordered pairs with s != t
  std::size_t unreachable_pairs = 0;
  std::vector<std::uint64_t> histogram;  // histogram[b] = number of pairs with min-b b
  std::vector<std::uint32_t> b_matrix;   // exact only: [s * N + t], kNoPath if unreachable
  std::optional<PairWitness> worst;      // a pair attaining B (smallest (t, s))
  std::vector<PairWitness> witnesses;    // when keep_witnesses

  std::uint32_t b_at(NodeId s, NodeId t) const { return b_matrix.at(static_cast<std::size_t>(s) * node_count + t); }
};

MsnetCertificate certify_bmsnet(const NavGraph& g, const VectorSet& set, const CertifyOptions& opts = {});
json to_json(const MsnetCertificate& c);

// ---------------------------------------------------------------------------

enum class Condition { i, ii, neither };
std::string to_string(Condition c);

struct CellQuantities {
  std::size_t db_members = 0;
  std::size_t query_members = 0;
  double diameter = 0.0;                // R_j over database points and queries in the cell
  std::size_t hops_in_family = 0;       // hops contributing to r_plus / r_minus
  std::optional<double> r_plus;         // min r >= 0; absent when undefined
  double r_minus = 0.0;                 // max |r| over r < 0 (0 when none)
  std::optional<double> l_bar;          // R_j / r+_j + B (1 + r-_j / r+_j)
  bool ordering_holds = true;           // R_j <= R, r+ <= r+_j, r- >= r-_j
};

struct QueryBound {
  std::size_t query = 0;
  NodeId gt = 0;
  std::uint32_t cell_query = 0;
  std::uint32_t cell_gt = 0;
  Condition condition = Condition::neither;
  double delta = 0.0;                   // |q - GT(q)|
  std::optional<double> l_bar;          // only for conditions (i) and (ii)
  std::optional<bool> bound_holds;      // l_bar <= l0 when both are defined
};

struct TheoremReport {
  std::uint32_t B = 0;
  std::string family;
  double diameter = 0.0;                // global R
  std::size_t hops_in_family = 0;
  std::optional<double> r_plus;
  double r_minus = 0.0;
  std::optional<double> l0;             // R / r+ + B (1 + r- / r+)
  std::vector<CellQuantities> cells;
  std::vector<QueryBound> queries;

  std::size_t count(Condition c) const;
  bool all_bounds_hold() const;         // every defined (i)/(ii) bound satisfies l_bar <= l0
  bool all_cells_ordered() const;
};

/// An extra path for the family, checked toward `target`.
struct ProvidedPath {
  std::vector<NodeId> path;
  NodeId target = 0;
};

struct TheoremInputs {
  const NavGraph* graph = nullptr;
  const VectorSet* base = nullptr;
  const VectorSet* queries = nullptr;     // may be empty
  const EntryPointIndex* eps = nullptr;   // Voronoi sites
  std::span<const NodeId> gt;             // exact nearest database id per query
  std::uint32_t B = 0;
  bool use_witnesses = true;              // min-b witness paths of all ordered pairs
  std::vector<ProvidedPath> provided;     // optional additional paths
};

/// Evaluates cell and global hop bounds over one fixed path family: the
/// witness paths of all ordered database pairs with min-b <= B, plus any
/// provided paths whose backward-hop count is <= B. Cell quantities use the
/// pairs whose two endpoints share a cell.
TheoremReport theorem_quantities(const TheoremInputs& in);
json to_json(const TheoremReport& r);

}  // namespace epann
