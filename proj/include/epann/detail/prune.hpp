#pragma once

// Edge selection rules used by NSG and Vamana refinement.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "epann/vectors.hpp"

namespace epann::detail {

struct Candidate {
  double d2;  // squared distance to the node being pruned
  NodeId id;

  friend bool operator<(const Candidate& a, const Candidate& b) noexcept {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
  }
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

enum class PruneFate : std::uint8_t { unexamined, kept, occluded };

/// Robust (alpha) pruning in rounds of increasing slack: alpha_r = 1, 1.2,
/// 1.44, ... capped at `alpha`. In a round, a candidate w is kept unless some
/// already kept v satisfies alpha_r * d(v, w) < d(p, w). Kept candidates are
/// returned in pool order; at most R are kept.
///
/// With alpha = 1 there is one round and this is exactly the NSG occlusion
/// rule. `pool` must be sorted ascending, duplicate-free and exclude p.
/// `fates`, when given, receives the outcome of every pool entry.
std::vector<Candidate> robust_prune(const VectorSet& set, std::span<const Candidate> pool, std::size_t R,
                                    double alpha, std::vector<PruneFate>* fates = nullptr);

inline std::vector<Candidate> occlusion_prune(const VectorSet& set, std::span<const Candidate> pool,
                                              std::size_t R) {
  return robust_prune(set, pool, R, 1.0);
}

/// Sorts, removes duplicate ids and `self`, truncates to `cap`.
void normalize_pool(std::vector<Candidate>& pool, NodeId self, std::size_t cap);

}  // namespace epann::detail
