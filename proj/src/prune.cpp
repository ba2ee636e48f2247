#include "epann/detail/prune.hpp"

#include <algorithm>
#include <limits>

namespace epann::detail {

std::vector<Candidate> robust_prune(const VectorSet& set, std::span<const Candidate> pool, std::size_t R,
                                    double alpha, std::vector<PruneFate>* fates) {
  std::vector<Candidate> out;
  const std::size_t n = pool.size();
  std::vector<double> min_kept(n, std::numeric_limits<double>::infinity());
  std::vector<PruneFate> fate(n, PruneFate::unexamined);

  double cur = 1.0;
  while (true) {
    for (std::size_t t = 0; t < n && out.size() < R; ++t) {
      if (fate[t] == PruneFate::kept) continue;
      if (cur * cur * min_kept[t] < pool[t].d2) {
        fate[t] = PruneFate::occluded;
        continue;
      }
      fate[t] = PruneFate::kept;
      out.push_back(pool[t]);
      const auto v = set[pool[t].id];
      for (std::size_t w = 0; w < n; ++w) {
        if (fate[w] == PruneFate::kept) continue;
        min_kept[w] = std::min(min_kept[w], squared_l2(v, set[pool[w].id]));
      }
    }
    if (out.size() >= R || cur >= alpha) break;
    cur = std::min(cur * 1.2, alpha);
  }

  std::vector<Candidate> ordered;
  ordered.reserve(out.size());
  for (std::size_t t = 0; t < n; ++t)
    if (fate[t] == PruneFate::kept) ordered.push_back(pool[t]);
  if (fates) *fates = std::move(fate);
  return ordered;
}

void normalize_pool(std::vector<Candidate>& pool, NodeId self, std::size_t cap) {
  std::sort(pool.begin(), pool.end());
  std::vector<Candidate> out;
  out.reserve(std::min(pool.size(), cap));
  for (const auto& c : pool) {
    if (out.size() == cap) break;
    if (c.id == self) continue;
    if (!out.empty() && out.back().id == c.id) continue;
    out.push_back(c);
  }
  pool = std::move(out);
}

}  // namespace epann::detail
