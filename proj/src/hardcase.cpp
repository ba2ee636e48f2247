#include "epann/hardcase.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "epann/errors.hpp"

namespace epann {

HardInstanceSpec HardInstanceSpec::triangle() {
  HardInstanceSpec s;
  s.layout = "triangle";
  s.island_centers = {{0.0, 0.0}, {40.0, 0.0}, {20.0, 35.0}};
  s.gt_offset = {200.0, 200.0};
  return s;
}

HardInstanceSpec HardInstanceSpec::collinear() { return HardInstanceSpec{}; }

void HardInstanceSpec::validate() const {
  if (dim < 2) throw UsageError("hard instance: dim must be >= 2");
  if (island_centers.empty()) throw UsageError("hard instance: at least one island required");
  if (gt_cluster_size == 0) throw UsageError("hard instance: gt_cluster_size must be positive");
  if (n_total < gt_cluster_size + island_centers.size())
    throw UsageError("hard instance: n_total too small for the islands and GT cluster");
  if (island_spread <= 0 || gt_spread < 0 || query_noise < 0) throw UsageError("hard instance: negative spread");
  if (n_queries == 0) throw UsageError("hard instance: need at least one query");
  // Conservative separation: 6-sigma envelopes must stay more than
  // 5 island spreads apart.
  for (const auto& c : island_centers) {
    const double d = std::hypot(c[0] - gt_offset[0], c[1] - gt_offset[1]);
    const double gap = d - 6.0 * (island_spread + gt_spread) * std::sqrt(static_cast<double>(dim) / 2.0);
    if (gap <= 5.0 * island_spread)
      throw UsageError("hard instance: GT cluster is not disjoint from the island at (" + std::to_string(c[0]) + ", " +
                       std::to_string(c[1]) + ")");
  }
}

nlohmann::json to_json(const HardInstanceSpec& s) {
  nlohmann::json islands = nlohmann::json::array();
  for (const auto& c : s.island_centers) islands.push_back({c[0], c[1]});
  return {{"layout", s.layout},
          {"n_total", s.n_total},
          {"dim", s.dim},
          {"island_centers", islands},
          {"island_spread", s.island_spread},
          {"gt_cluster_size", s.gt_cluster_size},
          {"gt_offset", {s.gt_offset[0], s.gt_offset[1]}},
          {"gt_spread", s.gt_spread},
          {"query_offset", {s.query_offset[0], s.query_offset[1]}},
          {"query_noise", s.query_noise},
          {"n_queries", s.n_queries},
          {"seed", s.seed}};
}

HardInstanceSpec hard_spec_from_json(const nlohmann::json& j) {
  HardInstanceSpec s;
  try {
    s.layout = j.value("layout", s.layout);
    s.n_total = j.value("n_total", s.n_total);
    s.dim = j.value("dim", s.dim);
    if (j.contains("island_centers")) {
      s.island_centers.clear();
      for (const auto& c : j.at("island_centers")) s.island_centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    }
    s.island_spread = j.value("island_spread", s.island_spread);
    s.gt_cluster_size = j.value("gt_cluster_size", s.gt_cluster_size);
    if (j.contains("gt_offset")) s.gt_offset = {j["gt_offset"].at(0).get<double>(), j["gt_offset"].at(1).get<double>()};
    s.gt_spread = j.value("gt_spread", s.gt_spread);
    if (j.contains("query_offset"))
      s.query_offset = {j["query_offset"].at(0).get<double>(), j["query_offset"].at(1).get<double>()};
    s.query_noise = j.value("query_noise", s.query_noise);
    s.n_queries = j.value("n_queries", s.n_queries);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("hard instance spec: ") + e.what());
  }
  s.validate();
  return s;
}

HardInstance gen_hard_instance(const HardInstanceSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = spec.dim;

  auto emit = [&](std::vector<float>& out, const Point2& center, double spread) {
    out.push_back(static_cast<float>(center[0] + spread * normal(rng)));
    out.push_back(static_cast<float>(center[1] + spread * normal(rng)));
    for (std::size_t j = 2; j < d; ++j) out.push_back(static_cast<float>(spread * normal(rng)));
  };

  std::vector<float> base;
  base.reserve(spec.n_total * d);
  const std::size_t n_islands = spec.island_centers.size();
  const std::size_t island_points = spec.n_total - spec.gt_cluster_size;
  for (std::size_t k = 0; k < n_islands; ++k) {
    const std::size_t count = island_points / n_islands + (k < island_points % n_islands ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) emit(base, spec.island_centers[k], spec.island_spread);
  }
  HardInstance inst;
  for (std::size_t i = 0; i < spec.gt_cluster_size; ++i) {
    inst.planted.push_back(static_cast<NodeId>(island_points + i));
    emit(base, spec.gt_offset, spec.gt_spread);
  }

  std::vector<float> queries;
  const Point2 qc{spec.gt_offset[0] + spec.query_offset[0], spec.gt_offset[1] + spec.query_offset[1]};
  for (std::size_t i = 0; i < spec.n_queries; ++i) emit(queries, qc, spec.query_noise);

  inst.base = VectorSet(d, std::move(base));
  inst.queries = VectorSet(d, std::move(queries));

  // Empirical disjointness and planted-GT exactness.
  double min_gap2 = std::numeric_limits<double>::infinity();
  for (NodeId g : inst.planted)
    for (std::size_t i = 0; i < island_points; ++i) min_gap2 = std::min(min_gap2, squared_l2(inst.base[g], inst.base[i]));
  if (std::sqrt(min_gap2) <= 5.0 * spec.island_spread)
    throw UsageError("hard instance: generated GT cluster lies within 5 island spreads of an island");

  inst.gt = brute_force_knn_batch(inst.queries, inst.base, spec.gt_cluster_size);
  for (const auto& nl : inst.gt) {
    std::vector<NodeId> ids = nl.ids;
    std::sort(ids.begin(), ids.end());
    if (ids != inst.planted) throw InternalError("hard instance: a query's exact neighbors are not the planted cluster");
  }
  return inst;
}

OverlayReport voronoi_overlay(const VectorSet& base, const EntryPointIndex& eps, const VectorSet& queries,
                              const std::vector<NeighborList>& gt) {
  if (gt.size() != queries.size()) throw UsageError("overlay: one ground-truth list per query required");
  OverlayReport rep;
  const auto qpart = voronoi_assign(queries, eps.vectors);
  const auto bpart = voronoi_assign(base, eps.vectors);
  rep.query_cell = qpart.cell_of;
  rep.base_cell = bpart.cell_of;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (gt[i].ids.empty()) throw UsageError("overlay: empty ground-truth list");
    const auto cell = bpart.cell_of[gt[i].ids[0]];
    rep.gt_cell.push_back(cell);
    rep.same_cell.push_back(cell == rep.query_cell[i]);
    rep.same_count += cell == rep.query_cell[i];
  }
  return rep;
}

nlohmann::json to_json(const OverlayReport& r, bool include_base_cells) {
  nlohmann::json j = {{"query_cell", r.query_cell},
                      {"gt_cell", r.gt_cell},
                      {"same_cell", r.same_cell},
                      {"same_count", r.same_count},
                      {"queries", r.query_cell.size()}};
  if (include_base_cells) j["base_cell"] = r.base_cell;
  return j;
}

}  // namespace epann
