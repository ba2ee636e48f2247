#pragma once

// Adversarial instances: dense islands plus a tiny, distant cluster holding
// every query's true neighbors.

#include <array>
#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "epann/clustering.hpp"
#include "epann/vectors.hpp"

namespace epann {

using Point2 = std::array<double, 2>;

struct HardInstanceSpec {
  std::string layout = "collinear";  // informational tag written to spec.json
  std::size_t n_total = 100000;
  std::size_t dim = 2;              // extra axes carry isotropic noise of the owning cluster
  std::vector<Point2> island_centers{{-200.0, 0.0}, {0.0, 0.0}, {200.0, 0.0}};
  double island_spread = 1.0;
  std::size_t gt_cluster_size = 10;
  Point2 gt_offset{-200.0, -4000.0};  // GT cluster center
  double gt_spread = 0.1;
  Point2 query_offset{0.0, 0.0};    // query center relative to the GT center
  double query_noise = 0.05;
  std::size_t n_queries = 100;
  std::uint64_t seed = 0;

  /// Islands at (0,0), (40,0), (20,35) with the GT cluster at (200,200).
  /// Search from the central entry reaches the GT-facing island directly,
  /// so this is a mild instance.
  static HardInstanceSpec triangle();
  /// The defaults: three collinear islands, GT cluster far below the left
  /// one. The central entry sits in the middle island, whose links to the
  /// other islands leave from its far sides, nearly orthogonal to the
  /// query direction.
  static HardInstanceSpec collinear();

  void validate() const;  // throws UsageError
};

nlohmann::json to_json(const HardInstanceSpec& s);
HardInstanceSpec hard_spec_from_json(const nlohmann::json& j);

struct HardInstance {
  VectorSet base;
  VectorSet queries;
  std::vector<NeighborList> gt;  // exact top-gt_cluster_size per query
  std::vector<NodeId> planted;   // ids of the GT cluster (the last rows of base)
};

/// Islands split n_total - gt_cluster_size points evenly (remainder to the
/// first islands); the GT cluster occupies the last ids. Verifies that every
/// query's exact top-gt_cluster_size is exactly the planted cluster.
HardInstance gen_hard_instance(const HardInstanceSpec& spec);

struct OverlayReport {
  std::vector<std::uint32_t> query_cell;
  std::vector<std::uint32_t> gt_cell;  // cell of each query's nearest ground truth
  std::vector<bool> same_cell;
  std::size_t same_count = 0;
  std::vector<std::uint32_t> base_cell;  // cell of every database point
};

/// Voronoi cells of queries and their ground truths under the candidate
/// sites of `eps`.
OverlayReport voronoi_overlay(const VectorSet& base, const EntryPointIndex& eps, const VectorSet& queries,
                              const std::vector<NeighborList>& gt);
nlohmann::json to_json(const OverlayReport& r, bool include_base_cells = false);

}  // namespace epann
