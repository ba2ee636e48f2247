#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "epann/vectors.hpp"

namespace epann {

struct KMeansResult {
  VectorSet centers;                      // K x d, rounded from double-precision means
  std::vector<std::uint32_t> assignment;  // length N, values in [0, K)
  double inertia = 0.0;                   // sum of squared distances to the assigned center
  int iterations_run = 0;
  std::vector<double> inertia_history;    // inertia after every completed iteration
};

/// Lloyd's algorithm from a seeded k-means++ start. Stops after `n_iter`
/// iterations or as soon as an iteration changes no assignment.
///
/// The assignment step uses the expanded form |x|^2 - 2<x,c> + |c|^2 in
/// double precision via a dense matrix product; reported inertia is always
/// recomputed with the exact kernel.
KMeansResult lloyd_kmeans(const VectorSet& set, std::size_t K, int n_iter, std::uint64_t seed);

/// The K candidate entry points: database rows nearest to each center.
struct EntryPointIndex {
  std::vector<NodeId> ids;
  VectorSet vectors;  // vectors[j] is a copy of database row ids[j]

  std::size_t size() const noexcept { return ids.size(); }
  friend bool operator==(const EntryPointIndex&, const EntryPointIndex&) = default;
};

/// Snaps every center to its nearest database row. Duplicates are kept, so
/// the result always has exactly centers.size() entries.
EntryPointIndex make_entry_candidates(const VectorSet& set, const VectorSet& centers);

struct EntryBuildOptions {
  std::size_t K = 64;
  int n_iter = 25;
  std::uint64_t seed = 0;
  /// When non-zero and N > K * max_points_per_center, k-means trains on a
  /// seeded uniform sample of that many points per center. Snapping to the
  /// database always uses the full set. K = 1 never samples.
  std::size_t max_points_per_center = 0;
};

struct EntryBuildReport {
  EntryPointIndex index;
  KMeansResult kmeans;
  std::size_t training_points = 0;
  double seconds = 0.0;  // wall time of k-means plus snapping
};

EntryBuildReport build_entry_index(const VectorSet& set, const EntryBuildOptions& opts);

/// Slot j of the candidate nearest to q (ties to the smaller node id, then
/// the smaller slot). One linear scan over the K candidate vectors.
std::size_t select_entry_slot(std::span<const float> q, const EntryPointIndex& eps);

/// candidate id at select_entry_slot(q, eps).
NodeId select_entry(std::span<const float> q, const EntryPointIndex& eps);

/// "MEPS", u32 K, u32 dim, K x u64 ids, K x d float32.
std::vector<char> encode_entry_index(const EntryPointIndex& eps);
EntryPointIndex decode_entry_index(std::span<const char> bytes);
void save_entry_index(const EntryPointIndex& eps, const std::filesystem::path& path);
EntryPointIndex load_entry_index(const std::filesystem::path& path);

/// Exact serialized size of an index with K candidates in dimension d.
constexpr std::uint64_t entry_index_bytes(std::uint64_t K, std::uint64_t dim) {
  return 4 + 4 + 4 + K * 8 + K * dim * 4;
}

// ---------------------------------------------------------------------------
// Voronoi analytics

struct VoronoiPartition {
  VectorSet sites;
  std::vector<std::uint32_t> cell_of;  // per point, index into sites

  std::size_t num_cells() const noexcept { return sites.size(); }
  /// Point indices assigned to `cell`, ascending.
  std::vector<std::size_t> members(std::uint32_t cell) const;
};

/// Nearest-site assignment for every row of `points`; ties go to the lower
/// site index.
VoronoiPartition voronoi_assign(const VectorSet& points, const VectorSet& sites);

/// Largest pairwise distance among the given rows of `points`; 0 for fewer
/// than two rows.
double cell_diameter(const VectorSet& points, std::span<const std::size_t> rows);

/// Diameter of every cell of `partition` (whose points are `points`).
std::vector<double> cell_diameters(const VectorSet& points, const VoronoiPartition& partition);

}  // namespace epann
