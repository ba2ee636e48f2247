#include "epann/clustering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "epann/detail/binary_io.hpp"
#include "epann/errors.hpp"

namespace epann {

namespace {

using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrixD to_double_matrix(const VectorSet& set) {
  Eigen::Map<const RowMatrixF> m(set.data().data(), static_cast<Eigen::Index>(set.size()),
                                 static_cast<Eigen::Index>(set.dim()));
  return m.cast<double>();
}

// Exact nearest center for every point. Candidates are shortlisted with the
// expanded-form scores and then re-ranked with squared_l2, so the returned
// index is the true (distance, index) minimum.
std::size_t assign_all(const VectorSet& set, const RowMatrixD& X, const std::vector<double>& x_norms,
                       const VectorSet& centers, std::vector<std::uint32_t>& assignment) {
  const auto K = static_cast<Eigen::Index>(centers.size());
  const RowMatrixD C = to_double_matrix(centers);
  const Eigen::VectorXd c_norms = C.rowwise().squaredNorm();
  constexpr Eigen::Index kBlock = 2048;
  std::size_t changed = 0;
  const auto N = static_cast<Eigen::Index>(set.size());

  for (Eigen::Index begin = 0; begin < N; begin += kBlock) {
    const Eigen::Index rows = std::min(kBlock, N - begin);
    RowMatrixD scores = -2.0 * (X.middleRows(begin, rows) * C.transpose());
    scores.rowwise() += c_norms.transpose();

#pragma omp parallel for schedule(static) reduction(+ : changed)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto i = static_cast<std::size_t>(begin + r);
      const double* s = scores.data() + r * K;
      double best = s[0];
      for (Eigen::Index j = 1; j < K; ++j) best = std::min(best, s[j]);
      const double tol = 1e-9 * (x_norms[i] + std::abs(best) + 1.0);
      double best_d2 = std::numeric_limits<double>::infinity();
      std::uint32_t best_j = 0;
      for (Eigen::Index j = 0; j < K; ++j) {
        if (s[j] > best + tol) continue;
        const double d2 = squared_l2(set[i], centers[static_cast<std::size_t>(j)]);
        if (d2 < best_d2) {
          best_d2 = d2;
          best_j = static_cast<std::uint32_t>(j);
        }
      }
      if (assignment[i] != best_j) {
        assignment[i] = best_j;
        ++changed;
      }
    }
  }
  return changed;
}

double total_inertia(const VectorSet& set, const VectorSet& centers, const std::vector<std::uint32_t>& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) sum += squared_l2(set[i], centers[a[i]]);
  return sum;
}

VectorSet kmeanspp_init(const VectorSet& set, std::size_t K, std::mt19937_64& rng) {
  const std::size_t N = set.size();
  std::vector<std::size_t> chosen;
  std::vector<char> taken(N, 0);
  std::vector<double> d2(N, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t i) {
    chosen.push_back(i);
    taken[i] = 1;
    const auto c = set[i];
    for (std::size_t p = 0; p < N; ++p) d2[p] = std::min(d2[p], squared_l2(set[p], c));
  };

  take(std::uniform_int_distribution<std::size_t>(0, N - 1)(rng));
  while (chosen.size() < K) {
    double total = 0.0;
    for (std::size_t p = 0; p < N; ++p)
      if (!taken[p]) total += d2[p];
    std::size_t pick = N;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t p = 0; p < N; ++p) {
        if (taken[p] || d2[p] == 0.0) continue;
        pick = p;
        u -= d2[p];
        if (u < 0.0) break;
      }
    } else {
      // Every remaining point duplicates a chosen one: fall back to uniform.
      std::size_t rank = std::uniform_int_distribution<std::size_t>(0, N - chosen.size() - 1)(rng);
      for (std::size_t p = 0; p < N; ++p) {
        if (taken[p]) continue;
        if (rank-- == 0) {
          pick = p;
          break;
        }
      }
    }
    take(pick);
  }
  return gather(set, chosen);
}

// Means of the assigned points, accumulated per cluster in index order (the
// same order mean_vector uses). Empty clusters steal the point farthest from
// its current center among clusters that can spare one.
VectorSet update_centers(const VectorSet& set, const VectorSet& old_centers,
                         std::vector<std::uint32_t>& assignment) {
  const std::size_t K = old_centers.size();
  const std::size_t d = set.dim();
  std::vector<std::size_t> counts(K, 0);
  for (auto a : assignment) ++counts[a];

  for (std::size_t c = 0; c < K; ++c) {
    if (counts[c] != 0) continue;
    double worst = -1.0;
    std::size_t victim = set.size();
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (counts[assignment[i]] < 2) continue;
      const double dd = squared_l2(set[i], old_centers[assignment[i]]);
      if (dd > worst) {
        worst = dd;
        victim = i;
      }
    }
    if (victim == set.size()) throw InternalError("k-means: no point available to refill an empty cluster");
    --counts[assignment[victim]];
    assignment[victim] = static_cast<std::uint32_t>(c);
    counts[c] = 1;
  }

  std::vector<double> sums(K * d, 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    double* s = sums.data() + assignment[i] * d;
    const auto v = set[i];
    for (std::size_t j = 0; j < d; ++j) s[j] += v[j];
  }
  std::vector<float> out(K * d);
  for (std::size_t c = 0; c < K; ++c)
    for (std::size_t j = 0; j < d; ++j)
      out[c * d + j] = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
  return VectorSet(d, std::move(out));
}

}  // namespace

KMeansResult lloyd_kmeans(const VectorSet& set, std::size_t K, int n_iter, std::uint64_t seed) {
  if (K == 0) throw UsageError("k-means: K must be positive");
  if (K > set.size())
    throw UsageError("k-means: K=" + std::to_string(K) + " exceeds N=" + std::to_string(set.size()));
  if (n_iter < 1) throw UsageError("k-means: n_iter must be positive");

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centers = kmeanspp_init(set, K, rng);
  res.assignment.assign(set.size(), 0);

  const RowMatrixD X = to_double_matrix(set);
  std::vector<double> x_norms(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) x_norms[i] = X.row(static_cast<Eigen::Index>(i)).squaredNorm();

  for (int it = 0; it < n_iter; ++it) {
    const std::size_t changed = assign_all(set, X, x_norms, res.centers, res.assignment);
    if (it > 0 && changed == 0) break;
    res.centers = update_centers(set, res.centers, res.assignment);
    res.inertia_history.push_back(total_inertia(set, res.centers, res.assignment));
    ++res.iterations_run;
  }
  assign_all(set, X, x_norms, res.centers, res.assignment);
  res.inertia = total_inertia(set, res.centers, res.assignment);
  return res;
}

EntryPointIndex make_entry_candidates(const VectorSet& set, const VectorSet& centers) {
  if (centers.empty()) throw UsageError("make_entry_candidates: no centers");
  if (centers.dim() != set.dim()) throw UsageError("make_entry_candidates: dimension mismatch");
  EntryPointIndex eps;
  eps.ids.resize(centers.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(centers.size()); ++j)
    eps.ids[static_cast<std::size_t>(j)] = brute_force_knn(centers[static_cast<std::size_t>(j)], set, 1).ids[0];
  std::vector<std::size_t> rows(eps.ids.begin(), eps.ids.end());
  eps.vectors = gather(set, rows);
  return eps;
}

EntryBuildReport build_entry_index(const VectorSet& set, const EntryBuildOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  EntryBuildReport rep;
  const bool subsample = opts.K > 1 && opts.max_points_per_center > 0 &&
                         set.size() > opts.K * opts.max_points_per_center;
  if (subsample) {
    const std::size_t m = opts.K * opts.max_points_per_center;
    std::vector<std::size_t> perm(set.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(opts.seed ^ 0x5eedULL);
    for (std::size_t i = 0; i < m; ++i)
      std::swap(perm[i], perm[i + std::uniform_int_distribution<std::size_t>(0, set.size() - 1 - i)(rng)]);
    perm.resize(m);
    std::sort(perm.begin(), perm.end());
    rep.kmeans = lloyd_kmeans(gather(set, perm), opts.K, opts.n_iter, opts.seed);
    rep.training_points = m;
  } else {
    rep.kmeans = lloyd_kmeans(set, opts.K, opts.n_iter, opts.seed);
    rep.training_points = set.size();
  }
  rep.index = make_entry_candidates(set, rep.kmeans.centers);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::size_t select_entry_slot(std::span<const float> q, const EntryPointIndex& eps) {
  if (eps.ids.empty()) throw UsageError("select_entry: empty entry-point index");
  if (q.size() != eps.vectors.dim()) throw UsageError("select_entry: dimension mismatch");
  std::size_t best = 0;
  double best_d2 = squared_l2(q, eps.vectors[0]);
  for (std::size_t j = 1; j < eps.ids.size(); ++j) {
    const double d2 = squared_l2(q, eps.vectors[j]);
    if (d2 < best_d2 || (d2 == best_d2 && eps.ids[j] < eps.ids[best])) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

NodeId select_entry(std::span<const float> q, const EntryPointIndex& eps) {
  return eps.ids[select_entry_slot(q, eps)];
}

std::vector<char> encode_entry_index(const EntryPointIndex& eps) {
  if (eps.ids.size() != eps.vectors.size()) throw UsageError("entry index: id/vector count mismatch");
  detail::ByteWriter w;
  w.reserve(entry_index_bytes(eps.size(), eps.vectors.dim()));
  w.put_magic("MEPS");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(eps.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(eps.vectors.dim()));
  for (auto id : eps.ids) w.put<std::uint64_t>(id);
  w.put_span(eps.vectors.data());
  return std::move(w).take();
}

EntryPointIndex decode_entry_index(std::span<const char> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic("MEPS");
  const auto K = r.get<std::uint32_t>("K");
  const auto dim_at = r.offset();
  const auto dim = r.get<std::uint32_t>("dim");
  if (dim == 0) throw FormatError("zero dimension", dim_at);
  EntryPointIndex eps;
  eps.ids.reserve(K);
  for (std::uint32_t j = 0; j < K; ++j) {
    const auto at = r.offset();
    const auto id = r.get<std::uint64_t>("candidate id");
    if (id > std::numeric_limits<NodeId>::max()) throw FormatError("candidate id out of range", at);
    eps.ids.push_back(static_cast<NodeId>(id));
  }
  const auto payload_at = r.offset();
  std::vector<float> data(static_cast<std::size_t>(K) * dim);
  r.get_span(std::span<float>(data), "candidate vectors");
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data[i])) throw FormatError("non-finite value", payload_at + 4 * i);
  if (!r.at_end()) throw FormatError("trailing bytes", r.offset());
  eps.vectors = VectorSet(dim, std::move(data));
  return eps;
}

void save_entry_index(const EntryPointIndex& eps, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_entry_index(eps));
}

EntryPointIndex load_entry_index(const std::filesystem::path& path) {
  return decode_entry_index(detail::read_file(path));
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> VoronoiPartition::members(std::uint32_t cell) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cell_of.size(); ++i)
    if (cell_of[i] == cell) out.push_back(i);
  return out;
}

VoronoiPartition voronoi_assign(const VectorSet& points, const VectorSet& sites) {
  if (sites.empty()) throw UsageError("voronoi_assign: no sites");
  if (!points.empty() && points.dim() != sites.dim()) throw UsageError("voronoi_assign: dimension mismatch");
  VoronoiPartition part;
  part.sites = sites;
  part.cell_of.resize(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i) {
    const auto p = points[static_cast<std::size_t>(i)];
    std::uint32_t best = 0;
    double best_d2 = squared_l2(p, sites[0]);
    for (std::size_t j = 1; j < sites.size(); ++j) {
      const double d2 = squared_l2(p, sites[j]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<std::uint32_t>(j);
      }
    }
    part.cell_of[static_cast<std::size_t>(i)] = best;
  }
  return part;
}

double cell_diameter(const VectorSet& points, std::span<const std::size_t> rows) {
  double best = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      best = std::max(best, squared_l2(points[rows[a]], points[rows[b]]));
  return std::sqrt(best);
}

std::vector<double> cell_diameters(const VectorSet& points, const VoronoiPartition& partition) {
  std::vector<std::vector<std::size_t>> cells(partition.num_cells());
  for (std::size_t i = 0; i < partition.cell_of.size(); ++i) cells[partition.cell_of[i]].push_back(i);
  std::vector<double> out(cells.size());
  for (std::size_t j = 0; j < cells.size(); ++j) out[j] = cell_diameter(points, cells[j]);
  return out;
}

}  // namespace epann
