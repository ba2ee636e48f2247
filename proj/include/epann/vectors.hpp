#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace epann {

/// Node ids index rows of a VectorSet directly (node i <-> row i).
using NodeId = std::uint32_t;

/// Dense row-major N x d collection of finite float vectors. Immutable once
/// constructed, so it can be shared across search threads without locking.
class VectorSet {
 public:
  VectorSet() = default;

  /// Takes ownership of `data` (row-major, `data.size()` a multiple of `dim`).
  /// Throws UsageError on dim == 0, a ragged buffer, or a NaN/Inf entry.
  VectorSet(std::size_t dim, std::vector<float> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const float> operator[](std::size_t i) const noexcept {
    assert(i < count_);
    return {data_.data() + i * dim_, dim_};
  }

  std::span<const float> data() const noexcept { return data_; }

  friend bool operator==(const VectorSet&, const VectorSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
  std::vector<float> data_;
};

/// Rows of `a` followed by rows of `b`; both must share a dimension.
VectorSet concat(const VectorSet& a, const VectorSet& b);

/// Selects rows by index, in the given order.
VectorSet gather(const VectorSet& set, std::span<const std::size_t> rows);

/// Result carrier for exact and approximate k-NN queries: ids ascending by
/// (distance, id).
struct NeighborList {
  std::vector<NodeId> ids;
  std::vector<double> dists;

  std::size_t size() const noexcept { return ids.size(); }
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

/// Squared Euclidean distance with double accumulation. Unchecked hot-path
/// kernel: the caller guarantees equal lengths.
inline double squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
  assert(a.size() == b.size());
  const std::size_t d = a.size();
  const float* pa = a.data();
  const float* pb = b.data();
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= d; i += 8) {
    for (int j = 0; j < 8; ++j) {
      const double t = static_cast<double>(pa[i + j]) - static_cast<double>(pb[i + j]);
      acc[j] += t * t;
    }
  }
  double s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < d; ++i) {
    const double t = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    s += t * t;
  }
  return s;
}

/// Euclidean distance. Throws UsageError on a dimension mismatch.
double l2_distance(std::span<const float> a, std::span<const float> b);

/// Exact top-k of `set` around `q`, ties broken by ascending id.
/// Throws UsageError when k > set.size() or dims differ.
NeighborList brute_force_knn(std::span<const float> q, const VectorSet& set, std::size_t k);

/// brute_force_knn for every row of `queries`, parallel over queries.
std::vector<NeighborList> brute_force_knn_batch(const VectorSet& queries, const VectorSet& set,
                                                std::size_t k);

/// Component-wise mean, accumulated in double and rounded to float.
std::vector<float> mean_vector(const VectorSet& set);

// ---------------------------------------------------------------------------
// Dataset files
//
// fvecs/ivecs: per record an int32 little-endian dimension followed by that
// many float32 (fvecs) or int32 (ivecs) values.
// mann: "MANN", u32 version, u32 dim, u64 count, raw float32 payload.

enum class VectorFormat { fvecs, mann };

/// Guesses the format from the extension (".fvecs" -> fvecs, else mann).
VectorFormat format_from_path(const std::filesystem::path& path);

VectorSet read_vectors(const std::filesystem::path& path, VectorFormat format);
void write_vectors(const VectorSet& set, const std::filesystem::path& path, VectorFormat format);

/// Byte-level codecs behind read_vectors/write_vectors.
std::vector<char> encode_vectors(const VectorSet& set, VectorFormat format);
VectorSet decode_vectors(std::span<const char> bytes, VectorFormat format);

/// Integer rows of an ivecs file; all rows must share one width.
struct IdRows {
  std::size_t width = 0;
  std::vector<std::vector<std::int32_t>> rows;
  friend bool operator==(const IdRows&, const IdRows&) = default;
};

IdRows read_ivecs(const std::filesystem::path& path);
void write_ivecs(const IdRows& rows, const std::filesystem::path& path);
std::vector<char> encode_ivecs(const IdRows& rows);
IdRows decode_ivecs(std::span<const char> bytes);

/// Ground-truth helpers: ivecs rows <-> id-only neighbor lists.
IdRows to_id_rows(std::span<const NeighborList> lists);
std::vector<NeighborList> to_neighbor_lists(const IdRows& rows);

}  // namespace epann
