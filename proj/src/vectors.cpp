#include "epann/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "epann/detail/binary_io.hpp"
#include "epann/errors.hpp"

namespace epann {

namespace {

constexpr std::uint32_t kMannVersion = 1;

void check_finite(std::span<const float> data, std::size_t dim) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]))
      throw UsageError("non-finite value at row " + std::to_string(i / dim) + ", column " +
                       std::to_string(i % dim));
  }
}

}  // namespace

VectorSet::VectorSet(std::size_t dim, std::vector<float> data) : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw UsageError("vector dimension must be positive");
  if (data_.size() % dim_ != 0)
    throw UsageError("buffer of " + std::to_string(data_.size()) + " floats is not a multiple of dim " +
                     std::to_string(dim_));
  check_finite(data_, dim_);
  count_ = data_.size() / dim_;
}

VectorSet concat(const VectorSet& a, const VectorSet& b) {
  if (a.dim() != b.dim()) throw UsageError("concat: dimension mismatch");
  std::vector<float> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return VectorSet(a.dim(), std::move(data));
}

VectorSet gather(const VectorSet& set, std::span<const std::size_t> rows) {
  std::vector<float> data;
  data.reserve(rows.size() * set.dim());
  for (auto r : rows) {
    if (r >= set.size()) throw UsageError("gather: row out of range");
    auto v = set[r];
    data.insert(data.end(), v.begin(), v.end());
  }
  return VectorSet(set.dim(), std::move(data));
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw UsageError("l2_distance: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  return std::sqrt(squared_l2(a, b));
}

NeighborList brute_force_knn(std::span<const float> q, const VectorSet& set, std::size_t k) {
  if (q.size() != set.dim()) throw UsageError("brute_force_knn: dimension mismatch");
  if (k > set.size())
    throw UsageError("brute_force_knn: k=" + std::to_string(k) + " exceeds N=" + std::to_string(set.size()));
  std::vector<std::pair<double, NodeId>> all(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) all[i] = {squared_l2(q, set[i]), static_cast<NodeId>(i)};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  NeighborList out;
  out.ids.reserve(k);
  out.dists.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.ids.push_back(all[i].second);
    out.dists.push_back(std::sqrt(all[i].first));
  }
  return out;
}

std::vector<NeighborList> brute_force_knn_batch(const VectorSet& queries, const VectorSet& set,
                                                std::size_t k) {
  if (queries.dim() != set.dim()) throw UsageError("brute_force_knn_batch: dimension mismatch");
  if (k > set.size()) throw UsageError("brute_force_knn_batch: k exceeds N");
  std::vector<NeighborList> out(queries.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i)
    out[static_cast<std::size_t>(i)] = brute_force_knn(queries[static_cast<std::size_t>(i)], set, k);
  return out;
}

std::vector<float> mean_vector(const VectorSet& set) {
  if (set.empty()) throw UsageError("mean_vector: empty set");
  std::vector<double> sum(set.dim(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto v = set[i];
    for (std::size_t j = 0; j < set.dim(); ++j) sum[j] += v[j];
  }
  std::vector<float> mean(set.dim());
  for (std::size_t j = 0; j < set.dim(); ++j)
    mean[j] = static_cast<float>(sum[j] / static_cast<double>(set.size()));
  return mean;
}

// ---------------------------------------------------------------------------

VectorFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".fvecs" ? VectorFormat::fvecs : VectorFormat::mann;
}

std::vector<char> encode_vectors(const VectorSet& set, VectorFormat format) {
  detail::ByteWriter w;
  if (format == VectorFormat::mann) {
    w.reserve(20 + set.data().size_bytes());
    w.put_magic("MANN");
    w.put<std::uint32_t>(kMannVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.dim()));
    w.put<std::uint64_t>(set.size());
    w.put_span(set.data());
  } else {
    w.reserve(set.size() * (4 + set.dim() * 4));
    for (std::size_t i = 0; i < set.size(); ++i) {
      w.put<std::int32_t>(static_cast<std::int32_t>(set.dim()));
      w.put_span(set[i]);
    }
  }
  return std::move(w).take();
}

namespace {

std::vector<float> read_finite_floats(detail::ByteReader& r, std::size_t n) {
  const auto start = r.offset();
  std::vector<float> values(n);
  r.get_span(std::span<float>(values), "float payload");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(values[i])) throw FormatError("non-finite value", start + 4 * i);
  return values;
}

}  // namespace

VectorSet decode_vectors(std::span<const char> bytes, VectorFormat format) {
  detail::ByteReader r(bytes);
  if (format == VectorFormat::mann) {
    r.expect_magic("MANN");
    const auto version_at = r.offset();
    if (r.get<std::uint32_t>("version") != kMannVersion) throw FormatError("unsupported version", version_at);
    const auto dim_at = r.offset();
    const auto dim = r.get<std::uint32_t>("dim");
    if (dim == 0) throw FormatError("zero dimension", dim_at);
    const auto count = r.get<std::uint64_t>("count");
    if (r.remaining() != count * dim * 4) {
      if (r.remaining() < count * dim * 4)
        throw FormatError("truncated payload", r.offset() + r.remaining());
      throw FormatError("trailing bytes after payload", r.offset() + count * dim * 4);
    }
    auto data = read_finite_floats(r, count * dim);
    return VectorSet(dim, std::move(data));
  }

  std::vector<float> data;
  std::size_t dim = 0;
  while (!r.at_end()) {
    const auto record_at = r.offset();
    const auto d = r.get<std::int32_t>("record header");
    if (d <= 0) throw FormatError("non-positive record dimension", record_at);
    if (dim == 0) dim = static_cast<std::size_t>(d);
    if (static_cast<std::size_t>(d) != dim)
      throw FormatError("record dimension " + std::to_string(d) + " differs from " + std::to_string(dim),
                        record_at);
    auto row = read_finite_floats(r, dim);
    data.insert(data.end(), row.begin(), row.end());
  }
  if (dim == 0) throw FormatError("empty fvecs file has no dimension", 0);
  return VectorSet(dim, std::move(data));
}

VectorSet read_vectors(const std::filesystem::path& path, VectorFormat format) {
  const auto bytes = detail::read_file(path);
  return decode_vectors(bytes, format);
}

void write_vectors(const VectorSet& set, const std::filesystem::path& path, VectorFormat format) {
  if (format == VectorFormat::fvecs && set.empty())
    throw UsageError("an empty set cannot be written as fvecs (no record carries the dimension)");
  detail::write_file_atomic(path, encode_vectors(set, format));
}

std::vector<char> encode_ivecs(const IdRows& rows) {
  detail::ByteWriter w;
  for (const auto& row : rows.rows) {
    if (row.size() != rows.width) throw UsageError("encode_ivecs: ragged rows");
    w.put<std::int32_t>(static_cast<std::int32_t>(row.size()));
    w.put_span(std::span<const std::int32_t>(row));
  }
  return std::move(w).take();
}

IdRows decode_ivecs(std::span<const char> bytes) {
  detail::ByteReader r(bytes);
  IdRows out;
  while (!r.at_end()) {
    const auto record_at = r.offset();
    const auto d = r.get<std::int32_t>("record header");
    if (d <= 0) throw FormatError("non-positive record dimension", record_at);
    if (out.rows.empty()) out.width = static_cast<std::size_t>(d);
    if (static_cast<std::size_t>(d) != out.width)
      throw FormatError("record dimension " + std::to_string(d) + " differs from " +
                            std::to_string(out.width),
                        record_at);
    std::vector<std::int32_t> row(out.width);
    r.get_span(std::span<std::int32_t>(row), "int payload");
    out.rows.push_back(std::move(row));
  }
  return out;
}

IdRows read_ivecs(const std::filesystem::path& path) { return decode_ivecs(detail::read_file(path)); }

void write_ivecs(const IdRows& rows, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_ivecs(rows));
}

IdRows to_id_rows(std::span<const NeighborList> lists) {
  IdRows out;
  if (lists.empty()) return out;
  out.width = lists.front().size();
  for (const auto& l : lists) {
    if (l.size() != out.width) throw UsageError("to_id_rows: lists differ in length");
    out.rows.emplace_back(l.ids.begin(), l.ids.end());
  }
  return out;
}

std::vector<NeighborList> to_neighbor_lists(const IdRows& rows) {
  std::vector<NeighborList> out;
  out.reserve(rows.rows.size());
  for (const auto& row : rows.rows) {
    NeighborList l;
    for (auto id : row) {
      if (id < 0) throw UsageError("negative id in ground truth");
      l.ids.push_back(static_cast<NodeId>(id));
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace epann
