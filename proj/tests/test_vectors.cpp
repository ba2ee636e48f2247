#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "epann/detail/binary_io.hpp"
#include "epann/errors.hpp"
#include "epann/vectors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace epann;

TEST_CASE("l2_distance on a 128-dim pair matches a long-double reference") {
  std::mt19937_64 rng(11);
  const auto s = oracle::random_set(2, 128, rng, 3.0);
  const double ref = oracle::dist(s[0], s[1]);
  CHECK(std::abs(l2_distance(s[0], s[1]) - ref) <= 1e-4 * ref);
}

TEST_CASE("l2_distance rejects mismatched dimensions") {
  const std::vector<float> a{1, 2}, b{1, 2, 3};
  CHECK_THROWS_AS(l2_distance(a, b), UsageError);
}

TEST_CASE("VectorSet rejects ragged buffers and non-finite values") {
  CHECK_THROWS_AS(VectorSet(3, std::vector<float>{1, 2, 3, 4}), UsageError);
  CHECK_THROWS_AS(VectorSet(0, std::vector<float>{}), UsageError);
  CHECK_THROWS_AS(VectorSet(2, std::vector<float>{1, NAN}), UsageError);
  CHECK_THROWS_AS(VectorSet(2, std::vector<float>{INFINITY, 0}), UsageError);
}

TEST_CASE("brute_force_knn on four planar points") {
  // Points on a plane; distances from q = (0,0): 1, 2, sqrt(2), 3.
  const VectorSet s(2, {1, 0, 0, 2, 1, 1, 3, 0});
  const std::vector<float> q{0, 0};
  const auto r = brute_force_knn(q, s, 2);
  REQUIRE(r.ids == std::vector<NodeId>{0, 2});
  CHECK(r.dists[0] == doctest::Approx(1.0));
  CHECK(r.dists[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(brute_force_knn(q, s, 5), UsageError);
}

TEST_CASE("brute_force_knn breaks ties by id") {
  const VectorSet s(1, {1, -1, 1, -1});
  const std::vector<float> q{0};
  CHECK(brute_force_knn(q, s, 4).ids == std::vector<NodeId>{0, 1, 2, 3});
}

TEST_CASE("mean_vector") {
  SUBCASE("single vector is its own mean") {
    const VectorSet s(3, {1.5f, -2.0f, 7.0f});
    CHECK(mean_vector(s) == std::vector<float>{1.5f, -2.0f, 7.0f});
  }
  SUBCASE("standard-normal sample mean is near zero") {
    std::mt19937_64 rng(3);
    const auto s = oracle::random_set(1000, 16, rng);
    for (float m : mean_vector(s)) CHECK(std::abs(m) < 0.2f);
  }
}

TEST_CASE("ivecs ground truth written by hand re-reads as neighbor lists") {
  // Reference bytes: int32 width followed by the ids, per row.
  detail::ByteWriter w;
  for (int q = 0; q < 3; ++q) {
    w.put<std::int32_t>(10);
    for (int j = 0; j < 10; ++j) w.put<std::int32_t>(q * 100 + j);
  }
  const auto rows = decode_ivecs(w.bytes());
  const auto lists = to_neighbor_lists(rows);
  REQUIRE(lists.size() == 3);
  for (int q = 0; q < 3; ++q)
    for (int j = 0; j < 10; ++j) CHECK(lists[q].ids[j] == static_cast<NodeId>(q * 100 + j));
}

TEST_CASE("fvecs decoding reports the faulting offset") {
  const VectorSet s(4, {1, 2, 3, 4, 5, 6, 7, 8});
  auto bytes = encode_vectors(s, VectorFormat::fvecs);
  REQUIRE(bytes.size() == 2 * (4 + 16));

  SUBCASE("truncated record") {
    bytes.resize(30);
    try {
      decode_vectors(bytes, VectorFormat::fvecs);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 24);
    }
  }
  SUBCASE("dimension changes between records") {
    bytes[20] = 3;
    try {
      decode_vectors(bytes, VectorFormat::fvecs);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 20);
    }
  }
  SUBCASE("NaN payload") {
    const float nan = NAN;
    std::memcpy(bytes.data() + 8, &nan, 4);
    CHECK_THROWS_AS(decode_vectors(bytes, VectorFormat::fvecs), FormatError);
  }
}

TEST_CASE("mann decoding rejects bad magic and trailing bytes") {
  const VectorSet s(2, {1, 2, 3, 4});
  auto bytes = encode_vectors(s, VectorFormat::mann);
  CHECK(decode_vectors(bytes, VectorFormat::mann) == s);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_vectors(extra, VectorFormat::mann), FormatError);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_vectors(bytes, VectorFormat::mann), FormatError);
}

TEST_CASE("file helpers write atomically and report missing files as usage errors") {
  TempDir dir;
  const auto p = dir.path() / "v.fvecs";
  const VectorSet s(3, {1, 2, 3, 4, 5, 6});
  write_vectors(s, p, format_from_path(p));
  CHECK(read_vectors(p, VectorFormat::fvecs) == s);
  CHECK(format_from_path("x.mann") == VectorFormat::mann);
  CHECK_THROWS_AS(read_vectors(dir.path() / "missing.fvecs", VectorFormat::fvecs), UsageError);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
}

TEST_SUITE("property") {
  TEST_CASE("triangle inequality for l2_distance") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> dim(1, 64);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(3, dim(rng), rng, 1.0 + c % 7);
      const double ab = l2_distance(s[0], s[1]), bc = l2_distance(s[1], s[2]), ac = l2_distance(s[0], s[2]);
      REQUIRE(ac <= ab + bc + 1e-5);
    }
  }

  TEST_CASE("brute_force_knn is prefix-stable in k and agrees with a full sort") {
    std::mt19937_64 rng(102);
    std::uniform_int_distribution<std::size_t> n_of(2, 60), dim_of(1, 12);
    for (int c = 0; c < kCases; ++c) {
      const std::size_t n = n_of(rng);
      // Coarse integer grid coordinates create many exact ties.
      std::uniform_int_distribution<int> coord(-2, 2);
      const std::size_t d = dim_of(rng);
      std::vector<float> data(n * d);
      for (auto& x : data) x = static_cast<float>(coord(rng));
      const VectorSet s(d, data);
      std::vector<float> q(d);
      for (auto& x : q) x = static_cast<float>(coord(rng));
      std::uniform_int_distribution<std::size_t> k_of(1, n - 1);
      const std::size_t k = k_of(rng);
      const auto a = brute_force_knn(q, s, k), b = brute_force_knn(q, s, k + 1);
      REQUIRE(std::equal(a.ids.begin(), a.ids.end(), b.ids.begin()));
      REQUIRE(b.ids == oracle::knn(q, s, k + 1));
    }
  }

  TEST_CASE("fvecs, mann and ivecs round trips are byte-identical") {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<std::size_t> n_of(1, 40), dim_of(1, 33);
    std::uniform_int_distribution<std::int32_t> id(-5, 1 << 30);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(n_of(rng), dim_of(rng), rng, 100.0);
      for (auto f : {VectorFormat::fvecs, VectorFormat::mann}) {
        const auto bytes = encode_vectors(s, f);
        const auto back = decode_vectors(bytes, f);
        REQUIRE(back == s);
        REQUIRE(encode_vectors(back, f) == bytes);
      }
      IdRows rows;
      rows.width = dim_of(rng);
      rows.rows.resize(n_of(rng));
      for (auto& r : rows.rows) {
        r.resize(rows.width);
        for (auto& x : r) x = id(rng);
      }
      const auto ib = encode_ivecs(rows);
      REQUIRE(decode_ivecs(ib) == rows);
      REQUIRE(encode_ivecs(decode_ivecs(ib)) == ib);
    }
  }

  TEST_CASE("every strict prefix of an fvecs file is rejected") {
    std::mt19937_64 rng(104);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(1 + c % 5, 1 + c % 9, rng);
      const auto bytes = encode_vectors(s, VectorFormat::fvecs);
      const std::size_t record = 4 + 4 * s.dim();
      std::uniform_int_distribution<std::size_t> cut_of(1, bytes.size() - 1);
      const std::size_t cut = cut_of(rng);
      const std::span<const char> prefix(bytes.data(), cut);
      if (cut % record == 0) {
        REQUIRE(decode_vectors(prefix, VectorFormat::fvecs).size() == cut / record);
      } else {
        REQUIRE_THROWS_AS(decode_vectors(prefix, VectorFormat::fvecs), FormatError);
      }
    }
  }
}
