#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "epann/bench.hpp"
#include "epann/detail/binary_io.hpp"
#include "epann/detail/prune.hpp"
#include "epann/errors.hpp"
#include "epann/graph.hpp"
#include "epann/search.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace epann;
using detail::Candidate;
using detail::PruneFate;

namespace {

BuildParams small_params(Algorithm a, std::size_t n, std::uint64_t seed) {
  BuildParams p = a == Algorithm::vamana ? BuildParams::vamana_defaults() : BuildParams::nsg_defaults();
  p.algorithm = a;
  p.R = 8;
  p.L = 16;
  p.C = 40;
  p.knn.K = std::min<std::size_t>(10, n - 1);
  p.knn.L = std::max<std::size_t>(p.knn.K, 16);
  p.seed = seed;
  return p;
}

std::vector<Candidate> pool_for(const VectorSet& s, NodeId p) {
  std::vector<Candidate> pool;
  for (std::size_t v = 0; v < s.size(); ++v) pool.push_back({squared_l2(s[p], s[v]), static_cast<NodeId>(v)});
  detail::normalize_pool(pool, p, pool.size());
  return pool;
}

}  // namespace

TEST_CASE("brute k-NN graph on five planar points matches per-node brute force") {
  const VectorSet s(2, {0, 0, 1, 0, 0, 2, 3, 3, -1, -1});
  const auto g = build_knn_graph(s, 2, KnnMethod::brute, {}, 0);
  for (NodeId u = 0; u < 5; ++u) {
    const auto ids = oracle::knn(s[u], s, 3);
    std::vector<NodeId> expect;
    for (NodeId v : ids)
      if (v != u && expect.size() < 2) expect.push_back(v);
    const auto got = g.neighbors(u);
    CHECK(std::vector<NodeId>(got.begin(), got.end()) == expect);
  }
}

TEST_CASE("brute k-NN graph with k = N-1 is complete") {
  std::mt19937_64 rng(21);
  const auto s = oracle::random_set(12, 3, rng);
  const auto g = build_knn_graph(s, 11, KnnMethod::brute, {}, 0);
  CHECK(g.num_edges() == 12 * 11);
  CHECK_THROWS_AS(build_knn_graph(s, 12, KnnMethod::brute, {}, 0), UsageError);
}

TEST_CASE("NN-Descent on 10k Gaussian points reaches 0.90 edge recall at k = 64") {
  std::mt19937_64 rng(22);
  const auto s = oracle::random_set(10000, 16, rng);
  const auto exact = build_knn_graph(s, 64, KnnMethod::brute, {}, 0);
  const auto approx = build_knn_graph(s, 64, KnnMethod::nn_descent, {}, 0);
  const double recall = knn_graph_recall(approx, exact);
  MESSAGE("nn-descent edge recall " << recall);
  CHECK(recall >= 0.90);
}

TEST_CASE("occlusion keeps chain edges on three collinear points") {
  const VectorSet s(2, {0, 0, 1, 0, 2, 0});
  const auto kept = detail::occlusion_prune(s, pool_for(s, 0), 2);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].id == 1);
  const auto mid = detail::occlusion_prune(s, pool_for(s, 1), 2);
  CHECK(mid.size() == 2);
}

TEST_CASE("alpha = 1.2 keeps a superset of alpha = 1 on identical pools over 1k points") {
  std::mt19937_64 rng(23);
  const auto s = oracle::random_set(1000, 8, rng);
  std::size_t strictly_more = 0;
  for (NodeId p = 0; p < 1000; ++p) {
    auto pool = pool_for(s, p);
    pool.resize(100);
    const auto a = detail::robust_prune(s, pool, 32, 1.0), b = detail::robust_prune(s, pool, 32, 1.2);
    std::set<NodeId> bs;
    for (const auto& c : b) bs.insert(c.id);
    for (const auto& c : a) REQUIRE(bs.count(c.id));
    strictly_more += b.size() > a.size();
  }
  CHECK(strictly_more > 0);
}

TEST_CASE("NSG on 10k Gaussian points reaches recall@10 of 0.85 at L = 64") {
  std::mt19937_64 rng(24);
  const auto s = oracle::random_set(10000, 32, rng);
  const auto q = oracle::random_set(200, 32, rng);
  const auto g = build_graph(s, BuildParams::nsg_defaults());
  CHECK(g.largest_degree() <= 32);
  CHECK(all_reachable_from_entry(g));
  std::vector<NeighborList> res;
  SearchParams sp;
  for (std::size_t i = 0; i < q.size(); ++i) res.push_back(greedy_search(g, s, g.default_entry(), q[i], sp).topk);
  const double r = recall_at_k(res, brute_force_knn_batch(q, s, 10), 10);
  MESSAGE("recall@10 " << r);
  CHECK(r >= 0.85);
}

TEST_CASE("central_entry") {
  SUBCASE("blob with an outlier picks a blob point") {
    std::mt19937_64 rng(25);
    auto data = oracle::random_set(200, 2, rng).data();
    std::vector<float> d(data.begin(), data.end());
    d.push_back(1000.0f);
    d.push_back(1000.0f);
    const VectorSet s(2, d);
    const NodeId c = central_entry(s);
    CHECK(c != 200);
    CHECK(c == oracle::knn(mean_vector(s), s, 1)[0]);
  }
  SUBCASE("single node") { CHECK(central_entry(VectorSet(3, {1, 2, 3})) == 0); }
}

TEST_CASE("graph files reject corrupt content") {
  std::mt19937_64 rng(26);
  const auto s = oracle::random_set(60, 4, rng);
  const auto g = build_graph(s, small_params(Algorithm::nsg, 60, 0));
  const auto bytes = encode_graph(g);
  CHECK(decode_graph(bytes) == g);
  const std::size_t ids_at = 4 + 4 + 8 + 4 + 8 + 61 * 8;

  SUBCASE("out-of-range neighbor id") {
    auto bad = bytes;
    const std::uint32_t big = 60;
    std::memcpy(bad.data() + ids_at, &big, 4);
    try {
      decode_graph(bad);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == ids_at);
    }
  }
  SUBCASE("truncated adjacency block") {
    auto bad = bytes;
    bad.resize(ids_at + 10);
    try {
      decode_graph(bad);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == ids_at + 10);
    }
  }
  SUBCASE("unreachable node in a refined graph") {
    auto adj = g.adjacency();
    for (auto& row : adj) row.erase(std::remove(row.begin(), row.end(), NodeId{7}), row.end());
    const NavGraph cut(adj, g.max_degree(), g.default_entry(), g.build_meta());
    CHECK_THROWS_AS(decode_graph(encode_graph(cut)), FormatError);
  }
}

TEST_CASE("serialized size follows the documented formula") {
  std::vector<std::vector<NodeId>> adj(5);
  for (NodeId u = 0; u < 5; ++u)
    for (NodeId v = 0; v < 5; ++v)
      if (u != v && adj[u].size() < 3) adj[u].push_back(v);
  const NavGraph g(adj, 3, 0, json(nullptr));
  CHECK(encode_graph(g).size() == graph_file_bytes(5, 3) + 4);  // "null"
}

TEST_SUITE("property") {
  TEST_CASE("refined graphs: degree bound, reachability, determinism") {
    std::mt19937_64 rng(301);
    std::uniform_int_distribution<std::size_t> n_of(2, 90), d_of(1, 6);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(n_of(rng), d_of(rng), rng);
      const Algorithm a = c % 2 ? Algorithm::vamana : Algorithm::nsg;
      const auto p = small_params(a, s.size(), static_cast<std::uint64_t>(c));
      const auto g = build_graph(s, p);
      REQUIRE(g.size() == s.size());
      REQUIRE(g.largest_degree() <= p.R);
      const auto seen = oracle::reachable(g.adjacency(), g.default_entry());
      REQUIRE(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(s.size()));
      REQUIRE(g.default_entry() == central_entry(s));
      REQUIRE(encode_graph(build_graph(s, p)) == encode_graph(g));
    }
  }

  TEST_CASE("occlusion soundness of every pruned candidate") {
    std::mt19937_64 rng(302);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(3 + c % 60, 1 + c % 8, rng);
      const auto pool = pool_for(s, 0);
      std::vector<PruneFate> fates;
      const auto kept = detail::robust_prune(s, pool, 1 + c % 12, 1.0, &fates);
      for (std::size_t t = 0; t < pool.size(); ++t) {
        if (fates[t] != PruneFate::occluded) continue;
        const NodeId w = pool[t].id;
        const bool covered = std::any_of(kept.begin(), kept.end(), [&](const Candidate& v) {
          return oracle::sq_dist(s[v.id], s[w]) < oracle::sq_dist(s[0], s[w]);
        });
        REQUIRE(covered);
      }
      for (std::size_t t = 0; t < pool.size(); ++t) {
        if (fates[t] != PruneFate::kept) continue;
        // A kept candidate is not occluded by any kept candidate closer to p.
        for (std::size_t v = 0; v < t; ++v)
          if (fates[v] == PruneFate::kept)
            REQUIRE_FALSE(oracle::sq_dist(s[pool[v].id], s[pool[t].id]) < oracle::sq_dist(s[0], s[pool[t].id]));
      }
    }
  }

  TEST_CASE("larger alpha never drops an edge kept by alpha = 1") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> alpha_of(1.0, 2.0);
    for (int c = 0; c < kCases; ++c) {
      const auto s = oracle::random_set(3 + c % 80, 1 + c % 6, rng);
      const auto pool = pool_for(s, 0);
      const std::size_t R = 1 + c % 20;
      const auto a = detail::robust_prune(s, pool, R, 1.0), b = detail::robust_prune(s, pool, R, alpha_of(rng));
      REQUIRE(b.size() <= R);
      std::set<NodeId> bs;
      for (const auto& x : b) bs.insert(x.id);
      for (const auto& x : a) REQUIRE(bs.count(x.id));
    }
  }

  TEST_CASE("graph encode/decode round trip") {
    std::mt19937_64 rng(304);
    for (int c = 0; c < kCases; ++c) {
      const std::size_t n = 1 + c % 40;
      auto adj = oracle::random_digraph(n, 0.2, rng);
      std::uint32_t R = 0;
      for (const auto& row : adj) R = std::max<std::uint32_t>(R, static_cast<std::uint32_t>(row.size()));
      const NavGraph g(adj, R + c % 3, static_cast<NodeId>(c % n), json{{"case", c}});
      const auto bytes = encode_graph(g);
      const auto back = decode_graph(bytes);
      REQUIRE(back == g);
      REQUIRE(back.adjacency() == adj);
      REQUIRE(encode_graph(back) == bytes);
      std::uniform_int_distribution<std::size_t> cut(0, bytes.size() - 1);
      REQUIRE_THROWS_AS(decode_graph(std::span<const char>(bytes.data(), cut(rng))), FormatError);
    }
  }
}
