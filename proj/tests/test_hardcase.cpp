#include <doctest.h>

#include <random>

#include "epann/bench.hpp"
#include "epann/errors.hpp"
#include "epann/graph.hpp"
#include "epann/hardcase.hpp"
#include "epann/search.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace epann;

namespace {

HardInstanceSpec tiny(std::uint64_t seed) {
  HardInstanceSpec s;
  s.n_total = 200;
  s.n_queries = 5;
  s.seed = seed;
  return s;
}

// Smallest K in `Ks` whose entry index gives recall 1.0 at L = 10, or 0.
std::size_t min_K_at_L10(const HardInstance& inst, const NavGraph& g, const std::vector<std::size_t>& Ks) {
  SearchParams p;
  p.queue_len = 10;
  for (std::size_t K : Ks) {
    EntryBuildOptions o;
    o.K = K;
    o.max_points_per_center = 256;
    const auto eps = build_entry_index(inst.base, o).index;
    std::vector<NeighborList> res;
    for (std::size_t i = 0; i < inst.queries.size(); ++i)
      res.push_back(adaptive_search(g, inst.base, eps, inst.queries[i], p).topk);
    if (recall_at_k(res, inst.gt, 10) == 1.0) return K;
  }
  return 0;
}

}  // namespace

TEST_CASE("planted cluster is the exact ground truth") {
  const auto inst = gen_hard_instance(tiny(3));
  REQUIRE(inst.base.size() == 200);
  REQUIRE(inst.planted.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(inst.planted[i] == 190 + i);
  for (std::size_t q = 0; q < inst.queries.size(); ++q) {
    auto expect = oracle::knn(inst.queries[q], inst.base, 10);
    std::sort(expect.begin(), expect.end());
    CHECK(expect == inst.planted);
    CHECK(inst.gt[q] == brute_force_knn(inst.queries[q], inst.base, 10));
  }
}

TEST_CASE("hard instance specs are validated") {
  auto s = tiny(0);
  s.n_total = 12;
  CHECK_THROWS_AS(gen_hard_instance(s), UsageError);
  s = tiny(0);
  s.gt_offset = {0.0, 1.0};
  CHECK_THROWS_AS(gen_hard_instance(s), UsageError);
  s = tiny(0);
  s.dim = 1;
  CHECK_THROWS_AS(s.validate(), UsageError);
  CHECK_THROWS_AS(hard_spec_from_json(nlohmann::json{{"n_total", "many"}}), UsageError);
}

TEST_CASE("spec json round trip and presets") {
  const auto t = HardInstanceSpec::triangle();
  CHECK(t.island_centers.size() == 3);
  CHECK(t.gt_offset == Point2{200.0, 200.0});
  const auto back = hard_spec_from_json(to_json(t));
  CHECK(to_json(back) == to_json(t));
  CHECK(to_json(HardInstanceSpec::collinear()) == to_json(HardInstanceSpec{}));
}

TEST_CASE("overlay on a 20k instance: one cell traps, two cells escape") {
  auto spec = HardInstanceSpec::collinear();
  spec.n_total = 20000;
  const auto inst = gen_hard_instance(spec);
  const auto g = build_graph(inst.base, BuildParams::nsg_defaults());

  EntryBuildOptions o;
  o.K = 1;
  const auto one = build_entry_index(inst.base, o).index;
  const auto ov1 = voronoi_overlay(inst.base, one, inst.queries, inst.gt);
  CHECK(ov1.same_count == inst.queries.size());
  CHECK(one.ids[0] == g.default_entry());

  o.K = 2;
  o.max_points_per_center = 256;
  const auto two = build_entry_index(inst.base, o).index;
  const auto ov2 = voronoi_overlay(inst.base, two, inst.queries, inst.gt);
  CHECK(ov2.same_count == inst.queries.size());
  for (std::size_t q = 0; q < inst.queries.size(); ++q) CHECK(ov2.query_cell[q] == ov2.gt_cell[q]);

  SearchParams p;
  p.queue_len = 10;
  std::vector<NeighborList> fixed, adaptive;
  for (std::size_t i = 0; i < inst.queries.size(); ++i) {
    fixed.push_back(greedy_search(g, inst.base, g.default_entry(), inst.queries[i], p).topk);
    adaptive.push_back(adaptive_search(g, inst.base, two, inst.queries[i], p).topk);
  }
  CHECK(recall_at_k(fixed, inst.gt, 10) == 0.0);
  CHECK(recall_at_k(adaptive, inst.gt, 10) == 1.0);
}

TEST_CASE("moving the GT cluster further away never raises the K needed") {
  const std::vector<std::size_t> Ks{1, 2, 4, 8, 16, 32, 64};
  std::size_t prev = 0;
  for (double y : {-1000.0, -2000.0, -4000.0}) {
    auto spec = HardInstanceSpec::collinear();
    spec.n_total = 20000;
    spec.gt_offset = {-200.0, y};
    const auto inst = gen_hard_instance(spec);
    const auto g = build_graph(inst.base, BuildParams::nsg_defaults());
    const auto k = min_K_at_L10(inst, g, Ks);
    MESSAGE("gt y " << y << ": min K " << k);
    REQUIRE(k != 0);
    if (prev) CHECK(k <= prev);
    prev = k;
  }
}

TEST_SUITE("property") {
  TEST_CASE("hard instances are byte-deterministic and planted exactly") {
    std::mt19937_64 rng(701);
    std::uniform_int_distribution<std::size_t> n_of(30, 120), d_of(2, 4);
    for (int c = 0; c < kCases; ++c) {
      HardInstanceSpec s;
      s.n_total = n_of(rng);
      s.dim = d_of(rng);
      s.n_queries = 1 + c % 4;
      s.gt_cluster_size = 1 + c % 10;
      s.seed = static_cast<std::uint64_t>(c);
      const auto a = gen_hard_instance(s), b = gen_hard_instance(s);
      REQUIRE(a.base.data().size() == b.base.data().size());
      REQUIRE(std::equal(a.base.data().begin(), a.base.data().end(), b.base.data().begin()));
      REQUIRE(std::equal(a.queries.data().begin(), a.queries.data().end(), b.queries.data().begin()));
      REQUIRE(a.base.size() == s.n_total);
      for (std::size_t q = 0; q < a.queries.size(); ++q) {
        auto got = oracle::knn(a.queries[q], a.base, s.gt_cluster_size);
        std::sort(got.begin(), got.end());
        REQUIRE(got == a.planted);
      }
    }
  }
}
