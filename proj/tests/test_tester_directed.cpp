#include "cpt/tester_directed.hpp"

#include <algorithm>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"

#include "cpt/errors.hpp"
#include "cpt/oracle.hpp"
#include "cpt/rng.hpp"

using namespace cpt;

namespace {

bool strongly_connected(const DiGraph& g) {
  if (g.n() == 0) return true;
  auto reaches_all = [&](bool forward) {
    std::vector<char> seen(g.n(), 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int found = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : forward ? g.out_neighbors(v) : g.in_neighbors(v))
        if (!seen[u]) {
          seen[u] = 1;
          found++;
          stack.push_back(u);
        }
    }
    return found == g.n();
  };
  return reaches_all(true) && reaches_all(false);
}

bool diamond_witness_ok(const DiGraph& g, const std::vector<int>& w) {
  return w.size() == 4 && oracle::is_copy_at(g, diamond_pattern(), w);
}

}  // namespace

TEST_CASE("disjointness graphs encode their intersection as a diamond") {
  GapDisjInstance hit = gen_gapdisj(3, {1}, {1});
  CHECK(hit.graph.n() == 12 + 2 * 3);
  CHECK(hit.graph.m() == 13 + 4 * 3 + 2);  // ring + fans + chains + inputs
  CHECK(hit.graph.has_arc(GapDisjInstance::kA, hit.c_node(1)));
  CHECK(hit.graph.has_arc(hit.c_node(5), GapDisjInstance::kB));
  CHECK(hit.graph.has_arc(GapDisjInstance::kB, hit.d_node(1)));
  CHECK(hit.graph.has_arc(hit.d_node(5), GapDisjInstance::kA));
  for (int i = 1; i <= 3; i++) {
    CHECK(hit.graph.has_arc(GapDisjInstance::kA, hit.witness_node(i)));
    CHECK(hit.graph.has_arc(GapDisjInstance::kB, hit.witness_node(i)));
    CHECK_FALSE(hit.graph.has_arc(GapDisjInstance::kA, hit.universe_node(i)));
  }
  CHECK(hit.graph.has_arc(hit.d_node(1), hit.universe_node(1)));
  CHECK(hit.graph.has_arc(hit.universe_node(1), hit.universe_node(2)));
  CHECK(hit.graph.has_arc(hit.witness_node(1), hit.witness_node(2)));
  CHECK(hit.graph.has_arc(hit.universe_node(3), hit.c_node(3)));
  CHECK(hit.graph.has_arc(hit.witness_node(3), hit.c_node(3)));
  CHECK(hit.graph.has_arc(hit.universe_node(1), GapDisjInstance::kA));
  CHECK(hit.graph.has_arc(hit.universe_node(1), GapDisjInstance::kB));
  CHECK_FALSE(hit.graph.has_arc(hit.universe_node(2), GapDisjInstance::kA));

  CHECK(oracle::contains_copy(hit.graph, diamond_pattern()));
  CHECK(oracle::is_copy_at(hit.graph, diamond_pattern(),
                           std::vector<int>{hit.universe_node(1), GapDisjInstance::kA,
                                            GapDisjInstance::kB, hit.witness_node(1)}));
  CHECK(oracle::is_copy_at(hit.graph, diamond_pattern(),
                           std::vector<int>{hit.universe_node(1), GapDisjInstance::kA,
                                            GapDisjInstance::kB, hit.witness_node(2)}));

  GapDisjInstance miss = gen_gapdisj(3, {1}, {2});
  CHECK_FALSE(oracle::contains_copy(miss.graph, diamond_pattern()));

  GapDisjInstance bare = gen_gapdisj(3, {}, {});
  CHECK(bare.graph.m() == 13 + 4 * 3);
  CHECK_FALSE(oracle::contains_copy(bare.graph, diamond_pattern()));
  CHECK(strongly_connected(bare.graph));  // the skeleton alone suffices

  // Intersection <-> diamond, plus strong connectivity, on random inputs.
  Rng rng(2471);
  for (int trial = 0; trial < 30; trial++) {
    long long nu = 2 + static_cast<long long>(rng.below(11));
    std::vector<int> x, y;
    for (int i = 1; i <= nu; i++) {
      if (rng.bernoulli(0.4)) x.push_back(i);
      if (rng.bernoulli(0.4)) y.push_back(i);
    }
    GapDisjInstance inst = gen_gapdisj(nu, x, y);
    CHECK(strongly_connected(inst.graph));
    std::vector<int> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    CHECK(oracle::contains_copy(inst.graph, diamond_pattern()) == !common.empty());
    // Copies through distinct intersection elements can be paired off to
    // share no arc, so the greedy packing reaches at least half of them.
    oracle::Packing pack = oracle::packing_lb(inst.graph, diamond_pattern());
    CHECK(pack.count >= (static_cast<long long>(common.size()) + 1) / 2);
  }

  GapDisjInstance dup = gen_gapdisj(4, {2, 2, 1}, {});
  CHECK(dup.X == std::vector<int>{1, 2});

  nlohmann::json side = hit.sidecar_json();
  CHECK(side.at("nU") == 3);
  CHECK(side.at("X") == std::vector<int>{1});
  CHECK(side.at("Y") == std::vector<int>{1});

  CHECK_THROWS_AS(gen_gapdisj(1, {}, {}), ValidationError);
  CHECK_THROWS_AS(gen_gapdisj(3, {0}, {}), ValidationError);
  CHECK_THROWS_AS(gen_gapdisj(3, {}, {4}), ValidationError);
  CHECK_THROWS_AS(hit.universe_node(4), ValidationError);
  CHECK_THROWS_AS(hit.witness_node(0), ValidationError);
  CHECK_THROWS_AS(hit.c_node(6), ValidationError);
  CHECK_THROWS_AS(hit.d_node(0), ValidationError);
}

TEST_CASE("diamond attempts with pinned colors and weights") {
  DiGraph d(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});

  ColorBfsRun run = run_diamond_attempt(d, {0, 1, 2, 3}, {7, 0, 0, 0});
  REQUIRE(run.detected);
  CHECK(run.detections[0].witness == std::vector<int>{0, 1, 2, 3});
  CHECK(diamond_witness_ok(d, run.detections[0].witness));

  // Swapping the middle colors swaps the middle roles; still a copy.
  ColorBfsRun swapped = run_diamond_attempt(d, {0, 2, 1, 3}, {7, 0, 0, 0});
  REQUIRE(swapped.detected);
  CHECK(swapped.detections[0].witness == std::vector<int>{0, 2, 1, 3});
  CHECK(diamond_witness_ok(d, swapped.detections[0].witness));

  CHECK_FALSE(run_diamond_attempt(d, {0, 0, 0, 0}, {0, 0, 0, 0}).detected);
  CHECK_FALSE(run_diamond_attempt(d, {3, 1, 2, 0}, {0, 0, 0, 0}).detected);

  // Two competing sources: the forwarding layer keeps the lighter offer.
  DiGraph two(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 1}, {4, 2}});
  ColorBfsRun light4 = run_diamond_attempt(two, {0, 1, 2, 3, 0}, {5, 0, 0, 0, 3});
  REQUIRE(light4.detected);
  CHECK(light4.detections[0].witness == std::vector<int>{4, 1, 2, 3});
  ColorBfsRun light0 = run_diamond_attempt(two, {0, 1, 2, 3, 0}, {3, 0, 0, 0, 5});
  REQUIRE(light0.detected);
  CHECK(light0.detections[0].witness == std::vector<int>{0, 1, 2, 3});

  // Mixed offers at the sink do not pair up: sides must agree on the offer.
  DiGraph split(6, {{0, 1}, {4, 2}, {1, 3}, {2, 3}, {0, 5}, {4, 5}});
  CHECK_FALSE(run_diamond_attempt(split, {0, 1, 2, 3, 0, 3}, {1, 0, 0, 0, 2, 0}).detected);

  CHECK_THROWS_AS(run_diamond_attempt(d, {0, 1, 2}, {0, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_diamond_attempt(d, {0, 1, 2, 4}, {0, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_diamond_attempt(d, {0, 1, 2, 3}, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_diamond_attempt(d, {0, 1, 2, 3}, {256, 0, 0, 0}), ValidationError);
}

TEST_CASE("diamond tester verdicts on disjointness instances") {
  CHECK(diamond_attempt_budget(1.0) == 5120);
  CHECK(diamond_attempt_budget(0.5) == 10240);
  CHECK_THROWS_AS(diamond_attempt_budget(0.0), ValidationError);
  CHECK_THROWS_AS(diamond_attempt_budget(1.5), ValidationError);

  std::vector<int> all;
  for (int i = 1; i <= 10; i++) all.push_back(i);
  GapDisjInstance overlap = gen_gapdisj(10, all, all);
  oracle::Packing pack = oracle::packing_lb(overlap.graph, diamond_pattern());
  double eps = 4.0 * static_cast<double>(pack.count) / overlap.graph.m();
  REQUIRE(eps > 0.0);

  int rejects = 0;
  for (uint64_t seed = 0; seed < 30; seed++) {
    DiamondOptions opt;
    opt.eps = eps;
    opt.seed = seed;
    TesterResult res = test_diamond_freeness(overlap.graph, opt);
    if (res.reject) {
      rejects++;
      CHECK(diamond_witness_ok(overlap.graph, res.witness));
    }
    CHECK(res.max_bits_per_edge <= 8 * ceil_log2(overlap.graph.n()));
  }
  CHECK(rejects >= 25);  // acceptance gate is 2/3; this sits far above it

  std::vector<int> left = {1, 2, 3, 4, 5}, right = {6, 7, 8, 9, 10};
  GapDisjInstance disjoint = gen_gapdisj(10, left, right);
  REQUIRE_FALSE(oracle::contains_copy(disjoint.graph, diamond_pattern()));
  for (uint64_t seed = 0; seed < 15; seed++) {
    DiamondOptions opt;
    opt.eps = eps;
    opt.seed = seed;
    opt.attempts_override = 300;
    TesterResult res = test_diamond_freeness(disjoint.graph, opt);
    CHECK_FALSE(res.reject);
    CHECK(res.attempts == 300);
    CHECK(res.paper_rounds == 600);
    CHECK(res.sim_rounds == 600);
  }

  DiamondOptions opt;
  opt.eps = eps;
  opt.seed = 11;
  TesterResult a = test_diamond_freeness(overlap.graph, opt);
  TesterResult b = test_diamond_freeness(overlap.graph, opt);
  CHECK(a.reject == b.reject);
  CHECK(a.witness == b.witness);
  CHECK(a.attempts == b.attempts);
}

TEST_CASE("directed cycle sweep with pinned colors and weights") {
  DiGraph tri(3, {{0, 1}, {1, 2}, {2, 0}});
  ColorBfsRun hit = run_directed_color_bfs(tri, 3, {0, 1, 2}, {0, 1, 2});
  REQUIRE(hit.detected);
  CHECK(hit.detections[0].witness == std::vector<int>{0, 1, 2});
  CHECK(oracle::is_copy_at(tri, directed_cycle_pattern(3), hit.detections[0].witness));

  // Same vertices, one arc reversed: a DAG, and the sweep stays silent.
  DiGraph dag(3, {{0, 1}, {0, 2}, {1, 2}});
  CHECK_FALSE(run_directed_color_bfs(dag, 3, {0, 1, 2}, {0, 1, 2}).detected);

  // A 6-cycle colored 0,1,2,0,1,2 relays offers all the way around, but
  // they arrive at the *other* root, so the self-check stays silent.
  DiGraph six(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  CHECK_FALSE(run_directed_color_bfs(six, 3, {0, 1, 2, 0, 1, 2}, {0, 9, 9, 5, 9, 9}).detected);

  // Two triangles sharing a node: the lighter root wins the shared relay.
  DiGraph two_tris(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 2}});
  ColorBfsRun both = run_directed_color_bfs(two_tris, 3, {0, 1, 2, 0, 1}, {9, 50, 50, 2, 50});
  REQUIRE(both.detected);
  CHECK(both.detections[0].witness == std::vector<int>{3, 4, 2});

  CHECK_THROWS_AS(run_directed_color_bfs(tri, 2, {0, 1, 2}, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_directed_color_bfs(tri, 3, {0, 1}, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_directed_color_bfs(tri, 3, {0, 1, 3}, {0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(run_directed_color_bfs(tri, 3, {0, 1, 2}, {81, 0, 0}), ValidationError);
}

TEST_CASE("directed cycle tester verdicts") {
  // A triangle plus a pendant path; eps = 1 certified by the single copy
  // over three of the five arcs is too generous, so use the packing value.
  DiGraph g(5, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}});
  oracle::Packing pack = oracle::packing_lb(g, directed_cycle_pattern(3));
  REQUIRE(pack.count == 1);
  double eps = 3.0 * static_cast<double>(pack.count) / g.m();

  int rejects = 0;
  for (uint64_t seed = 0; seed < 20; seed++) {
    CkOptions opt;
    opt.eps = eps;
    opt.seed = seed;
    TesterResult res = test_directed_ck_freeness(g, 3, opt);
    if (res.reject) {
      rejects++;
      CHECK(res.witness.size() == 3);
      CHECK(oracle::is_copy_at(g, directed_cycle_pattern(3), res.witness));
    }
    CHECK(res.max_bits_per_edge <= 8 * ceil_log2(g.n()));
  }
  CHECK(rejects >= 17);

  // Upper-triangular arcs only: acyclic, so every seed must accept.
  std::vector<Edge> arcs;
  Rng rng(5);
  for (int u = 0; u < 12; u++)
    for (int v = u + 1; v < 12; v++)
      if (rng.bernoulli(0.5)) arcs.push_back({u, v});
  DiGraph dag(12, arcs);
  for (uint64_t seed = 0; seed < 10; seed++) {
    CkOptions opt;
    opt.eps = 1.0;
    opt.seed = seed;
    TesterResult res = test_directed_ck_freeness(dag, 3, opt);
    CHECK_FALSE(res.reject);
    CHECK(res.attempts == 540);        // ceil(20 * 27)
    CHECK(res.paper_rounds == 1620);   // three rounds per attempt
  }

  // A directed 4-cycle holds no directed 3-cycle.
  DiGraph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  REQUIRE_FALSE(oracle::contains_copy(c4, directed_cycle_pattern(3)));
  for (uint64_t seed = 0; seed < 10; seed++) {
    CkOptions opt;
    opt.eps = 1.0;
    opt.seed = seed;
    CHECK_FALSE(test_directed_ck_freeness(c4, 3, opt).reject);
  }

  // Planted directed 5-cycle under DAG filler; k = 5.
  std::vector<Edge> arcs5 = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  Rng rng5(77);
  for (int u = 5; u < 15; u++)
    for (int v = u + 1; v < 15; v++)
      if (rng5.bernoulli(0.3)) arcs5.push_back({u, v});
  DiGraph planted(15, arcs5);
  double eps5 = 5.0 / planted.m();
  int hits5 = 0;
  for (uint64_t seed = 0; seed < 5; seed++) {
    CkOptions opt;
    opt.eps = eps5;
    opt.seed = seed;
    TesterResult res = test_directed_ck_freeness(planted, 5, opt);
    if (res.reject) {
      hits5++;
      CHECK(oracle::is_copy_at(planted, directed_cycle_pattern(5), res.witness));
    }
  }
  CHECK(hits5 >= 4);

  CkOptions det;
  det.eps = eps;
  det.seed = 3;
  TesterResult a = test_directed_ck_freeness(g, 3, det);
  TesterResult b = test_directed_ck_freeness(g, 3, det);
  CHECK(a.reject == b.reject);
  CHECK(a.witness == b.witness);
  CHECK(a.attempts == b.attempts);
}
