#include <doctest.h>

#include <algorithm>
#include <vector>

#include "cpt/errors.hpp"
#include "cpt/graph.hpp"
#include "cpt/oracle.hpp"
#include "cpt/rng.hpp"

using namespace cpt;

namespace {

// Outer 5-cycle, spokes, inner pentagram: girth 5, vertex-transitive.
Graph petersen() {
  std::vector<Edge> e = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                         {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                         {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}};
  return Graph(10, std::move(e));
}

Graph random_graph(int n, double p, uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (int u = 0; u < n; u++)
    for (int v = u + 1; v < n; v++)
      if (rng.bernoulli(p)) e.emplace_back(u, v);
  return Graph(n, std::move(e));
}

}  // namespace

TEST_CASE("is_copy_at checks distinctness, range, and every edge") {
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  Pattern c3 = cycle_pattern(3);
  int a[] = {0, 1, 2};
  CHECK(oracle::is_copy_at(k4, c3, a));
  int dup[] = {0, 1, 1};
  CHECK_FALSE(oracle::is_copy_at(k4, c3, dup));
  int oob[] = {0, 1, 4};
  CHECK_FALSE(oracle::is_copy_at(k4, c3, oob));
  int wrong_size[] = {0, 1};
  CHECK_FALSE(oracle::is_copy_at(k4, c3, wrong_size));

  Graph path(3, {{0, 1}, {1, 2}});
  int b[] = {0, 1, 2};
  CHECK_FALSE(oracle::is_copy_at(path, c3, b));  // edge (2,0) missing
}

TEST_CASE("copy counts on small cliques") {
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  Graph k5(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
               {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
  CHECK(oracle::count_copies(k4, cycle_pattern(3)) == 4);
  CHECK(oracle::count_copies(k4, cycle_pattern(4)) == 3);
  CHECK(oracle::count_copies(k5, clique_pattern(3)) == 10);
  CHECK(oracle::count_copies(k5, clique_pattern(4)) == 5);
  CHECK(oracle::count_copies(k5, clique_pattern(5)) == 1);
  CHECK(oracle::count_copies(k4, pattern_by_name("P3")) == 12);  // 4*3 ordered middle picks / 1
  CHECK(oracle::count_copies(k4, clique_pattern(5)) == 0);
}

TEST_CASE("petersen graph has girth five and twelve 5-cycles") {
  Graph p = petersen();
  CHECK_FALSE(oracle::contains_copy(p, cycle_pattern(3)));
  CHECK_FALSE(oracle::contains_copy(p, cycle_pattern(4)));
  CHECK(oracle::count_copies(p, cycle_pattern(5)) == 12);
  CHECK(oracle::count_copies(p, cycle_pattern(6)) == 10);
  auto found = oracle::find_copy(p, cycle_pattern(5));
  REQUIRE(found.has_value());
  CHECK(oracle::is_copy_at(p, cycle_pattern(5), *found));
}

TEST_CASE("enumerate_copies yields canonical sorted disjoint-edge-set copies") {
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  auto copies = oracle::enumerate_copies(k4, cycle_pattern(3));
  REQUIRE(copies.size() == 4);
  CHECK(copies[0] == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(copies[3] == std::vector<Edge>{{1, 2}, {1, 3}, {2, 3}});
  CHECK(std::is_sorted(copies.begin(), copies.end()));
}

TEST_CASE("greedy packing on k5 finds two edge-disjoint triangles") {
  Graph k5(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
               {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
  auto pack = oracle::packing_lb(k5, clique_pattern(3));
  CHECK(pack.count == 2);
  // packed copies are pairwise edge-disjoint
  std::vector<Edge> all;
  for (const auto& c : pack.copies) all.insert(all.end(), c.begin(), c.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
}

TEST_CASE("min deletion counts") {
  Graph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(oracle::min_deletion_to_h_free(k4, cycle_pattern(3)) == 2);
  CHECK(oracle::min_deletion_to_h_free(k4, clique_pattern(4)) == 1);
  Graph c6(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  CHECK(oracle::min_deletion_to_h_free(c6, cycle_pattern(3)) == 0);
  CHECK(oracle::min_deletion_to_h_free(c6, cycle_pattern(6)) == 1);
  Graph k5(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2},
               {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}});
  CHECK(oracle::min_deletion_to_h_free(k5, clique_pattern(3)) == 4);
}

TEST_CASE("deletion distance dominates the packing bound on random graphs") {
  Pattern c3 = cycle_pattern(3);
  for (uint64_t seed = 0; seed < 20; seed++) {
    Graph g = random_graph(9, 0.35, 1000 + seed);
    auto pack = oracle::packing_lb(g, c3);
    int del = oracle::min_deletion_to_h_free(g, c3);
    CHECK(del >= pack.count);
    CHECK(del <= g.m());
    if (del == 0) CHECK_FALSE(oracle::contains_copy(g, c3));
  }
}

TEST_CASE("connected graph counts up to isomorphism") {
  CHECK(oracle::enumerate_connected(2).size() == 1);
  CHECK(oracle::enumerate_connected(3).size() == 2);
  CHECK(oracle::enumerate_connected(4).size() == 6);
  CHECK(oracle::enumerate_connected(5).size() == 21);
  CHECK(oracle::enumerate_connected(6).size() == 112);
  CHECK_THROWS_AS(oracle::enumerate_connected(7), ResourceError);

  // all distinct, all connected, sorted by edge count
  auto fives = oracle::enumerate_connected(5);
  for (size_t i = 0; i < fives.size(); i++) {
    CHECK(connected_components(fives[i].graph()).size() == 1);
    for (size_t j = i + 1; j < fives.size(); j++)
      CHECK_FALSE(oracle::are_isomorphic(fives[i].graph(), fives[j].graph()));
  }
  CHECK(fives.front().edge_count() == 4);   // trees first
  CHECK(fives.back().edge_count() == 10);   // K5 last
}

TEST_CASE("isomorphism checks") {
  Graph c5a(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  Graph c5b(5, {{0, 2}, {2, 4}, {4, 1}, {1, 3}, {3, 0}});
  Graph p5(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(oracle::are_isomorphic(c5a, c5b));
  CHECK_FALSE(oracle::are_isomorphic(c5a, p5));
  // same degree sequence, different structure
  Graph c6(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  Graph twin_triangles(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  CHECK_FALSE(oracle::are_isomorphic(c6, twin_triangles));
}

TEST_CASE("find_copy_with honors preassignments and filters") {
  // star with center 0 and leaves 1..3
  Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
  Pattern p3 = pattern_by_name("P3");  // path a-b-c, middle label 1

  auto centered = oracle::find_copy_with(star, p3, {-1, 0, -1}, nullptr);
  REQUIRE(centered.has_value());
  CHECK((*centered)[1] == 0);
  CHECK(oracle::is_copy_at(star, p3, *centered));

  auto off_center = oracle::find_copy_with(star, p3, {-1, 2, -1}, nullptr);
  CHECK_FALSE(off_center.has_value());

  // filter: label parity must match vertex parity
  Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto parity = oracle::find_copy_with(
      c4, p3, {}, [](int label, int vertex) { return label % 2 == vertex % 2; });
  REQUIRE(parity.has_value());
  for (int l = 0; l < 3; l++) CHECK(l % 2 == (*parity)[l] % 2);

  auto impossible = oracle::find_copy_with(
      c4, cycle_pattern(3), {}, [](int, int) { return true; });
  CHECK_FALSE(impossible.has_value());

  CHECK_THROWS_AS(oracle::find_copy_with(star, p3, {0}, nullptr), ValidationError);
}

TEST_CASE("directed copies follow arc directions") {
  DiPattern dc3 = directed_cycle_pattern(3);
  DiGraph cyc(3, {{0, 1}, {1, 2}, {2, 0}});
  DiGraph acyc(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(oracle::contains_copy(cyc, dc3));
  CHECK_FALSE(oracle::contains_copy(acyc, dc3));
  CHECK(oracle::count_copies(cyc, dc3) == 1);

  DiPattern dia = diamond_pattern();
  DiGraph d(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CHECK(oracle::contains_copy(d, dia));
  auto where = oracle::find_copy(d, dia);
  REQUIRE(where.has_value());
  CHECK(oracle::is_copy_at(d, dia, *where));
  // reversing the sink arcs breaks it
  DiGraph rev(4, {{0, 1}, {0, 2}, {3, 1}, {3, 2}});
  CHECK_FALSE(oracle::contains_copy(rev, dia));
  // two sources sharing the sink pair: copies counted as arc sets
  DiGraph two(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {4, 1}, {4, 2}});
  CHECK(oracle::count_copies(two, dia) == 2);
}

TEST_CASE("oracle size guards throw resource errors") {
  Graph big(21, {{0, 1}});
  CHECK_THROWS_AS(oracle::count_copies(big, cycle_pattern(3)), ResourceError);
  Graph mid(15, {{0, 1}});
  CHECK_THROWS_AS(oracle::min_deletion_to_h_free(mid, cycle_pattern(3)), ResourceError);
}
