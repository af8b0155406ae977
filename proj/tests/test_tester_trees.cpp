#include <doctest.h>

#include <vector>

#include "cpt/errors.hpp"
#include "cpt/graph.hpp"
#include "cpt/oracle.hpp"
#include "cpt/rng.hpp"
#include "cpt/tester_trees.hpp"

using namespace cpt;

namespace {

Graph path_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; i++) e.emplace_back(i, i + 1);
  return Graph(n, std::move(e));
}

Graph random_graph(int n, double p, uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  for (int u = 0; u < n; u++)
    for (int v = u + 1; v < n; v++)
      if (rng.bernoulli(p)) e.emplace_back(u, v);
  return Graph(n, std::move(e));
}

const TreePattern kP3({0, 1});
const TreePattern kP5({0, 1, 2, 3});
const TreePattern kStar3({0, 0, 0});
const TreePattern kSpider({0, 0, 0, 3});

}  // namespace

TEST_CASE("tree pattern structure") {
  CHECK(kP3.k() == 3);
  CHECK(kP3.depth() == 2);
  CHECK(kP3.children(0) == std::vector<int>{1});
  CHECK(kP3.children(2).empty());
  CHECK(kStar3.depth() == 1);
  CHECK(kStar3.children(0) == std::vector<int>{1, 2, 3});
  CHECK(kSpider.depth() == 2);
  CHECK(kSpider.children(3) == std::vector<int>{4});
  CHECK(kSpider.parent(4) == 3);
  CHECK(kP5.depth() == 4);
  CHECK(kP5.pattern().edge_count() == 4);

  CHECK_THROWS_AS(TreePattern({}), ValidationError);
  CHECK_THROWS_AS(TreePattern({0, 2}), ValidationError);  // parent must be smaller
  CHECK_THROWS_AS(TreePattern({0, 0, 0, 0, 0, 0, 0, 0}), ValidationError);  // 9 nodes
}

TEST_CASE("subtree extraction relabels consistently") {
  std::vector<int> map;
  TreePattern sub = kP5.subtree(2, &map);
  CHECK(sub.k() == 3);
  CHECK(sub.depth() == 2);
  CHECK(map == std::vector<int>{2, 3, 4});
  CHECK(sub.children(0) == std::vector<int>{1});

  TreePattern leg = kSpider.subtree(3, &map);
  CHECK(leg.k() == 2);
  CHECK(map == std::vector<int>{3, 4});

  CHECK_THROWS_AS(kSpider.subtree(4), ValidationError);  // single node
  CHECK_THROWS_AS(kSpider.subtree(9), ValidationError);
}

TEST_CASE("attempt budget formula") {
  CHECK(tree_attempt_budget(2) == 40);
  CHECK(tree_attempt_budget(3) == 270);
  CHECK(tree_attempt_budget(4) == 2560);
  CHECK(tree_attempt_budget(5) == 31250);
  CHECK_THROWS_AS(tree_attempt_budget(1), ValidationError);
}

TEST_CASE("deterministic closing cascade on a colored path") {
  Graph g = path_graph(3);
  auto run = run_check_tree(g, kP3, {0, 1, 2});
  CHECK(run.closed == std::vector<char>{1, 1, 1});
  REQUIRE(run.detected);
  CHECK(run.detections[0].node == 0);
  CHECK(run.detections[0].witness == std::vector<int>{0, 1, 2});
  CHECK(oracle::is_copy_at(g, kP3.pattern(), run.detections[0].witness));
  CHECK(run.transcript.rounds == 2);
  CHECK(run.transcript.max_bits == ceil_log2(3) + 1);

  // missing child color: nothing closes beyond the leaves
  auto stuck = run_check_tree(g, kP3, {0, 1, 1});
  CHECK_FALSE(stuck.detected);
  CHECK(stuck.closed == std::vector<char>{0, 0, 0});  // color-1 nodes need a closed 2

  // root color present but at the wrong place
  auto wrong = run_check_tree(g, kP3, {2, 0, 1});
  CHECK_FALSE(wrong.detected);
}

TEST_CASE("closing matches the oracle on random graphs and colorings") {
  for (uint64_t seed = 0; seed < 8; seed++) {
    Graph g = random_graph(10, 0.3, 400 + seed);
    Rng rng(7000 + seed);
    std::vector<int> colors(g.n());
    for (auto& c : colors) c = static_cast<int>(rng.below(kSpider.k()));
    auto run = run_check_tree(g, kSpider, colors);
    for (int u = 0; u < g.n(); u++) {
      bool is_leaf_label = kSpider.children(colors[u]).empty();
      bool expect;
      if (is_leaf_label) {
        expect = true;  // a lone leaf is a properly colored single-node subtree
      } else {
        std::vector<int> label_map;
        TreePattern sub = kSpider.subtree(colors[u], &label_map);
        std::vector<int> pre(sub.k(), -1);
        pre[0] = u;
        auto found = oracle::find_copy_with(
            g, sub.pattern(), pre,
            [&](int label, int vertex) { return colors[vertex] == label_map[label]; });
        expect = found.has_value();
      }
      CHECK(static_cast<bool>(run.closed[u]) == expect);
    }
  }
}

TEST_CASE("tree tester is exact on small instances") {
  TreeTestOptions opt;
  opt.seed = 31;

  // present: path inside a triangle
  Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
  TesterResult r = test_tree_freeness(tri, kP3, opt);
  REQUIRE(r.reject);
  CHECK(oracle::is_copy_at(tri, kP3.pattern(), r.witness));

  // absent: a star needs a degree-3 vertex, C5 has none
  Graph c5(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  TesterResult r2 = test_tree_freeness(c5, kStar3, opt);
  CHECK_FALSE(r2.reject);
  CHECK(r2.attempts == tree_attempt_budget(4));
  CHECK(r2.detections == 0);

  // absent: P5 needs five vertices
  TesterResult r3 = test_tree_freeness(path_graph(4), kP5, opt);
  CHECK_FALSE(r3.reject);

  // present: the one and only copy, spider planted on its own
  Graph spider_g(5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}});
  TesterResult r4 = test_tree_freeness(spider_g, kSpider, opt);
  REQUIRE(r4.reject);
  CHECK(oracle::is_copy_at(spider_g, kSpider.pattern(), r4.witness));

  // present: P5 along a bare path, only two properly colored orientations
  TesterResult r5 = test_tree_freeness(path_graph(5), kP5, opt);
  REQUIRE(r5.reject);
  CHECK(oracle::is_copy_at(path_graph(5), kP5.pattern(), r5.witness));
}

TEST_CASE("tree tester agrees with the oracle across random graphs") {
  TreeTestOptions opt;
  for (uint64_t seed = 0; seed < 10; seed++) {
    Graph g = random_graph(12, 0.15, 4400 + seed);
    opt.seed = seed;
    for (const TreePattern* t : {&kP3, &kStar3}) {
      TesterResult r = test_tree_freeness(g, *t, opt);
      bool has = oracle::contains_copy(g, t->pattern());
      if (r.reject) {
        CHECK(has);
        CHECK(oracle::is_copy_at(g, t->pattern(), r.witness));
      } else {
        // exactness: missing a present copy has probability <= e^-10
        CHECK_FALSE(has);
      }
    }
  }
}

TEST_CASE("tree tester transcript accounting") {
  Graph g = path_graph(6);
  TreeTestOptions opt;
  opt.seed = 3;
  opt.attempts_override = 50;
  opt.stop_on_first_detection = false;
  TesterResult r = test_tree_freeness(g, kP3, opt);
  CHECK(r.attempts == 50);
  CHECK(r.sim_rounds == 50 * kP3.depth());
  CHECK(r.paper_rounds == 50 * kP3.depth());
  CHECK(r.max_bits_per_edge == ceil_log2(3) + 1);
  // ~0.25 per attempt: 4 triples x 2 orientations, each 1/27, minus overlap
  CHECK(r.detections >= 5);
  CHECK(r.detections <= 25);
}
