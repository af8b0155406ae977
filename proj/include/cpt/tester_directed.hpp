#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpt/graph.hpp"
#include "cpt/tester.hpp"
#include "cpt/tester_cycles.hpp"

namespace cpt {

// Two-party set-disjointness instance compiled into a directed graph.
// Fixed skeleton: a ring A -> C1..C5 -> B -> D1..D5 -> A; per universe
// element i an input node u_i and a witness node w_i; fan arcs A -> w_i and
// B -> w_i; chains u_1 -> .. -> u_nU and w_1 -> .. -> w_nU with entry
// D1 -> u_1 and returns u_nU -> C3, w_nU -> C3. The skeleton is strongly
// connected and diamond-free for every nU because each potential meeting
// node other than the w_i has at most one in-arc per two-hop source. The
// private sets add arcs (u_i, A) for i in X and (u_i, B) for i in Y, and the
// 4-node diamond (0->1, 0->2, 1->3, 2->3) then embeds iff X and Y intersect:
// u_i plays 0, A plays 1, B plays 2, any w_j plays 3. Element i of the
// intersection yields the copy {u_i, A, B, w_i}, arc-disjoint across i.
struct GapDisjInstance {
  long long nU = 0;
  std::vector<int> X, Y;  // subsets of {1..nU}, ascending
  DiGraph graph{0, {}};

  static constexpr int kA = 0;
  static constexpr int kB = 1;
  int c_node(int j) const;         // C_j, j in 1..5
  int d_node(int j) const;         // D_j, j in 1..5
  int universe_node(int i) const;  // input node u_i, element i in 1..nU
  int witness_node(int i) const;   // witness node w_i, element i in 1..nU

  nlohmann::json sidecar_json() const;  // {nU, X, Y}
};

GapDisjInstance gen_gapdisj(long long nU, std::vector<int> X, std::vector<int> Y);

// Diamond tester in the directed-broadcast model. Per attempt every node
// draws a color in [4] and a weight below n^4; color-0 nodes broadcast
// (weight, id), colors 1 and 2 forward the lightest offer they heard with a
// side bit, and a color-3 node rejects when matching offers arrive over both
// side bits, which certifies all four arcs. Witnesses list the four nodes in
// pattern-label order 0,1,2,3.
struct DiamondOptions {
  double eps = 0.1;
  uint64_t seed = 0;
  long long attempts_override = 0;  // 0: use diamond_attempt_budget(eps)
  int beta = 8;
  bool stop_on_first_detection = true;
};

// ceil(20 * 4^4 / eps): per-attempt success is eps times the color-coding
// factor 1/4^4, and 20 of those drive the failure probability below 1/10.
long long diamond_attempt_budget(double eps);

TesterResult test_diamond_freeness(const DiGraph& g, const DiamondOptions& opt);

// One deterministic diamond attempt with explicit colors (in [4]) and one
// weight per node, for white-box tests.
ColorBfsRun run_diamond_attempt(const DiGraph& g, const std::vector<int>& colors,
                                const std::vector<uint64_t>& weights, int beta = 8);

// Directed k-cycle tester: the color-coded BFS of test_ck_freeness with
// messages travelling along arcs only. Weights are drawn by arc sources
// (one per node, shared by its out-arcs, as broadcast allows no more).
TesterResult test_directed_ck_freeness(const DiGraph& g, int k, const CkOptions& opt);

ColorBfsRun run_directed_color_bfs(const DiGraph& g, int k, const std::vector<int>& colors,
                                   const std::vector<uint64_t>& weights, int beta = 8);

}  // namespace cpt
