#pragma once

// Tester for "anchored" patterns: connected graphs that contain an edge
// (the anchor) whose two endpoints together touch every cycle.  Such a
// pattern can always be assembled from a small construction recipe:
//
//   stage 1 (anchor):      two labels 0 and 1 joined by an edge;
//   stage 2 (cycles):      label-cycles through 0 and/or 1, pairwise
//                          disjoint except at 0/1;
//   stage 3 (trees):       trees on fresh labels, each rooted at a
//                          stage-1/2 label;
//   stage 4 (extra edges): additional edges from 0 and from 1 back to
//                          labels introduced earlier.
//
// The distributed tester walks the recipe: it color-codes the host graph,
// elects one candidate anchor edge by weight flooding, verifies the extra
// edges locally, then runs one closure sub-protocol per tree and one
// cycle-chase sub-protocol per cycle, all tagged with the elected anchor
// so that unrelated regions of the graph cannot interfere.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpt/graph.hpp"
#include "cpt/sim.hpp"
#include "cpt/tester.hpp"

namespace cpt {

// One stage-2 cycle, given as its label sequence in cyclic order.  The
// sequence must contain label 0 or label 1 (or both, at most once each);
// owner is 0 when the cycle contains 0 and 1 otherwise.
struct CycleSpec {
    std::vector<int> labels;
    int owner = 0;
};

// One stage-3 tree.  `nodes` lists the fresh labels with each node's
// parent in the parallel `parents` array; parents must appear earlier in
// `nodes` (or be the root itself).
struct TreeSpec {
    int root = 0;
    std::vector<int> nodes;
    std::vector<int> parents;
};

struct Recipe {
    std::vector<CycleSpec> cycles;
    std::vector<TreeSpec> trees;
    std::vector<int> extra0;  // labels that get an extra edge to label 0
    std::vector<int> extra1;  // labels that get an extra edge to label 1

    // Total number of labels (always >= 2; anchor labels 0 and 1 plus the
    // fresh labels of cycles and trees, which must form 2..k-1).
    int label_count() const;

    // Throws ValidationError naming the offending stage if the recipe is
    // not a well-formed construction.
    void validate() const;

    nlohmann::json to_json() const;
    static Recipe from_json(const nlohmann::json& j);
};

// Builds the pattern a recipe describes (validates first).
Pattern recompose(const Recipe& r);

// Returns an edge whose endpoints touch every cycle of h (smallest such
// edge in lexicographic order), or nullopt when no edge qualifies.
std::optional<Edge> find_anchor_edge(const Pattern& h);

// Constructive inverse of recompose: splits h into a recipe, mapping the
// anchor endpoints to labels 0 and 1.  Throws if the anchor is not a
// valid witness (h minus both endpoints must be acyclic).
Recipe decompose_anchored(const Pattern& h, Edge anchor);

// Convenience bundle: pattern together with its anchor and recipe.
struct AnchoredMember {
    Pattern pattern;
    Edge anchor;
    Recipe recipe;
};

// Throws ValidationError when h has no anchor edge.
AnchoredMember make_anchored_member(const Pattern& h);

// Number of attempts used to amplify the per-attempt detection
// probability (at least eps/k^k) to a constant: ceil(20 * k^k / eps).
long long anchored_attempt_budget(int k, double eps);

struct AnchoredTestOptions {
    double eps = 0.1;
    std::uint64_t seed = 0;
    long long attempts_override = 0;  // 0 = use anchored_attempt_budget
    int beta = 8;
    bool stop_on_first_detection = true;
};

// One-sided tester for freeness of the pattern described by `recipe`.
// Rejection always comes with a label->vertex witness of a genuine copy.
TesterResult test_anchored_freeness(const Graph& g, const Recipe& recipe,
                                    const AnchoredTestOptions& opt = {});

// Debug view of the anchor-election flood: one round of color exchange
// followed by `k` rounds of (weight, endpoints) flooding.  Entry v of the
// result holds the elected pair seen by v, or (-1,-1) when v heard
// nothing.  `weights[v][p]` is the weight v assigns to the orientation
// toward its p-th neighbor; all weights must lie below n^4.
struct FloodBeliefs {
    std::vector<long long> u0, u1;
    std::vector<std::uint64_t> wgt;
    Transcript transcript;
};
FloodBeliefs run_anchored_flood(const Graph& g, int k, const std::vector<int>& colors,
                                const std::vector<std::vector<std::uint64_t>>& weights,
                                int beta = 8);

}  // namespace cpt
