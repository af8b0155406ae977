#pragma once

#include <cstdint>
#include <vector>

#include "cpt/graph.hpp"
#include "cpt/sim.hpp"
#include "cpt/tester.hpp"

namespace cpt {

// Rooted labeled tree on 2..8 nodes. Node 0 is the root; node i's parent is
// parents[i-1], which must be a smaller label.
class TreePattern {
 public:
  explicit TreePattern(std::vector<int> parents);

  int k() const { return k_; }
  int depth() const { return depth_; }  // longest leaf-to-root hop count
  int parent(int i) const;              // i in [1, k)
  const std::vector<int>& children(int x) const { return children_[x]; }
  const std::vector<int>& parents() const { return parents_; }
  const Pattern& pattern() const { return pattern_; }

  // Subtree rooted at x, relabeled to 0..size-1 in ascending original-label
  // order (so the subtree root is label 0). label_map, if given, receives
  // the original label of each new label.
  TreePattern subtree(int x, std::vector<int>* label_map = nullptr) const;

 private:
  int k_ = 0;
  int depth_ = 0;
  std::vector<int> parents_;
  std::vector<std::vector<int>> children_;
  Pattern pattern_;
};

// Exact tree detection: every node draws a label of T as its color; leaves
// start closed, and a node closes once it has heard a closed neighbor for
// each child label of its own color. After depth(T) rounds a root-colored
// node is closed iff it roots a properly colored copy of T, so rejection is
// exact per coloring and one-sided overall.

long long tree_attempt_budget(int k);  // 10 * k^k colorings

struct TreeTestOptions {
  uint64_t seed = 0;
  long long attempts_override = 0;  // 0: use tree_attempt_budget(k)
  int beta = 8;
  bool stop_on_first_detection = true;
};

TesterResult test_tree_freeness(const Graph& g, const TreePattern& t,
                                const TreeTestOptions& opt);

// One deterministic closing cascade under an explicit coloring, exposing the
// final state of every node for white-box tests.
struct TreeCheckRun {
  bool detected = false;
  std::vector<char> closed;
  std::vector<RejectEvent> detections;
  Transcript transcript;
};

TreeCheckRun run_check_tree(const Graph& g, const TreePattern& t,
                            const std::vector<int>& colors, int beta = 8);

}  // namespace cpt
