#pragma once

#include <cstdint>
#include <vector>

#include "cpt/graph.hpp"
#include "cpt/sim.hpp"
#include "cpt/tester.hpp"

namespace cpt {

// Randomized k-cycle detection by color-coded BFS. Every node draws a color
// in [k] and a weight per outgoing edge orientation; the globally lightest
// edge implicitly selects a random BFS origin, and the BFS only advances
// along edges whose endpoint colors are consecutive. A cycle is reported
// when a color-0 node hears its own id as the BFS root in the final round,
// which is possible only if a properly colored k-cycle exists, so a reject
// always comes with a genuine witness.

struct CkOptions {
  double eps = 0.1;                    // farness parameter
  uint64_t seed = 0;                   // global seed; attempt a reseeds all nodes
  long long attempts_override = 0;     // 0: use ck_attempt_budget(k, eps)
  int beta = 8;                        // bandwidth budget factor
  bool stop_on_first_detection = true; // false: run every attempt, count detections
};

// ceil(20 * k^k / eps) attempts drive the failure probability below 1/10.
long long ck_attempt_budget(int k, double eps);

TesterResult test_ck_freeness(const Graph& g, int k, const CkOptions& opt);

// One deterministic BFS attempt with explicit colors and weights, for
// white-box tests. weights[v][p] is the weight of the orientation from v to
// its p-th neighbor; aborted nodes (if given) never send.
struct ColorBfsRun {
  bool detected = false;
  std::vector<RejectEvent> detections;
  Transcript transcript;
};

ColorBfsRun run_color_bfs(const Graph& g, int k, const std::vector<int>& colors,
                          const std::vector<std::vector<uint64_t>>& weights,
                          const std::vector<char>& aborted = {}, int beta = 8);

}  // namespace cpt
