#pragma once

#include <cstdint>
#include <vector>

namespace cpt {

// Outcome of one full tester run (all attempts / repetitions on one graph).
// The testers have one-sided error: reject always comes with a concrete
// witness that the brute-force reference can confirm.
struct TesterResult {
  bool reject = false;
  std::vector<int> witness;      // vertex ids of the detected copy, if known
  long long attempts = 0;        // attempts actually executed
  long long detections = 0;      // attempts that detected a copy
  long long sim_rounds = 0;      // engine rounds actually simulated, summed
  long long paper_rounds = 0;    // nominal worst-case rounds of the protocol
  int max_bits_per_edge = 0;     // largest charged message over the run
};

}  // namespace cpt
