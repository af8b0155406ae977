#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cpt/graph.hpp"
#include "cpt/rng.hpp"
#include "cpt/sim.hpp"
#include "cpt/tester.hpp"

namespace cpt {

// Clique detection by neighbor color classes. Each node u splits its
// neighborhood into C(u) random classes and scans each class one candidate
// per round: the candidate id goes to the whole class, every class member
// answers with one adjacency bit, and u accumulates the bits until some
// class holds s-1 members it knows to be pairwise adjacent — those plus u
// form a K_s, so a reject is always genuine. The variants differ only in
// the choice of C(u) and the round budget R.
//
// One scan round costs two simulator rounds (candidate out, bits back);
// TesterResult::paper_rounds reports the nominal budget R while sim_rounds
// counts simulator rounds actually executed, which is typically far less
// because nodes go quiescent once every class is exhausted.

// Degree bound that makes a vertex cheap enough to scan: sqrt(2*m*|E(h)|/eps).
double good_vertex_threshold(long long m, const Pattern& h, double eps);

// Greedy edge-disjoint packing over copies that contain a vertex under the
// threshold. Certifies that an instance has many cheaply detectable copies.
long long count_good_disjoint_copies_lb(const Graph& g, const Pattern& h, double eps);

// Parameter formulas, exposed so tests can pin them exactly.
long long triangle_classes(int degree);         // ceil(d/200)
long long triangle_round_budget();              // ceil(202*e^2) = 1493
long long ks_classes(int s, double eps, long long m);       // ceil((eps*m/(2s^4))^(1/(s-2)))
long long ks_round_budget(int s, double eps, long long m);  // see implementation
long long bounded_degree_classes(int degree, int s, double alpha);  // ceil(d/(2a)^(s-2))
long long bounded_degree_round_budget(int s, double alpha);  // ceil(e^2((2a)^(s-2)+s-1))
double bounded_degree_cap(int s, double alpha, double eps, long long m);  // (a*eps*m)^(1/(s-2))

struct CliqueOptions {
  uint64_t seed = 0;                    // reseeds every node deterministically
  int beta = 8;                         // bandwidth budget factor
  bool stop_on_first_detection = true;  // false: run the full budget, count rejects
};

// Triangle scan with C(u) = ceil(d(u)/200) and a fixed round budget; takes
// no farness parameter. The 2/3 detection guarantee applies when
// eps >= min(m^(-1/3), n/m).
TesterResult test_triangle_freeness(const Graph& g, const CliqueOptions& opt = {});

// K_s scan for s in [4,8]. Uses the exact edge count unless an estimate is
// supplied; the estimate only changes C(u)/R, never soundness.
TesterResult test_ks_freeness(const Graph& g, int s, double eps,
                              std::optional<long long> m_estimate = std::nullopt,
                              const CliqueOptions& opt = {});

// As above when m is unknown: reruns the scan for estimates n, 2n, 4n, ...
// capped at n^2, rejecting if any run rejects.
TesterResult test_ks_freeness_guessing(const Graph& g, int s, double eps,
                                       const CliqueOptions& opt = {});

// Constant-round variant for s in [3,8] under the degree cap
// max_degree <= (alpha*eps*m)^(1/(s-2)); throws if the cap fails.
TesterResult test_ks_bounded_degree(const Graph& g, int s, double alpha, double eps,
                                    const CliqueOptions& opt = {});

// The per-node class draw used by every variant, exposed for distribution
// tests: one uniform value in [0, classes) per port, in port order.
std::vector<int> draw_neighbor_classes(int degree, long long classes, Rng& rng);

// One deterministic scan with explicit class assignments, for white-box
// tests. colors[v][p] is the class of v's p-th neighbor; class counts are
// inferred per node as max+1.
struct CliqueScanRun {
  bool detected = false;
  std::vector<RejectEvent> detections;
  Transcript transcript;
};

CliqueScanRun run_clique_scan(const Graph& g, int s, long long round_budget,
                              const std::vector<std::vector<int>>& colors, int beta = 8);

}  // namespace cpt
