#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpt/graph.hpp"
#include "cpt/rng.hpp"
#include "cpt/tester.hpp"

namespace cpt {

// Layered graphs generated from a sum-free residue family. A generating
// set X modulo a prime p has the property that any k-tuple from X with
// sum(x_1..x_{k-1}) = (k-1)*x_k (mod p) must be constant. Placing s layers
// of n vertices in a ring and, for every shift x in X and base i, linking
// the transversal (layer t, index i+(t-1)x mod n) yields:
//   - the cycle variant: only the s ring edges per transversal, and
//   - the clique variant: all pairs, so every transversal carries a K_s.
// The sum-free property keeps distinct transversals nearly disjoint, which
// makes these graphs locally sparse yet rich in planted cliques.

struct ResidueFamily {
  long long p = 0;          // prime modulus
  int k = 0;                // tuple arity
  std::vector<long long> x; // residues, ascending

  nlohmann::json to_json() const;
  static ResidueFamily from_json(const nlohmann::json& j);
};

// Greedy construction: scan residues 0..p-1 and keep each one that leaves
// the family violation-free under the exhaustive check.
ResidueFamily build_behrend_set(long long p, int k);

// Exhaustive check over all |X|^k ordered tuples; throws beyond 10^7 tuples.
bool verify_behrend_set(const ResidueFamily& fam);

struct LayeredGraph {
  Graph graph{0, {}};
  int s = 0;                 // number of layers (odd)
  long long n = 0;           // layer size (prime)
  bool clique_variant = false;
  ResidueFamily family;
  std::vector<int> layer_of;             // 1..s per vertex; for tests/oracles only
  std::vector<std::vector<int>> tuples;  // generated transversals, vertex ids
  long long duplicate_edges = 0;         // tuple pairs that tried to re-add an edge

  int vertex(int layer, long long index) const;  // id of (layer, index)
  nlohmann::json sidecar_json() const;  // {s, n, x, layers} — never fed to nodes
};

LayeredGraph build_bc(int s, long long n, const ResidueFamily& fam);  // cycle edges
LayeredGraph build_bk(int s, long long n, const ResidueFamily& fam);  // clique edges

// n^((log2 log2 log2 n + 4) / log2 log2 n); defined for n >= 16.
double f_of_n(double n);

// Every one of `n` nodes samples itself with probability 1/n; returns how
// many did, capped at 2. Pr[exactly one] >= 1 - 1/e - 1/2 for all n.
int sample_single(long long n, Rng& rng);

// Clique detection on the clique variant without layer knowledge. Each
// repetition: (1) s^2 mark slots are filled by self-sampling, (2) every
// node v keeps per-slot-column j a set A_j(v) of possible layers and strikes
// layer i when a neighbor is marked (i,j), (3) nodes whose A_j collapsed to
// exactly {j} adopt color j, (4) a weighted color-coded BFS hunts an s-cycle
// through consecutive colors, and (5) a detected cycle is accepted as a
// witness only after its s vertices confirm pairwise adjacency over two
// extra rounds, so a reject is sound under arbitrary (even adversarial)
// marking.
struct BehrendDetectOptions {
  uint64_t seed = 0;
  long long max_reps = 1;
  int beta = 8;
  bool stop_on_first_detection = true;
  // Rigged marking: marks[i-1][j-1] is the vertex id that believes it is
  // the j-th mark of color i. Replaces self-sampling in every repetition.
  const std::vector<std::vector<int>>* forced_marks = nullptr;
};

TesterResult detect_ks_behrend(const LayeredGraph& g, const BehrendDetectOptions& opt = {});

// Mark table that makes exactly the given generated transversal safe, so a
// single repetition detects its clique deterministically. Uses the layer
// map (test-side only). Requires at least two residues in the family.
std::vector<std::vector<int>> rig_marks_for_tuple(const LayeredGraph& g, int tuple_index);

// Reference replay of the elimination phase for a forced mark table:
// the color (1..s) each vertex would adopt, or -1. Lets tests check the
// safety invariants without running the message protocol.
std::vector<int> safe_color_map(const LayeredGraph& g,
                                const std::vector<std::vector<int>>& marks);

}  // namespace cpt
