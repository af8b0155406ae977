#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpt/graph.hpp"

namespace cpt {

// A graph built around a certified set of pairwise edge-disjoint copies of a
// pattern. Each copy needs at least one deleted edge before the graph can
// become pattern-free, so |planted| / m lower-bounds the edit distance and
// eps_certified = |planted| * edge_count / m is the density the testers can
// be promised.
struct PlantedInstance {
  Graph graph;
  Pattern pattern;
  std::vector<std::vector<int>> planted;  // vertex tuples in pattern-label order
  double eps_certified = 0.0;

  nlohmann::json sidecar_json() const;  // {pattern: {k, edges}, planted, eps_certified}
};

// Plants ceil(target_eps * target_m / edge_count) vertex-disjoint copies of
// h on a prefix of the vertices and pads to exactly target_m edges with
// filler confined to the leftover block, so no copy can mix planted and
// filler edges. Filler policy by family: cliques get an (s-1)-partite block,
// odd cycles a bipartite block, even cycles a forest, and any other pattern
// rejection sampling against the exact reference check, keeping the planted
// list a complete inventory for cliques and cycles. Throws ValidationError
// naming the binding constraint when the budgets do not fit.
PlantedInstance plant_disjoint_copies(int n, int target_m, const Pattern& h, double target_eps,
                                      uint64_t seed);

// Edge-disjoint (vertex-sharing) packing of `copies` cliques K_s on n
// vertices with no filler, so eps_certified is 1. Vertex sets are sampled
// greedily until their pairs are all unused; throws ValidationError when the
// packing does not fit.
PlantedInstance plant_clique_packing(int n, int copies, int s, uint64_t seed);

// A graph the exact reference check certifies to be h-free: random bipartite
// for odd cycles, (s-1)-partite for cliques K_s, and otherwise rejection
// sampling that drops every candidate edge which would complete a copy.
// Throws ValidationError when m edges cannot be placed.
Graph make_h_free(int n, int m, const Pattern& h, uint64_t seed);

// Uniform random simple graph with exactly m distinct edges.
Graph gen_gnm(int n, int m, uint64_t seed);

// Uniform random DAG: m distinct arcs, each oriented along a hidden random
// topological order, so the result never has a directed cycle.
DiGraph gen_random_dag(int n, int m, uint64_t seed);

}  // namespace cpt
