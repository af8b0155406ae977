#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cpt/graph.hpp"

// Brute-force reference implementations. Everything here is exhaustive and
// deterministic; the randomized testers are judged against these.
namespace cpt::oracle {

// Assignment of pattern labels to distinct graph vertices such that every
// pattern edge is present (subgraph embedding, not induced).
bool is_copy_at(const Graph& g, const Pattern& h, std::span<const int> map);
bool is_copy_at(const DiGraph& g, const DiPattern& h, std::span<const int> map);

std::optional<std::vector<int>> find_copy(const Graph& g, const Pattern& h);
std::optional<std::vector<int>> find_copy(const DiGraph& g, const DiPattern& h);
bool contains_copy(const Graph& g, const Pattern& h);
bool contains_copy(const DiGraph& g, const DiPattern& h);

// Backtracking search with hooks: labels may be preassigned (vertex id or -1)
// and a per-(label, vertex) admissibility filter may be supplied.
std::optional<std::vector<int>> find_copy_with(
    const Graph& g, const Pattern& h, const std::vector<int>& preassigned,
    const std::function<bool(int label, int vertex)>& ok);

// Copies counted as distinct edge subsets. Guarded to |V(g)| <= 20.
long long count_copies(const Graph& g, const Pattern& h);
long long count_copies(const DiGraph& g, const DiPattern& h);

// All copies as canonical sorted edge lists, lexicographically ordered.
std::vector<std::vector<Edge>> enumerate_copies(const Graph& g, const Pattern& h);
std::vector<std::vector<Edge>> enumerate_copies(const DiGraph& g, const DiPattern& h);

// Greedy maximal edge-disjoint packing over the lexicographic copy order.
// A lower bound on the maximum packing; deterministic.
struct Packing {
  long long count = 0;
  std::vector<std::vector<Edge>> copies;
};
Packing packing_lb(const Graph& g, const Pattern& h);
Packing packing_lb(const DiGraph& g, const DiPattern& h);

// Exact minimum number of edge deletions that destroys every copy.
// Branch and bound; guarded to |V(g)| <= 14.
int min_deletion_to_h_free(const Graph& g, const Pattern& h);

// All connected graphs on k labeled vertices up to isomorphism, k <= 6,
// deduplicated by minimum adjacency bitstring. Sorted by edge count, then
// by canonical form.
std::vector<Pattern> enumerate_connected(int k);

// Graph isomorphism by backtracking, |V| <= 10.
bool are_isomorphic(const Graph& a, const Graph& b);

}  // namespace cpt::oracle
