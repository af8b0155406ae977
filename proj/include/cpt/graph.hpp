#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cpt {

using Edge = std::pair<int, int>;

// Simple undirected graph, immutable after construction. Vertices are
// 0..n-1; edges are stored canonically as (min,max) and sorted.
class Graph {
 public:
  Graph() = default;
  Graph(int n, std::vector<Edge> edges);

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  int degree(int v) const { return adj_off_[v + 1] - adj_off_[v]; }
  std::span<const int> neighbors(int v) const {
    return {adj_.data() + adj_off_[v], adj_.data() + adj_off_[v + 1]};
  }
  bool has_edge(int u, int v) const;
  int max_degree() const;

  bool operator==(const Graph& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> adj_off_, adj_;
};

// Simple directed graph (no self-loops, no parallel arcs; antiparallel
// pairs are allowed). Arcs are stored sorted.
class DiGraph {
 public:
  DiGraph() = default;
  DiGraph(int n, std::vector<Edge> arcs);

  int n() const { return n_; }
  int m() const { return static_cast<int>(arcs_.size()); }
  const std::vector<Edge>& arcs() const { return arcs_; }

  int out_degree(int v) const { return out_off_[v + 1] - out_off_[v]; }
  int in_degree(int v) const { return in_off_[v + 1] - in_off_[v]; }
  std::span<const int> out_neighbors(int v) const {
    return {out_.data() + out_off_[v], out_.data() + out_off_[v + 1]};
  }
  std::span<const int> in_neighbors(int v) const {
    return {in_.data() + in_off_[v], in_.data() + in_off_[v + 1]};
  }
  bool has_arc(int u, int v) const;

  bool operator==(const DiGraph& other) const {
    return n_ == other.n_ && arcs_ == other.arcs_;
  }

 private:
  int n_ = 0;
  std::vector<Edge> arcs_;
  std::vector<int> out_off_, out_, in_off_, in_;
};

// Connected undirected pattern on at most 8 labeled vertices; the shape the
// testers look for.
class Pattern {
 public:
  Pattern() = default;
  Pattern(int k, std::vector<Edge> edges);

  int k() const { return g_.n(); }
  int edge_count() const { return g_.m(); }
  const Graph& graph() const { return g_; }

  bool operator==(const Pattern& other) const { return g_ == other.g_; }

 private:
  Graph g_;
};

// Weakly connected directed pattern on at most 8 labeled vertices.
class DiPattern {
 public:
  DiPattern() = default;
  DiPattern(int k, std::vector<Edge> arcs);

  int k() const { return g_.n(); }
  int arc_count() const { return g_.m(); }
  const DiGraph& digraph() const { return g_; }

 private:
  DiGraph g_;
};

// Edge-list text format. First line "n m" (or "n m directed"), then one
// "u v" pair per line.
Graph parse_graph(const std::string& text);
DiGraph parse_digraph(const std::string& text);
bool edge_list_is_directed(const std::string& text);
std::string write_graph(const Graph& g);
std::string write_digraph(const DiGraph& g);

// Partition of the vertices into connected components, each sorted, ordered
// by smallest member.
std::vector<std::vector<int>> connected_components(const Graph& g);

// Named pattern catalog: "C3".."C8" cycles, "K3".."K8" cliques, "P2".."P8"
// paths, "S1".."S7" stars. Throws ValidationError for unknown names.
Pattern pattern_by_name(const std::string& name);
Pattern clique_pattern(int s);
Pattern cycle_pattern(int k);
DiPattern directed_cycle_pattern(int k);
DiPattern diamond_pattern();  // arcs 0->1, 0->2, 1->3, 2->3

int ceil_log2(int n);  // smallest b with 2^b >= n, at least 1

}  // namespace cpt
