#include "cpt/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"
#include "cpt/oracle.hpp"
#include "cpt/rng.hpp"

namespace cpt {

namespace {

bool pattern_is_clique(const Pattern& h) {
  return h.edge_count() == h.k() * (h.k() - 1) / 2;
}

bool pattern_is_cycle(const Pattern& h) {
  if (h.k() < 3 || h.edge_count() != h.k()) return false;
  for (int v = 0; v < h.k(); v++)
    if (h.graph().degree(v) != 2) return false;
  return true;
}

template <typename T>
void shuffle_with(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; i--) {
    size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

// All vertex pairs {u,v} with lo <= u < v < hi whose part labels differ,
// where the part of v is (v - lo) % parts. parts == 1 means no constraint.
std::vector<Edge> cross_part_pairs(int lo, int hi, int parts) {
  std::vector<Edge> out;
  for (int u = lo; u < hi; u++)
    for (int v = u + 1; v < hi; v++)
      if (parts <= 1 || (u - lo) % parts != (v - lo) % parts) out.push_back({u, v});
  return out;
}

// Filler for patterns without a partition recipe: add shuffled candidate
// pairs one at a time, dropping any that would complete a copy inside the
// filler block. The filler block has no edge into the planted block, so
// checking the filler subgraph alone is exact.
std::vector<Edge> sampled_copyfree_edges(int n, int lo, int hi, int want, const Pattern& h,
                                         Rng& rng) {
  std::vector<Edge> candidates = cross_part_pairs(lo, hi, 1);
  shuffle_with(candidates, rng);
  std::vector<Edge> kept;
  for (const Edge& e : candidates) {
    if (static_cast<int>(kept.size()) == want) break;
    kept.push_back(e);
    if (oracle::contains_copy(Graph(n, kept), h)) kept.pop_back();
  }
  if (static_cast<int>(kept.size()) < want)
    throw ValidationError("filler capacity: only " + std::to_string(kept.size()) + " of " +
                          std::to_string(want) +
                          " filler edges fit without completing another copy");
  return kept;
}

std::vector<Edge> take_random(std::vector<Edge> pool, int want, Rng& rng, const char* what) {
  if (static_cast<int>(pool.size()) < want)
    throw ValidationError(std::string("filler capacity: the ") + what + " block holds " +
                          std::to_string(pool.size()) + " edges, need " + std::to_string(want));
  shuffle_with(pool, rng);
  pool.resize(want);
  return pool;
}

}  // namespace

nlohmann::json PlantedInstance::sidecar_json() const {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : pattern.graph().edges()) edges.push_back({e.first, e.second});
  return {{"pattern", {{"k", pattern.k()}, {"edges", edges}}},
          {"planted", planted},
          {"eps_certified", eps_certified}};
}

PlantedInstance plant_disjoint_copies(int n, int target_m, const Pattern& h, double target_eps,
                                      uint64_t seed) {
  if (h.k() < 2 || h.edge_count() < 1) throw ValidationError("pattern needs at least one edge");
  if (target_eps <= 0.0 || target_eps > 1.0) throw ValidationError("target_eps must be in (0,1]");
  if (n < 1 || target_m < 1) throw ValidationError("graph size must be positive");

  long long copies =
      static_cast<long long>(std::ceil(target_eps * target_m / h.edge_count() - 1e-9));
  copies = std::max<long long>(copies, 1);
  if (copies * h.k() > n)
    throw ValidationError("vertex budget: " + std::to_string(copies) + " copies of a " +
                          std::to_string(h.k()) + "-vertex pattern need " +
                          std::to_string(copies * h.k()) + " vertices, graph has " +
                          std::to_string(n));
  if (copies * h.edge_count() > target_m)
    throw ValidationError("edge budget: " + std::to_string(copies) + " copies carry " +
                          std::to_string(copies * h.edge_count()) + " edges, graph has " +
                          std::to_string(target_m));

  PlantedInstance inst;
  inst.pattern = h;

  std::vector<Edge> edges;
  for (long long c = 0; c < copies; c++) {
    int base = static_cast<int>(c) * h.k();
    std::vector<int> tuple(h.k());
    for (int i = 0; i < h.k(); i++) tuple[i] = base + i;
    for (const Edge& e : h.graph().edges()) edges.push_back({base + e.first, base + e.second});
    inst.planted.push_back(std::move(tuple));
  }

  Rng rng(seed);
  int lo = static_cast<int>(copies) * h.k();
  int filler = target_m - static_cast<int>(copies) * h.edge_count();
  std::vector<Edge> extra;
  if (filler > 0) {
    if (pattern_is_clique(h))
      extra = take_random(cross_part_pairs(lo, n, h.k() - 1), filler, rng, "multipartite");
    else if (pattern_is_cycle(h) && h.k() % 2 == 1)
      extra = take_random(cross_part_pairs(lo, n, 2), filler, rng, "bipartite");
    else if (pattern_is_cycle(h)) {
      // A forest has no cycle of any length; wire each new block vertex to
      // an earlier one in shuffled order.
      std::vector<int> block;
      for (int v = lo; v < n; v++) block.push_back(v);
      shuffle_with(block, rng);
      if (filler > std::max(0, static_cast<int>(block.size()) - 1))
        throw ValidationError("filler capacity: the forest block holds " +
                              std::to_string(std::max(0, static_cast<int>(block.size()) - 1)) +
                              " edges, need " + std::to_string(filler));
      for (int i = 1; i <= filler; i++)
        extra.push_back({block[i], block[rng.below(static_cast<uint64_t>(i))]});
    } else {
      extra = sampled_copyfree_edges(n, lo, n, filler, h, rng);
    }
  }
  edges.insert(edges.end(), extra.begin(), extra.end());

  inst.graph = Graph(n, std::move(edges));
  inst.eps_certified = static_cast<double>(copies) * h.edge_count() / inst.graph.m();
  for (const std::vector<int>& tuple : inst.planted)
    if (!oracle::is_copy_at(inst.graph, h, tuple))
      throw ValidationError("internal: planted tuple failed the reference check");
  return inst;
}

PlantedInstance plant_clique_packing(int n, int copies, int s, uint64_t seed) {
  if (s < 3 || s > 8) throw ValidationError("clique size must be in [3,8]");
  if (copies < 1) throw ValidationError("need at least one copy");
  if (n < s) throw ValidationError("vertex budget: a K_" + std::to_string(s) + " needs " +
                                   std::to_string(s) + " vertices, graph has " +
                                   std::to_string(n));
  Rng rng(seed);
  std::set<Edge> used;
  PlantedInstance inst;
  inst.pattern = clique_pattern(s);
  for (int c = 0; c < copies; c++) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; attempt++) {
      std::set<int> pick;
      while (static_cast<int>(pick.size()) < s)
        pick.insert(static_cast<int>(rng.below(static_cast<uint64_t>(n))));
      std::vector<int> tuple(pick.begin(), pick.end());
      bool fresh = true;
      for (int i = 0; i < s && fresh; i++)
        for (int j = i + 1; j < s && fresh; j++)
          if (used.count({tuple[i], tuple[j]})) fresh = false;
      if (!fresh) continue;
      for (int i = 0; i < s; i++)
        for (int j = i + 1; j < s; j++) used.insert({tuple[i], tuple[j]});
      inst.planted.push_back(std::move(tuple));
      placed = true;
    }
    if (!placed)
      throw ValidationError("edge budget: only " + std::to_string(c) + " of " +
                            std::to_string(copies) +
                            " edge-disjoint cliques fit on this vertex count");
  }
  inst.graph = Graph(n, std::vector<Edge>(used.begin(), used.end()));
  inst.eps_certified = 1.0;
  for (const std::vector<int>& tuple : inst.planted)
    if (!oracle::is_copy_at(inst.graph, inst.pattern, tuple))
      throw ValidationError("internal: planted tuple failed the reference check");
  return inst;
}

Graph make_h_free(int n, int m, const Pattern& h, uint64_t seed) {
  if (h.k() < 2 || h.edge_count() < 1) throw ValidationError("pattern needs at least one edge");
  if (n < 1 || m < 0) throw ValidationError("graph size must be positive");

  Rng rng(seed);
  std::vector<Edge> edges;
  if (pattern_is_cycle(h) && h.k() % 2 == 1)
    edges = take_random(cross_part_pairs(0, n, 2), m, rng, "bipartite");
  else if (pattern_is_clique(h))
    edges = take_random(cross_part_pairs(0, n, h.k() - 1), m, rng, "multipartite");
  else
    edges = sampled_copyfree_edges(n, 0, n, m, h, rng);

  Graph g(n, std::move(edges));
  if (oracle::contains_copy(g, h))
    throw ValidationError("internal: construction produced a copy of the pattern");
  return g;
}

Graph gen_gnm(int n, int m, uint64_t seed) {
  if (n < 1 || m < 0) throw ValidationError("graph size must be positive");
  long long cap = static_cast<long long>(n) * (n - 1) / 2;
  if (m > cap)
    throw ValidationError("edge budget: " + std::to_string(m) + " edges exceed the " +
                          std::to_string(cap) + " distinct pairs on " + std::to_string(n) +
                          " vertices");
  Rng rng(seed);
  std::set<Edge> chosen;
  while (static_cast<int>(chosen.size()) < m) {
    int u = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    if (u == v) continue;
    chosen.insert({std::min(u, v), std::max(u, v)});
  }
  return Graph(n, std::vector<Edge>(chosen.begin(), chosen.end()));
}

DiGraph gen_random_dag(int n, int m, uint64_t seed) {
  if (n < 1 || m < 0) throw ValidationError("graph size must be positive");
  long long cap = static_cast<long long>(n) * (n - 1) / 2;
  if (m > cap)
    throw ValidationError("arc budget: " + std::to_string(m) + " arcs exceed the " +
                          std::to_string(cap) + " ordered pairs on " + std::to_string(n) +
                          " vertices");
  Rng rng(seed);
  std::vector<int> order(n);
  for (int v = 0; v < n; v++) order[v] = v;
  shuffle_with(order, rng);

  std::set<Edge> chosen;
  while (static_cast<int>(chosen.size()) < m) {
    int u = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    int v = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    if (u == v) continue;
    if (order[u] > order[v]) std::swap(u, v);
    chosen.insert({u, v});
  }
  return DiGraph(n, std::vector<Edge>(chosen.begin(), chosen.end()));
}

}  // namespace cpt
