#include "cpt/oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <bitset>
#include <cstdint>
#include <numeric>
#include <set>

#include "cpt/errors.hpp"

namespace cpt::oracle {

namespace {

// Visit order over pattern labels: label 0 first, then BFS, so every later
// label has an already-placed neighbor to anchor the search.
struct SearchPlan {
  std::vector<int> order;
  std::vector<int> anchor;          // anchor label per order position (-1 for roots)
  std::vector<char> anchor_is_out;  // directed: true if arc anchor->label
};

template <class Nbrs>
SearchPlan plan_from(int k, Nbrs undirected_nbrs) {
  SearchPlan p;
  std::vector<char> seen(k, 0);
  for (int s = 0; s < k; s++) {
    if (seen[s]) continue;
    seen[s] = 1;
    p.order.push_back(s);
    p.anchor.push_back(-1);
    size_t head = p.order.size() - 1;
    while (head < p.order.size()) {
      int l = p.order[head++];
      for (int w : undirected_nbrs(l))
        if (!seen[w]) {
          seen[w] = 1;
          p.order.push_back(w);
          p.anchor.push_back(l);
        }
    }
  }
  return p;
}

struct UndirectedSearch {
  const Graph& g;
  const Graph& h;
  SearchPlan plan;
  std::vector<int> map;
  std::vector<char> used;
  const std::function<bool(int, int)>* filter = nullptr;
  // returns true to stop the whole search
  std::function<bool(const std::vector<int>&)> emit;

  UndirectedSearch(const Graph& g_, const Pattern& h_)
      : g(g_), h(h_.graph()), map(h.n(), -1), used(g.n(), 0) {
    plan = plan_from(h.n(), [&](int l) { return h.neighbors(l); });
  }

  bool feasible(int label, int v) const {
    if (used[v]) return false;
    if (filter && !(*filter)(label, v)) return false;
    for (int l2 : h.neighbors(label))
      if (map[l2] >= 0 && !g.has_edge(v, map[l2])) return false;
    return true;
  }

  bool run(size_t depth) {
    if (depth == plan.order.size()) return emit(map);
    int label = plan.order[depth];
    if (map[label] >= 0) {  // preassigned
      int v = map[label];
      bool ok = !used[v] && (!filter || (*filter)(label, v));
      for (int l2 : h.neighbors(label))
        if (ok && map[l2] >= 0 && l2 != label && map[l2] != v)
          ok = ok && g.has_edge(v, map[l2]);
      if (!ok) return false;
      used[v] = 1;
      bool stop = run(depth + 1);
      used[v] = 0;
      return stop;
    }
    int a = plan.anchor[depth];
    if (a >= 0) {
      for (int v : g.neighbors(map[a])) {
        if (!feasible(label, v)) continue;
        map[label] = v;
        used[v] = 1;
        bool stop = run(depth + 1);
        used[v] = 0;
        map[label] = -1;
        if (stop) return true;
      }
    } else {
      for (int v = 0; v < g.n(); v++) {
        if (!feasible(label, v)) continue;
        map[label] = v;
        used[v] = 1;
        bool stop = run(depth + 1);
        used[v] = 0;
        map[label] = -1;
        if (stop) return true;
      }
    }
    return false;
  }
};

struct DirectedSearch {
  const DiGraph& g;
  const DiGraph& h;
  SearchPlan plan;
  std::vector<int> map;
  std::vector<char> used;
  std::function<bool(const std::vector<int>&)> emit;

  DirectedSearch(const DiGraph& g_, const DiPattern& h_)
      : g(g_), h(h_.digraph()), map(h.n(), -1), used(g.n(), 0) {
    plan = plan_from(h.n(), [&](int l) {
      std::vector<int> nb(h.out_neighbors(l).begin(), h.out_neighbors(l).end());
      nb.insert(nb.end(), h.in_neighbors(l).begin(), h.in_neighbors(l).end());
      return nb;
    });
  }

  bool feasible(int label, int v) const {
    if (used[v]) return false;
    for (int l2 : h.out_neighbors(label))
      if (map[l2] >= 0 && !g.has_arc(v, map[l2])) return false;
    for (int l2 : h.in_neighbors(label))
      if (map[l2] >= 0 && !g.has_arc(map[l2], v)) return false;
    return true;
  }

  bool run(size_t depth) {
    if (depth == plan.order.size()) return emit(map);
    int label = plan.order[depth];
    int a = plan.anchor[depth];
    auto try_v = [&](int v) {
      if (!feasible(label, v)) return false;
      map[label] = v;
      used[v] = 1;
      bool stop = run(depth + 1);
      used[v] = 0;
      map[label] = -1;
      return stop;
    };
    if (a >= 0) {
      // candidates adjacent to the anchor's image in either direction
      if (h.has_arc(a, label)) {
        for (int v : g.out_neighbors(map[a]))
          if (try_v(v)) return true;
      } else {
        for (int v : g.in_neighbors(map[a]))
          if (try_v(v)) return true;
      }
    } else {
      for (int v = 0; v < g.n(); v++)
        if (try_v(v)) return true;
    }
    return false;
  }
};

std::vector<Edge> copy_edges(const Graph&, const Graph& h, const std::vector<int>& map) {
  std::vector<Edge> es;
  es.reserve(h.m());
  for (auto [a, b] : h.edges()) {
    int u = map[a], v = map[b];
    if (u > v) std::swap(u, v);
    es.emplace_back(u, v);
  }
  std::sort(es.begin(), es.end());
  return es;
}

std::vector<Edge> copy_arcs(const DiGraph& h, const std::vector<int>& map) {
  std::vector<Edge> es;
  es.reserve(h.m());
  for (auto [a, b] : h.arcs()) es.emplace_back(map[a], map[b]);
  std::sort(es.begin(), es.end());
  return es;
}

Packing greedy_pack(std::vector<std::vector<Edge>> copies) {
  Packing p;
  std::set<Edge> taken;
  for (auto& c : copies) {
    bool free = std::none_of(c.begin(), c.end(), [&](const Edge& e) { return taken.count(e); });
    if (!free) continue;
    taken.insert(c.begin(), c.end());
    p.copies.push_back(std::move(c));
  }
  p.count = static_cast<long long>(p.copies.size());
  return p;
}

}  // namespace

bool is_copy_at(const Graph& g, const Pattern& h, std::span<const int> map) {
  if (static_cast<int>(map.size()) != h.k()) return false;
  for (size_t i = 0; i < map.size(); i++) {
    if (map[i] < 0 || map[i] >= g.n()) return false;
    for (size_t j = i + 1; j < map.size(); j++)
      if (map[i] == map[j]) return false;
  }
  for (auto [a, b] : h.graph().edges())
    if (!g.has_edge(map[a], map[b])) return false;
  return true;
}

bool is_copy_at(const DiGraph& g, const DiPattern& h, std::span<const int> map) {
  if (static_cast<int>(map.size()) != h.k()) return false;
  for (size_t i = 0; i < map.size(); i++) {
    if (map[i] < 0 || map[i] >= g.n()) return false;
    for (size_t j = i + 1; j < map.size(); j++)
      if (map[i] == map[j]) return false;
  }
  for (auto [a, b] : h.digraph().arcs())
    if (!g.has_arc(map[a], map[b])) return false;
  return true;
}

std::optional<std::vector<int>> find_copy(const Graph& g, const Pattern& h) {
  UndirectedSearch s(g, h);
  std::optional<std::vector<int>> found;
  s.emit = [&](const std::vector<int>& map) {
    found = map;
    return true;
  };
  s.run(0);
  return found;
}

std::optional<std::vector<int>> find_copy_with(
    const Graph& g, const Pattern& h, const std::vector<int>& preassigned,
    const std::function<bool(int, int)>& ok) {
  UndirectedSearch s(g, h);
  if (!preassigned.empty()) {
    if (static_cast<int>(preassigned.size()) != h.k())
      throw ValidationError("preassignment size must equal pattern size");
    s.map = preassigned;
  }
  if (ok) s.filter = &ok;
  std::optional<std::vector<int>> found;
  s.emit = [&](const std::vector<int>& map) {
    found = map;
    return true;
  };
  s.run(0);
  return found;
}

std::optional<std::vector<int>> find_copy(const DiGraph& g, const DiPattern& h) {
  DirectedSearch s(g, h);
  std::optional<std::vector<int>> found;
  s.emit = [&](const std::vector<int>& map) {
    found = map;
    return true;
  };
  s.run(0);
  return found;
}

bool contains_copy(const Graph& g, const Pattern& h) { return find_copy(g, h).has_value(); }
bool contains_copy(const DiGraph& g, const DiPattern& h) { return find_copy(g, h).has_value(); }

std::vector<std::vector<Edge>> enumerate_copies(const Graph& g, const Pattern& h) {
  std::set<std::vector<Edge>> out;
  UndirectedSearch s(g, h);
  s.emit = [&](const std::vector<int>& map) {
    out.insert(copy_edges(g, h.graph(), map));
    return false;
  };
  s.run(0);
  return {out.begin(), out.end()};
}

std::vector<std::vector<Edge>> enumerate_copies(const DiGraph& g, const DiPattern& h) {
  std::set<std::vector<Edge>> out;
  DirectedSearch s(g, h);
  s.emit = [&](const std::vector<int>& map) {
    out.insert(copy_arcs(h.digraph(), map));
    return false;
  };
  s.run(0);
  return {out.begin(), out.end()};
}

long long count_copies(const Graph& g, const Pattern& h) {
  if (g.n() > 20) throw ResourceError("count_copies supports at most 20 vertices");
  return static_cast<long long>(enumerate_copies(g, h).size());
}

long long count_copies(const DiGraph& g, const DiPattern& h) {
  if (g.n() > 20) throw ResourceError("count_copies supports at most 20 vertices");
  return static_cast<long long>(enumerate_copies(g, h).size());
}

Packing packing_lb(const Graph& g, const Pattern& h) { return greedy_pack(enumerate_copies(g, h)); }
Packing packing_lb(const DiGraph& g, const DiPattern& h) {
  return greedy_pack(enumerate_copies(g, h));
}

namespace {

constexpr int kMaxDelEdges = 96;
using EdgeMask = std::bitset<kMaxDelEdges>;

struct DeletionSolver {
  std::vector<EdgeMask> copies;
  int best;

  // Lower bound: greedy edge-disjoint packing of copies not yet hit.
  int pack_bound(const EdgeMask& deleted) const {
    EdgeMask used;
    int cnt = 0;
    for (const auto& c : copies) {
      if ((c & deleted).any()) continue;
      if ((c & used).any()) continue;
      used |= c;
      cnt++;
    }
    return cnt;
  }

  void solve(const EdgeMask& deleted, int chosen) {
    if (chosen >= best) return;
    const EdgeMask* open = nullptr;
    for (const auto& c : copies)
      if (!(c & deleted).any()) {
        open = &c;
        break;
      }
    if (!open) {
      best = chosen;
      return;
    }
    if (chosen + pack_bound(deleted) >= best) return;
    for (int e = 0; e < kMaxDelEdges; e++) {
      if (!open->test(e)) continue;
      EdgeMask d2 = deleted;
      d2.set(e);
      solve(d2, chosen + 1);
    }
  }
};

}  // namespace

int min_deletion_to_h_free(const Graph& g, const Pattern& h) {
  if (g.n() > 14) throw ResourceError("min_deletion_to_h_free supports at most 14 vertices");
  auto copies = enumerate_copies(g, h);
  if (copies.empty()) return 0;
  std::vector<Edge> edge_ids(g.edges());
  auto eid = [&](const Edge& e) {
    return static_cast<int>(
        std::lower_bound(edge_ids.begin(), edge_ids.end(), e) - edge_ids.begin());
  };
  DeletionSolver solver;
  solver.copies.reserve(copies.size());
  for (const auto& c : copies) {
    EdgeMask m;
    for (const auto& e : c) m.set(eid(e));
    solver.copies.push_back(m);
  }
  solver.best = g.m();  // deleting everything always works
  solver.solve(EdgeMask{}, 0);
  return solver.best;
}

namespace {

int pair_index(int i, int j, int k) {
  if (i > j) std::swap(i, j);
  // index of pair (i,j), i<j, in lexicographic order
  int idx = 0;
  for (int a = 0; a < i; a++) idx += k - a - 1;
  return idx + (j - i - 1);
}

bool mask_connected(uint32_t mask, int k) {
  std::array<uint32_t, 8> adj{};
  for (int i = 0; i < k; i++)
    for (int j = i + 1; j < k; j++)
      if (mask >> pair_index(i, j, k) & 1) {
        adj[i] |= 1u << j;
        adj[j] |= 1u << i;
      }
  uint32_t seen = 1, frontier = 1;
  while (frontier) {
    uint32_t next = 0;
    for (int v = 0; v < k; v++)
      if (frontier >> v & 1) next |= adj[v];
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (1u << k) - 1;
}

}  // namespace

std::vector<Pattern> enumerate_connected(int k) {
  if (k < 2 || k > 6) throw ResourceError("enumerate_connected supports 2..6 vertices");
  int pairs = k * (k - 1) / 2;
  // Per-permutation pair-index relabeling tables.
  std::vector<std::vector<int>> pair_maps;
  std::vector<int> p(k);
  std::iota(p.begin(), p.end(), 0);
  do {
    std::vector<int> pm(pairs);
    for (int i = 0; i < k; i++)
      for (int j = i + 1; j < k; j++) pm[pair_index(i, j, k)] = pair_index(p[i], p[j], k);
    pair_maps.push_back(std::move(pm));
  } while (std::next_permutation(p.begin(), p.end()));

  std::set<uint32_t> canon;
  for (uint32_t mask = 0; mask < (1u << pairs); mask++) {
    if (!mask_connected(mask, k)) continue;
    uint32_t least = mask;
    for (const auto& pm : pair_maps) {
      uint32_t out = 0;
      for (int e = 0; e < pairs; e++)
        if (mask >> e & 1) out |= 1u << pm[e];
      least = std::min(least, out);
    }
    canon.insert(least);
  }
  std::vector<uint32_t> sorted(canon.begin(), canon.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](uint32_t a, uint32_t b) {
    int ca = std::popcount(a), cb = std::popcount(b);
    return ca != cb ? ca < cb : a < b;
  });
  std::vector<Pattern> out;
  out.reserve(sorted.size());
  for (uint32_t mask : sorted) {
    std::vector<Edge> es;
    for (int i = 0; i < k; i++)
      for (int j = i + 1; j < k; j++)
        if (mask >> pair_index(i, j, k) & 1) es.emplace_back(i, j);
    out.emplace_back(k, std::move(es));
  }
  return out;
}

namespace {

bool iso_extend(const Graph& a, const Graph& b, std::vector<int>& map, std::vector<char>& used,
                int v) {
  if (v == a.n()) return true;
  for (int w = 0; w < b.n(); w++) {
    if (used[w] || a.degree(v) != b.degree(w)) continue;
    bool ok = true;
    for (int u = 0; u < v && ok; u++)
      if (a.has_edge(u, v) != b.has_edge(map[u], w)) ok = false;
    if (!ok) continue;
    map[v] = w;
    used[w] = 1;
    if (iso_extend(a, b, map, used, v + 1)) return true;
    used[w] = 0;
  }
  return false;
}

}  // namespace

bool are_isomorphic(const Graph& a, const Graph& b) {
  if (a.n() > 10 || b.n() > 10) throw ResourceError("are_isomorphic supports at most 10 vertices");
  if (a.n() != b.n() || a.m() != b.m()) return false;
  std::vector<int> da, db;
  for (int v = 0; v < a.n(); v++) da.push_back(a.degree(v));
  for (int v = 0; v < b.n(); v++) db.push_back(b.degree(v));
  std::sort(da.begin(), da.end());
  std::sort(db.begin(), db.end());
  if (da != db) return false;
  std::vector<int> map(a.n(), -1);
  std::vector<char> used(b.n(), 0);
  return iso_extend(a, b, map, used, 0);
}

}  // namespace cpt::oracle
