#include "cpt/graph.hpp"

#include <algorithm>
#include <sstream>

#include "cpt/errors.hpp"

namespace cpt {

namespace {

void check_vertex(int v, int n, const std::string& role) {
  if (v < 0 || v >= n)
    throw ValidationError(role + " vertex " + std::to_string(v) + " out of range [0," +
                          std::to_string(n) + ")");
}

std::vector<int> build_csr(int n, const std::vector<Edge>& pairs, std::vector<int>& flat,
                           bool from_first) {
  std::vector<int> off(n + 1, 0);
  for (const auto& [a, b] : pairs) off[(from_first ? a : b) + 1]++;
  for (int v = 0; v < n; v++) off[v + 1] += off[v];
  flat.assign(pairs.size(), 0);
  std::vector<int> cursor(off.begin(), off.end() - 1);
  for (const auto& [a, b] : pairs) {
    if (from_first)
      flat[cursor[a]++] = b;
    else
      flat[cursor[b]++] = a;
  }
  for (int v = 0; v < n; v++)
    std::sort(flat.begin() + off[v], flat.begin() + off[v + 1]);
  return off;
}

}  // namespace

Graph::Graph(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 0) throw ValidationError("negative vertex count");
  for (auto& [u, v] : edges) {
    check_vertex(u, n, "edge");
    check_vertex(v, n, "edge");
    if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw ValidationError("duplicate edge");
  edges_ = std::move(edges);

  std::vector<Edge> both;
  both.reserve(edges_.size() * 2);
  for (const auto& [u, v] : edges_) {
    both.emplace_back(u, v);
    both.emplace_back(v, u);
  }
  adj_off_ = build_csr(n_, both, adj_, true);
}

bool Graph::has_edge(int u, int v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

int Graph::max_degree() const {
  int d = 0;
  for (int v = 0; v < n_; v++) d = std::max(d, degree(v));
  return d;
}

DiGraph::DiGraph(int n, std::vector<Edge> arcs) : n_(n) {
  if (n < 0) throw ValidationError("negative vertex count");
  for (const auto& [u, v] : arcs) {
    check_vertex(u, n, "arc");
    check_vertex(v, n, "arc");
    if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u));
  }
  std::sort(arcs.begin(), arcs.end());
  if (std::adjacent_find(arcs.begin(), arcs.end()) != arcs.end())
    throw ValidationError("duplicate arc");
  arcs_ = std::move(arcs);
  out_off_ = build_csr(n_, arcs_, out_, true);
  in_off_ = build_csr(n_, arcs_, in_, false);
}

bool DiGraph::has_arc(int u, int v) const {
  auto nb = out_neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

namespace {

bool connected_under(int k, const std::vector<Edge>& pairs, bool directed) {
  if (k <= 0) return false;
  std::vector<std::vector<int>> adj(k);
  for (const auto& [u, v] : pairs) {
    adj[u].push_back(v);
    adj[v].push_back(u);  // weak connectivity for directed
  }
  (void)directed;
  std::vector<char> seen(k, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        cnt++;
        stack.push_back(w);
      }
  }
  return cnt == k;
}

}  // namespace

Pattern::Pattern(int k, std::vector<Edge> edges) {
  if (k < 2 || k > 8)
    throw ValidationError("pattern must have between 2 and 8 vertices, got " + std::to_string(k));
  if (!connected_under(k, edges, false)) throw ValidationError("pattern must be connected");
  g_ = Graph(k, std::move(edges));
}

DiPattern::DiPattern(int k, std::vector<Edge> arcs) {
  if (k < 2 || k > 8)
    throw ValidationError("pattern must have between 2 and 8 vertices, got " + std::to_string(k));
  if (!connected_under(k, arcs, true))
    throw ValidationError("pattern must be weakly connected");
  g_ = DiGraph(k, std::move(arcs));
}

namespace {

struct Header {
  int n = 0;
  long long m = 0;
  bool directed = false;
};

Header parse_header(std::istringstream& in, int& lineno) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  lineno = 1;
  std::istringstream h(line);
  Header hd;
  if (!(h >> hd.n >> hd.m)) throw ParseError(1, "header must be 'n m' or 'n m directed'");
  std::string tag;
  if (h >> tag) {
    if (tag == "directed")
      hd.directed = true;
    else
      throw ParseError(1, "unrecognized header tag '" + tag + "'");
    if (h >> tag) throw ParseError(1, "trailing tokens in header");
  }
  if (hd.n < 0 || hd.m < 0) throw ParseError(1, "negative counts in header");
  return hd;
}

std::vector<Edge> parse_pairs(std::istringstream& in, long long m, int& lineno) {
  std::vector<Edge> pairs;
  pairs.reserve(m);
  std::string line;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u >> v)) throw ParseError(lineno, "expected 'u v'");
    std::string extra;
    if (ls >> extra) throw ParseError(lineno, "trailing tokens");
    pairs.emplace_back(u, v);
  }
  if (static_cast<long long>(pairs.size()) != m)
    throw ParseError(lineno, "header declares " + std::to_string(m) + " edges, found " +
                                  std::to_string(pairs.size()));
  return pairs;
}

}  // namespace

bool edge_list_is_directed(const std::string& text) {
  std::istringstream in(text);
  int lineno;
  return parse_header(in, lineno).directed;
}

Graph parse_graph(const std::string& text) {
  std::istringstream in(text);
  int lineno;
  Header hd = parse_header(in, lineno);
  if (hd.directed) throw ParseError(1, "expected an undirected edge list");
  auto pairs = parse_pairs(in, hd.m, lineno);
  try {
    return Graph(hd.n, std::move(pairs));
  } catch (const ValidationError& e) {
    throw ParseError(lineno, e.what());
  }
}

DiGraph parse_digraph(const std::string& text) {
  std::istringstream in(text);
  int lineno;
  Header hd = parse_header(in, lineno);
  if (!hd.directed) throw ParseError(1, "expected a directed edge list");
  auto pairs = parse_pairs(in, hd.m, lineno);
  try {
    return DiGraph(hd.n, std::move(pairs));
  } catch (const ValidationError& e) {
    throw ParseError(lineno, e.what());
  }
}

std::string write_graph(const Graph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.m() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

std::string write_digraph(const DiGraph& g) {
  std::ostringstream out;
  out << g.n() << ' ' << g.m() << " directed\n";
  for (const auto& [u, v] : g.arcs()) out << u << ' ' << v << '\n';
  return out.str();
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<int> comp(g.n(), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < g.n(); s++) {
    if (comp[s] >= 0) continue;
    int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack{s};
    comp[s] = id;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      out[id].push_back(v);
      for (int w : g.neighbors(v))
        if (comp[w] < 0) {
          comp[w] = id;
          stack.push_back(w);
        }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

Pattern cycle_pattern(int k) {
  if (k < 3 || k > 8) throw ValidationError("cycle length must be in [3,8]");
  std::vector<Edge> e;
  for (int i = 0; i < k; i++) e.emplace_back(i, (i + 1) % k);
  return Pattern(k, std::move(e));
}

Pattern clique_pattern(int s) {
  if (s < 2 || s > 8) throw ValidationError("clique size must be in [2,8]");
  std::vector<Edge> e;
  for (int i = 0; i < s; i++)
    for (int j = i + 1; j < s; j++) e.emplace_back(i, j);
  return Pattern(s, std::move(e));
}

DiPattern directed_cycle_pattern(int k) {
  if (k < 2 || k > 8) throw ValidationError("directed cycle length must be in [2,8]");
  std::vector<Edge> a;
  for (int i = 0; i < k; i++) a.emplace_back(i, (i + 1) % k);
  return DiPattern(k, std::move(a));
}

DiPattern diamond_pattern() {
  return DiPattern(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

Pattern pattern_by_name(const std::string& name) {
  if (name.size() >= 2) {
    char kind = name[0];
    int num = 0;
    bool numeric = true;
    for (size_t i = 1; i < name.size(); i++) {
      if (name[i] < '0' || name[i] > '9') {
        numeric = false;
        break;
      }
      num = num * 10 + (name[i] - '0');
    }
    if (numeric) {
      switch (kind) {
        case 'C':
          return cycle_pattern(num);
        case 'K':
          return clique_pattern(num);
        case 'P': {
          if (num < 2 || num > 8) throw ValidationError("path length out of range");
          std::vector<Edge> e;
          for (int i = 0; i + 1 < num; i++) e.emplace_back(i, i + 1);
          return Pattern(num, std::move(e));
        }
        case 'S': {  // star with `num` leaves
          if (num < 1 || num > 7) throw ValidationError("star size out of range");
          std::vector<Edge> e;
          for (int i = 1; i <= num; i++) e.emplace_back(0, i);
          return Pattern(num + 1, std::move(e));
        }
        default:
          break;
      }
    }
  }
  throw ValidationError("unknown pattern name '" + name + "'");
}

int ceil_log2(int n) {
  int b = 1;
  while ((1LL << b) < n) b++;
  return b;
}

}  // namespace cpt
