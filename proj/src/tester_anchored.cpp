#include "cpt/tester_anchored.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"

namespace cpt {

namespace {

std::string edge_str(int a, int b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

// Walks the recipe stage by stage, collecting the edge set and throwing a
// stage-tagged ValidationError on the first malformed item.
std::vector<Edge> recipe_edges(const Recipe& r, int* label_count_out) {
  // Where each fresh label (>= 2) was introduced.
  std::map<int, std::string> intro;

  for (size_t i = 0; i < r.cycles.size(); i++) {
    const CycleSpec& c = r.cycles[i];
    const std::string where = "cycle #" + std::to_string(i);
    if (c.labels.size() < 3)
      throw ValidationError("cycle stage: " + where + " has fewer than 3 labels");
    int zeros = 0, ones = 0;
    std::set<int> seen;
    for (int l : c.labels) {
      if (l < 0) throw ValidationError("cycle stage: negative label in " + where);
      if (!seen.insert(l).second)
        throw ValidationError("cycle stage: label " + std::to_string(l) +
                              " repeats inside " + where);
      if (l == 0) zeros++;
      else if (l == 1) ones++;
      else if (!intro.emplace(l, where).second)
        throw ValidationError("cycle stage: label " + std::to_string(l) + " of " + where +
                              " already used by " + intro.at(l));
    }
    if (zeros + ones == 0)
      throw ValidationError("cycle stage: " + where + " avoids both anchor labels");
    int expect_owner = zeros > 0 ? 0 : 1;
    if (c.owner != expect_owner)
      throw ValidationError("cycle stage: owner of " + where + " must be " +
                            std::to_string(expect_owner));
  }

  std::set<int> tree_roots;
  for (const TreeSpec& t : r.trees) {
    const std::string where = "tree rooted at " + std::to_string(t.root);
    bool root_ok = t.root == 0 || t.root == 1 ||
                   (intro.count(t.root) && intro.at(t.root).rfind("cycle", 0) == 0);
    if (!root_ok)
      throw ValidationError("tree stage: root " + std::to_string(t.root) +
                            " was not introduced by the anchor or a cycle");
    if (!tree_roots.insert(t.root).second)
      throw ValidationError("tree stage: two trees share root " + std::to_string(t.root));
    if (t.nodes.empty())
      throw ValidationError("tree stage: " + where + " adds no nodes");
    if (t.parents.size() != t.nodes.size())
      throw ValidationError("tree stage: " + where + " needs one parent per node");
    std::set<int> mine;
    for (size_t i = 0; i < t.nodes.size(); i++) {
      int l = t.nodes[i];
      if (l < 2) throw ValidationError("tree stage: " + where + " reuses anchor label " +
                                       std::to_string(l));
      if (!intro.emplace(l, where).second)
        throw ValidationError("tree stage: label " + std::to_string(l) + " of " + where +
                              " already used by " + intro.at(l));
      int p = t.parents[i];
      if (p != t.root && !mine.count(p))
        throw ValidationError("tree stage: parent " + std::to_string(p) + " of label " +
                              std::to_string(l) + " does not precede it in " + where);
      mine.insert(l);
    }
  }

  int k = 2 + static_cast<int>(intro.size());
  for (const auto& [l, where] : intro)
    if (l >= k)
      throw ValidationError("labels are not contiguous: " + std::to_string(l) + " from " +
                            where + " but only " + std::to_string(k) + " labels in use");
  if (k > 8)
    throw ValidationError("recipe uses " + std::to_string(k) +
                          " labels; at most 8 supported");

  std::set<Edge> edges;
  auto canon = [](int a, int b) { return Edge{std::min(a, b), std::max(a, b)}; };
  edges.insert({0, 1});

  for (const CycleSpec& c : r.cycles) {
    int len = static_cast<int>(c.labels.size());
    for (int i = 0; i < len; i++) {
      Edge e = canon(c.labels[i], c.labels[(i + 1) % len]);
      if (e == Edge{0, 1}) continue;  // a cycle through both anchors may ride the anchor edge
      if (!edges.insert(e).second)
        throw ValidationError("cycle stage: edge " + edge_str(e.first, e.second) +
                              " built twice");
    }
  }
  for (const TreeSpec& t : r.trees)
    for (size_t i = 0; i < t.nodes.size(); i++) {
      Edge e = canon(t.parents[i], t.nodes[i]);
      if (!edges.insert(e).second)
        throw ValidationError("tree stage: edge " + edge_str(e.first, e.second) +
                              " built twice");
    }
  for (int b = 0; b < 2; b++) {
    const std::vector<int>& ex = b == 0 ? r.extra0 : r.extra1;
    std::set<int> seen;
    for (int l : ex) {
      if (l < 2 || l >= k)
        throw ValidationError("extra-edge stage: label " + std::to_string(l) +
                              " is not a stage-2/3 label");
      if (!seen.insert(l).second)
        throw ValidationError("extra-edge stage: label " + std::to_string(l) +
                              " listed twice for anchor " + std::to_string(b));
      Edge e = canon(b, l);
      if (!edges.insert(e).second)
        throw ValidationError("extra-edge stage: edge " + edge_str(b, l) +
                              " already present");
    }
  }

  if (label_count_out) *label_count_out = k;
  return std::vector<Edge>(edges.begin(), edges.end());
}

// True when h minus vertices u and v contains no cycle (union-find scan).
bool acyclic_without(const Pattern& h, int u, int v) {
  int n = h.k();
  std::vector<int> dsu(n);
  for (int i = 0; i < n; i++) dsu[i] = i;
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  for (const Edge& e : h.graph().edges()) {
    if (e.first == u || e.first == v || e.second == u || e.second == v) continue;
    int a = find(e.first), b = find(e.second);
    if (a == b) return false;
    dsu[a] = b;
  }
  return true;
}

}  // namespace

int Recipe::label_count() const {
  std::set<int> fresh;
  for (const CycleSpec& c : cycles)
    for (int l : c.labels)
      if (l >= 2) fresh.insert(l);
  for (const TreeSpec& t : trees)
    for (int l : t.nodes)
      if (l >= 2) fresh.insert(l);
  return 2 + static_cast<int>(fresh.size());
}

void Recipe::validate() const { recipe_edges(*this, nullptr); }

nlohmann::json Recipe::to_json() const {
  nlohmann::json j;
  j["anchor"] = {0, 1};
  j["cycles"] = nlohmann::json::array();
  for (const CycleSpec& c : cycles)
    j["cycles"].push_back({{"labels", c.labels}, {"owner", c.owner}});
  j["trees"] = nlohmann::json::array();
  for (const TreeSpec& t : trees)
    j["trees"].push_back({{"root", t.root}, {"nodes", t.nodes}, {"parents", t.parents}});
  j["e0"] = extra0;
  j["e1"] = extra1;
  return j;
}

Recipe Recipe::from_json(const nlohmann::json& j) {
  Recipe r;
  if (j.contains("anchor")) {
    std::vector<int> a = j.at("anchor").get<std::vector<int>>();
    if (a != std::vector<int>{0, 1})
      throw ValidationError("recipe anchor must be [0,1]");
  }
  if (j.contains("cycles"))
    for (const auto& c : j.at("cycles")) {
      CycleSpec cs;
      cs.labels = c.at("labels").get<std::vector<int>>();
      cs.owner = c.value("owner", 0);
      r.cycles.push_back(std::move(cs));
    }
  if (j.contains("trees"))
    for (const auto& t : j.at("trees")) {
      TreeSpec ts;
      ts.root = t.at("root").get<int>();
      ts.nodes = t.at("nodes").get<std::vector<int>>();
      ts.parents = t.at("parents").get<std::vector<int>>();
      r.trees.push_back(std::move(ts));
    }
  if (j.contains("e0")) r.extra0 = j.at("e0").get<std::vector<int>>();
  if (j.contains("e1")) r.extra1 = j.at("e1").get<std::vector<int>>();
  r.validate();
  return r;
}

Pattern recompose(const Recipe& r) {
  int k = 0;
  std::vector<Edge> edges = recipe_edges(r, &k);
  return Pattern(k, edges);
}

std::optional<Edge> find_anchor_edge(const Pattern& h) {
  for (const Edge& e : h.graph().edges())
    if (acyclic_without(h, e.first, e.second)) return e;
  return std::nullopt;
}

Recipe decompose_anchored(const Pattern& h, Edge anchor) {
  if (!h.graph().has_edge(anchor.first, anchor.second))
    throw ValidationError("anchor " + edge_str(anchor.first, anchor.second) +
                          " is not an edge of the pattern");
  if (!acyclic_without(h, anchor.first, anchor.second))
    throw ValidationError("anchor endpoints do not touch every cycle");

  int k = h.k();
  // Relabel: anchor endpoints become 0 and 1, the rest keep relative order.
  std::vector<int> relab(k, -1);
  relab[anchor.first] = 0;
  relab[anchor.second] = 1;
  int next = 2;
  for (int v = 0; v < k; v++)
    if (relab[v] < 0) relab[v] = next++;

  std::vector<std::set<int>> adj(k);
  for (const Edge& e : h.graph().edges()) {
    int a = relab[e.first], b = relab[e.second];
    adj[a].insert(b);
    adj[b].insert(a);
  }

  // Pendant stripping: peel non-anchor degree-1 vertices; each strip records
  // the vertex's attachment point, seeding the stage-3 trees.
  std::vector<char> present(k, 1);
  std::vector<int> parent(k, -1);
  for (;;) {
    int victim = -1;
    for (int v = 2; v < k; v++)
      if (present[v] && adj[v].size() == 1) {
        victim = v;
        break;
      }
    if (victim < 0) break;
    int p = *adj[victim].begin();
    parent[victim] = p;
    adj[p].erase(victim);
    adj[victim].clear();
    present[victim] = 0;
  }

  Recipe r;
  std::vector<char> claimed(k, 0);  // vertices routed into a cycle path

  // Each surviving non-anchor component becomes one cycle (two attachment
  // edges close a path through the component); everything else hanging off
  // the path becomes branch trees, and leftover attachments extra edges.
  std::vector<char> visited(k, 0);
  for (int start = 2; start < k; start++) {
    if (!present[start] || visited[start]) continue;
    std::vector<int> comp;
    std::vector<int> stack{start};
    visited[start] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (int w : adj[v])
        if (w >= 2 && !visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());

    std::vector<std::pair<int, int>> att;  // (anchor b, component vertex y)
    for (int b = 0; b < 2; b++)
      for (int y : comp)
        if (adj[y].count(b)) att.push_back({b, y});
    std::sort(att.begin(), att.end());
    if (att.size() < 2)
      throw ValidationError("internal: stripped component kept fewer than 2 anchor edges");
    auto [b1, y1] = att[0];
    auto [b2, y2] = att[1];

    // Path from y1 to y2 inside the component.
    std::vector<int> prev(k, -1);
    std::vector<int> queue{y1};
    prev[y1] = y1;
    for (size_t qi = 0; qi < queue.size(); qi++) {
      int v = queue[qi];
      for (int w : adj[v])
        if (w >= 2 && prev[w] < 0) {
          prev[w] = v;
          queue.push_back(w);
        }
    }
    std::vector<int> path;
    for (int v = y2;; v = prev[v]) {
      path.push_back(v);
      if (v == y1) break;
    }
    std::reverse(path.begin(), path.end());

    CycleSpec c;
    if (b1 == b2) {
      c.labels.push_back(b1);
      c.labels.insert(c.labels.end(), path.begin(), path.end());
    } else {
      c.labels.push_back(0);
      c.labels.insert(c.labels.end(), path.begin(), path.end());
      c.labels.push_back(1);
    }
    c.owner = std::count(c.labels.begin(), c.labels.end(), 0) ? 0 : 1;
    r.cycles.push_back(c);

    for (int v : path) claimed[v] = 1;

    // Branches: everything in the component off the path hangs as trees.
    std::vector<int> bfs(path);
    for (size_t qi = 0; qi < bfs.size(); qi++) {
      int v = bfs[qi];
      for (int w : adj[v])
        if (w >= 2 && !claimed[w] && parent[w] < 0) {
          parent[w] = v;
          claimed[w] = 1;  // claimed by a branch, not by the path itself
          bfs.push_back(w);
        }
    }

    for (size_t i = 2; i < att.size(); i++) {
      auto [b, y] = att[i];
      (b == 0 ? r.extra0 : r.extra1).push_back(y);
    }
  }

  // Group parented vertices into trees keyed by the stage-1/2 vertex their
  // parent chain reaches.
  std::vector<std::vector<int>> kids(k);
  for (int v = 2; v < k; v++)
    if (parent[v] >= 0) kids[parent[v]].push_back(v);
  for (auto& c : kids) std::sort(c.begin(), c.end());
  for (int root = 0; root < k; root++) {
    if (parent[root] >= 0 || kids[root].empty()) continue;
    TreeSpec t;
    t.root = root;
    std::vector<int> bfs{root};
    for (size_t qi = 0; qi < bfs.size(); qi++)
      for (int w : kids[bfs[qi]]) {
        t.nodes.push_back(w);
        t.parents.push_back(bfs[qi]);
        bfs.push_back(w);
      }
    r.trees.push_back(std::move(t));
  }

  std::sort(r.extra0.begin(), r.extra0.end());
  std::sort(r.extra1.begin(), r.extra1.end());
  r.validate();
  return r;
}

AnchoredMember make_anchored_member(const Pattern& h) {
  std::optional<Edge> a = find_anchor_edge(h);
  if (!a) throw ValidationError("pattern has no edge whose endpoints touch every cycle");
  return AnchoredMember{h, *a, decompose_anchored(h, *a)};
}

long long anchored_attempt_budget(int k, double eps) {
  if (k < 2 || k > 8) throw ValidationError("pattern size must be in [2,8]");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  double budget = std::ceil(20.0 * std::pow(static_cast<double>(k), k) / eps);
  if (!(budget < 9.0e18)) throw ValidationError("attempt budget overflows");
  return static_cast<long long>(budget);
}

namespace {

// Precomputed per-attempt timetable shared by every node program.
struct Schedule {
  int k = 0;
  int color_bits = 0;
  int id_bits = 0;
  int wgt_bits = 0;
  uint64_t weight_range = 0;

  struct TreeWindow {
    int first = 0, last = 0;
    int root = 0;
    std::vector<int> local_of;         // label -> local index (root = 0), or -1
    std::vector<uint32_t> child_mask;  // per local index
  };
  struct CycleWindow {
    int first = 0, last = 0;
    int len = 0;
    std::vector<int> role_of;  // label -> chase position (owner = 0), or -1
  };
  std::vector<TreeWindow> trees;
  std::vector<CycleWindow> cycles;
  std::vector<char> in_extra0, in_extra1;  // per label
  int final_round = 0;
  int total_rounds = 0;

  // kind: 0 color exchange, 1 flood, 2 tree window, 3 cycle window, 4 final.
  struct Phase {
    int kind = 0;
    int idx = 0;
    int wround = 0;
    int wlast = 0;  // last local round of this window
  };
  std::vector<Phase> phase;  // per engine round

  bool flood_only = false;
  const std::vector<int>* fixed_colors = nullptr;
  const std::vector<std::vector<uint64_t>>* fixed_weights = nullptr;
};

Schedule build_schedule(const Graph& g, const Recipe& r, bool flood_only) {
  Schedule s;
  recipe_edges(r, &s.k);
  s.color_bits = ceil_log2(std::max(s.k, 2));
  s.id_bits = ceil_log2(g.n());
  s.wgt_bits = 4 * s.id_bits;
  uint64_t n = static_cast<uint64_t>(std::max(g.n(), 1));
  s.weight_range = n * n * n * n;
  s.in_extra0.assign(s.k, 0);
  s.in_extra1.assign(s.k, 0);
  for (int l : r.extra0) s.in_extra0[l] = 1;
  for (int l : r.extra1) s.in_extra1[l] = 1;

  s.phase.push_back({0, 0, 0, 0});                               // colors
  for (int i = 0; i < s.k; i++) s.phase.push_back({1, 0, i, s.k - 1});  // flood

  if (!flood_only) {
    std::vector<const TreeSpec*> trees;
    for (const TreeSpec& t : r.trees) trees.push_back(&t);
    std::sort(trees.begin(), trees.end(),
              [](const TreeSpec* a, const TreeSpec* b) { return a->root < b->root; });
    for (const TreeSpec* t : trees) {
      Schedule::TreeWindow w;
      w.root = t->root;
      w.local_of.assign(s.k, -1);
      w.local_of[t->root] = 0;
      for (size_t i = 0; i < t->nodes.size(); i++)
        w.local_of[t->nodes[i]] = static_cast<int>(i) + 1;
      int cnt = static_cast<int>(t->nodes.size()) + 1;
      w.child_mask.assign(cnt, 0);
      std::vector<int> depth(cnt, 0);
      int max_depth = 1;
      for (size_t i = 0; i < t->nodes.size(); i++) {
        int child = static_cast<int>(i) + 1;
        int par = w.local_of[t->parents[i]];
        w.child_mask[par] |= 1u << child;
        depth[child] = depth[par] + 1;
        max_depth = std::max(max_depth, depth[child]);
      }
      w.first = static_cast<int>(s.phase.size());
      w.last = w.first + max_depth - 1;
      int widx = static_cast<int>(s.trees.size());
      for (int i = 0; i < max_depth; i++) s.phase.push_back({2, widx, i, max_depth - 1});
      s.trees.push_back(std::move(w));
    }

    for (size_t ci = 0; ci < r.cycles.size(); ci++) {
      const CycleSpec& c = r.cycles[ci];
      Schedule::CycleWindow w;
      w.len = static_cast<int>(c.labels.size());
      w.role_of.assign(s.k, -1);
      int owner_pos = 0;
      for (int i = 0; i < w.len; i++)
        if (c.labels[i] == c.owner) owner_pos = i;
      for (int i = 0; i < w.len; i++)
        w.role_of[c.labels[(owner_pos + i) % w.len]] = i;
      w.first = static_cast<int>(s.phase.size());
      w.last = w.first + w.len - 1;
      int widx = static_cast<int>(s.cycles.size());
      for (int i = 0; i < w.len; i++) s.phase.push_back({3, widx, i, w.len - 1});
      s.cycles.push_back(std::move(w));
    }

    s.final_round = static_cast<int>(s.phase.size());
    s.phase.push_back({4, 0, 0, 0});
  }
  s.total_rounds = static_cast<int>(s.phase.size());
  s.flood_only = flood_only;
  return s;
}

class AnchoredProgram : public NodeProgram {
 public:
  explicit AnchoredProgram(const Schedule* s) : s_(s) {}

  long long belief_u0() const { return bu0_; }
  long long belief_u1() const { return bu1_; }
  uint64_t belief_wgt() const { return bwgt_; }

  void reset(Node& node) override {
    int v = node.id();
    color_ = s_->fixed_colors ? (*s_->fixed_colors)[v]
                              : static_cast<int>(node.rng().below(s_->k));
    w_.resize(node.degree());
    if (s_->fixed_weights) {
      w_ = (*s_->fixed_weights)[v];
    } else {
      for (int p = 0; p < node.degree(); p++) w_[p] = node.rng().below(s_->weight_range);
    }
    ncolor_.assign(node.degree(), -1);
    have_belief_ = false;
    bu0_ = bu1_ = -1;
    bwgt_ = UINT64_MAX;
    aborted_ = false;
    pairs_ = {color_, v};
    tw_cur_ = cw_cur_ = -1;
  }

  void compose(Node& node, long long round) override {
    const Schedule::Phase& ph = s_->phase[static_cast<size_t>(round)];
    switch (ph.kind) {
      case 0: {
        Message m;
        m.push(static_cast<uint64_t>(color_), s_->color_bits);
        node.broadcast(m);
        break;
      }
      case 1: {
        if (ph.wround == 0 && color_ == 0) seed_belief(node);
        if (!have_belief_) break;
        Message m;
        m.push(static_cast<uint64_t>(bu0_), s_->id_bits);
        m.push(static_cast<uint64_t>(bu1_), s_->id_bits);
        m.push(bwgt_, s_->wgt_bits);
        node.broadcast(m);
        break;
      }
      case 2: {
        const Schedule::TreeWindow& w = s_->trees[ph.idx];
        ensure_tree(w, ph.idx);
        if (aborted_ || tloc_ < 0 || !tclosed_ || tsent_) break;
        Message m;
        m.push(static_cast<uint64_t>(bu0_), s_->id_bits);
        m.push(static_cast<uint64_t>(bu1_), s_->id_bits);
        m.push(static_cast<uint64_t>(color_), s_->color_bits);
        m.debug = pairs_;
        node.broadcast(m);
        tsent_ = true;
        break;
      }
      case 3: {
        const Schedule::CycleWindow& w = s_->cycles[ph.idx];
        ensure_cycle(node, w, ph.idx);
        if (aborted_ || role_ != ph.wround || !have_root_) break;
        Message m;
        m.push(static_cast<uint64_t>(bu0_), s_->id_bits);
        m.push(static_cast<uint64_t>(bu1_), s_->id_bits);
        m.push(static_cast<uint64_t>(root_), s_->id_bits);
        m.debug = chain_;
        node.broadcast(m);
        break;
      }
      case 4: {
        if (aborted_ || color_ != 1 || bu1_ != node.id()) break;
        int p = node.port_of(static_cast<int>(bu0_));
        if (p < 0) break;
        Message m;
        m.push(static_cast<uint64_t>(bu0_), s_->id_bits);
        m.push(static_cast<uint64_t>(bu1_), s_->id_bits);
        m.push(1, 1);
        m.debug = pairs_;
        node.send(p, m);
        break;
      }
    }
  }

  void receive(Node& node, long long round, int port, const Message& msg) override {
    const Schedule::Phase& ph = s_->phase[static_cast<size_t>(round)];
    switch (ph.kind) {
      case 0:
        ncolor_[port] = static_cast<int>(msg.value(0));
        break;
      case 1: {
        long long u0 = static_cast<long long>(msg.value(0));
        long long u1 = static_cast<long long>(msg.value(1));
        uint64_t w = msg.value(2);
        if (!have_belief_ || std::tie(w, u0, u1) < std::tie(bwgt_, bu0_, bu1_)) {
          have_belief_ = true;
          bwgt_ = w;
          bu0_ = u0;
          bu1_ = u1;
        }
        break;
      }
      case 2: {
        const Schedule::TreeWindow& w = s_->trees[ph.idx];
        ensure_tree(w, ph.idx);
        if (aborted_ || tloc_ < 0 || !tag_match(msg)) break;
        int l = w.local_of[static_cast<int>(msg.value(2))];
        if (l < 0 || !((tmissing_ >> l) & 1u)) break;
        tmissing_ &= ~(1u << l);
        pairs_.insert(pairs_.end(), msg.debug.begin(), msg.debug.end());
        if (tmissing_ == 0) tclosed_ = true;
        break;
      }
      case 3: {
        const Schedule::CycleWindow& w = s_->cycles[ph.idx];
        ensure_cycle(node, w, ph.idx);
        if (aborted_ || role_ < 0 || !tag_match(msg)) break;
        long long root = static_cast<long long>(msg.value(2));
        if (role_ == ph.wround + 1 && !have_root_) {
          have_root_ = true;
          root_ = root;
          chain_ = msg.debug;
          chain_.insert(chain_.end(), pairs_.begin(), pairs_.end());
        } else if (role_ == 0 && ph.wround == w.len - 1 && root == node.id()) {
          cyc_ok_ = true;
          pairs_.insert(pairs_.end(), msg.debug.begin(), msg.debug.end());
        }
        break;
      }
      case 4: {
        if (aborted_ || color_ != 0 || bu0_ != node.id()) break;
        if (!tag_match(msg) || msg.value(2) != 1) break;
        if (node.neighbor(port) != static_cast<int>(bu1_)) break;
        std::vector<int> witness(s_->k, -1);
        auto take = [&](const std::vector<int64_t>& flat) {
          for (size_t i = 0; i + 1 < flat.size(); i += 2) {
            int l = static_cast<int>(flat[i]);
            if (l >= 0 && l < s_->k && witness[l] < 0)
              witness[l] = static_cast<int>(flat[i + 1]);
          }
        };
        take(pairs_);
        take(msg.debug);
        node.reject(witness);
        break;
      }
    }
  }

  Status decide(Node& node, long long round) override {
    const Schedule::Phase& ph = s_->phase[static_cast<size_t>(round)];
    if (ph.kind == 1 && ph.wround == ph.wlast && !s_->flood_only) {
      if (!have_belief_)
        aborted_ = true;
      else if (color_ == 0 && bu0_ != node.id())
        aborted_ = true;
      else if (color_ == 1 && bu1_ != node.id())
        aborted_ = true;
      else if (s_->in_extra0[color_] && node.port_of(static_cast<int>(bu0_)) < 0)
        aborted_ = true;
      else if (s_->in_extra1[color_] && node.port_of(static_cast<int>(bu1_)) < 0)
        aborted_ = true;
    } else if (ph.kind == 2 && ph.wround == ph.wlast) {
      const Schedule::TreeWindow& w = s_->trees[ph.idx];
      ensure_tree(w, ph.idx);
      if (!aborted_ && tloc_ == 0 && !tclosed_) aborted_ = true;
    } else if (ph.kind == 3 && ph.wround == ph.wlast) {
      const Schedule::CycleWindow& w = s_->cycles[ph.idx];
      ensure_cycle(node, w, ph.idx);
      if (!aborted_ && role_ == 0 && !cyc_ok_) aborted_ = true;
    }
    if (aborted_) return Status::Halt;
    return round + 1 >= s_->total_rounds ? Status::Halt : Status::Running;
  }

 private:
  void seed_belief(Node& node) {
    for (int p = 0; p < node.degree(); p++) {
      if (ncolor_[p] != 1) continue;
      if (!have_belief_ || w_[p] < bwgt_) {
        have_belief_ = true;
        bwgt_ = w_[p];
        bu0_ = node.id();
        bu1_ = node.neighbor(p);
      }
    }
  }

  bool tag_match(const Message& msg) const {
    return have_belief_ && static_cast<long long>(msg.value(0)) == bu0_ &&
           static_cast<long long>(msg.value(1)) == bu1_;
  }

  void ensure_tree(const Schedule::TreeWindow& w, int widx) {
    if (tw_cur_ == widx) return;
    tw_cur_ = widx;
    tloc_ = color_ < s_->k ? w.local_of[color_] : -1;
    tmissing_ = tloc_ >= 0 ? w.child_mask[tloc_] : 0;
    tclosed_ = tloc_ >= 0 && tmissing_ == 0;
    tsent_ = false;
  }

  void ensure_cycle(Node& node, const Schedule::CycleWindow& w, int widx) {
    if (cw_cur_ == widx) return;
    cw_cur_ = widx;
    role_ = color_ < s_->k ? w.role_of[color_] : -1;
    have_root_ = false;
    cyc_ok_ = false;
    chain_.clear();
    if (role_ == 0 && !aborted_) {
      have_root_ = true;
      root_ = node.id();
      chain_ = pairs_;
    }
  }

  const Schedule* s_;
  int color_ = 0;
  std::vector<uint64_t> w_;
  std::vector<int> ncolor_;
  bool have_belief_ = false;
  long long bu0_ = -1, bu1_ = -1;
  uint64_t bwgt_ = UINT64_MAX;
  bool aborted_ = false;
  std::vector<int64_t> pairs_;

  int tw_cur_ = -1;
  int tloc_ = -1;
  uint32_t tmissing_ = 0;
  bool tclosed_ = false;
  bool tsent_ = false;

  int cw_cur_ = -1;
  int role_ = -1;
  bool have_root_ = false;
  long long root_ = -1;
  bool cyc_ok_ = false;
  std::vector<int64_t> chain_;
};

std::vector<AnchoredProgram*> attach_anchored(Simulator& sim, const Schedule* s) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  std::vector<AnchoredProgram*> raw;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) {
    auto p = std::make_unique<AnchoredProgram>(s);
    raw.push_back(p.get());
    programs.push_back(std::move(p));
  }
  sim.attach(std::move(programs));
  return raw;
}

}  // namespace

TesterResult test_anchored_freeness(const Graph& g, const Recipe& recipe,
                                    const AnchoredTestOptions& opt) {
  Schedule s = build_schedule(g, recipe, false);
  long long budget = opt.attempts_override > 0 ? opt.attempts_override
                                               : anchored_attempt_budget(s.k, opt.eps);

  Simulator sim(g);
  attach_anchored(sim, &s);

  TesterResult res;
  res.paper_rounds = budget * s.total_rounds;
  for (long long a = 0; a < budget; a++) {
    SimConfig cfg;
    cfg.global_seed = opt.seed;
    cfg.attempt = static_cast<uint64_t>(a);
    cfg.beta = opt.beta;
    cfg.max_rounds = s.total_rounds;
    cfg.stop_on_reject = true;
    Transcript t = sim.run(cfg);
    res.attempts++;
    res.sim_rounds += t.rounds;
    res.max_bits_per_edge = std::max(res.max_bits_per_edge, t.max_bits);
    if (t.rejected()) {
      res.detections++;
      if (!res.reject) {
        res.reject = true;
        res.witness = t.rejects[0].witness;
      }
      if (opt.stop_on_first_detection) break;
    }
  }
  return res;
}

FloodBeliefs run_anchored_flood(const Graph& g, int k, const std::vector<int>& colors,
                                const std::vector<std::vector<std::uint64_t>>& weights,
                                int beta) {
  if (k < 2 || k > 8) throw ValidationError("pattern size must be in [2,8]");
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one color per node");
  for (int c : colors)
    if (c < 0 || c >= k) throw ValidationError("color out of range [0,k)");
  if (static_cast<int>(weights.size()) != g.n())
    throw ValidationError("need one weight list per node");

  Recipe dummy;  // anchor-only recipe: the flood schedule only needs k
  Schedule s = build_schedule(g, dummy, true);
  s.k = std::max(k, 2);
  s.color_bits = ceil_log2(s.k);
  s.phase.clear();
  s.phase.push_back({0, 0, 0, 0});
  for (int i = 0; i < k; i++) s.phase.push_back({1, 0, i, k - 1});
  s.total_rounds = static_cast<int>(s.phase.size());
  for (int v = 0; v < g.n(); v++) {
    if (static_cast<int>(weights[v].size()) != g.degree(v))
      throw ValidationError("need one weight per outgoing orientation");
    for (uint64_t w : weights[v])
      if (w >= s.weight_range) throw ValidationError("weight out of range [0,n^4)");
  }
  s.fixed_colors = &colors;
  s.fixed_weights = &weights;

  Simulator sim(g);
  std::vector<AnchoredProgram*> raw = attach_anchored(sim, &s);
  SimConfig cfg;
  cfg.beta = beta;
  cfg.max_rounds = s.total_rounds;
  cfg.stop_on_reject = false;
  FloodBeliefs out;
  out.transcript = sim.run(cfg);
  out.u0.resize(g.n());
  out.u1.resize(g.n());
  out.wgt.resize(g.n());
  for (int v = 0; v < g.n(); v++) {
    out.u0[v] = raw[v]->belief_u0();
    out.u1[v] = raw[v]->belief_u1();
    out.wgt[v] = raw[v]->belief_wgt();
  }
  return out;
}

}  // namespace cpt
