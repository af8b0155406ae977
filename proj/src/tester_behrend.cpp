#include "cpt/tester_behrend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"
#include "cpt/sim.hpp"

namespace cpt {

namespace {

bool is_prime(long long p) {
  if (p < 2) return false;
  for (long long d = 2; d * d <= p; d++)
    if (p % d == 0) return false;
  return true;
}

long long tuple_space(size_t size, int k) {
  long long total = 1;
  for (int i = 0; i < k; i++) {
    total *= static_cast<long long>(size);
    if (total > 10'000'000) return total;
  }
  return total;
}

// Scan ordered k-tuples over `values`; when must_use >= 0, only tuples that
// use values[must_use] at least once. False on the first violating tuple.
bool tuples_ok(const std::vector<long long>& values, int k, long long p, int must_use) {
  if (values.empty()) return true;
  std::vector<int> idx(k, 0);
  for (;;) {
    bool uses = must_use < 0;
    for (int i = 0; !uses && i < k; i++) uses = idx[i] == must_use;
    if (uses) {
      long long sum = 0;
      for (int i = 0; i + 1 < k; i++) sum += values[idx[i]];
      if (sum % p == static_cast<long long>(k - 1) * values[idx[k - 1]] % p) {
        bool constant = true;
        for (int i = 1; constant && i < k; i++) constant = values[idx[i]] == values[idx[0]];
        if (!constant) return false;
      }
    }
    int pos = k - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(values.size())) idx[pos--] = 0;
    if (pos < 0) return true;
  }
}

void check_family_shape(long long p, int k) {
  if (!is_prime(p)) throw ValidationError("modulus must be prime");
  if (k < 3 || k > 8) throw ValidationError("tuple arity must be in [3,8]");
}

}  // namespace

nlohmann::json ResidueFamily::to_json() const {
  return {{"p", p}, {"k", k}, {"x", x}};
}

ResidueFamily ResidueFamily::from_json(const nlohmann::json& j) {
  ResidueFamily fam;
  fam.p = j.at("p").get<long long>();
  fam.k = j.at("k").get<int>();
  fam.x = j.at("x").get<std::vector<long long>>();
  if (!verify_behrend_set(fam)) throw ValidationError("serialized family is not sum-free");
  return fam;
}

ResidueFamily build_behrend_set(long long p, int k) {
  check_family_shape(p, k);
  ResidueFamily fam{p, k, {}};
  for (long long cand = 0; cand < p; cand++) {
    fam.x.push_back(cand);
    if (tuple_space(fam.x.size(), k) > 10'000'000 ||
        !tuples_ok(fam.x, k, p, static_cast<int>(fam.x.size()) - 1))
      fam.x.pop_back();
  }
  return fam;
}

bool verify_behrend_set(const ResidueFamily& fam) {
  check_family_shape(fam.p, fam.k);
  std::set<long long> seen;
  for (long long v : fam.x) {
    if (v < 0 || v >= fam.p) throw ValidationError("residue out of range [0,p)");
    if (!seen.insert(v).second) throw ValidationError("duplicate residue");
  }
  if (tuple_space(fam.x.size(), fam.k) > 10'000'000)
    throw ValidationError("family too large for the exhaustive check");
  return tuples_ok(fam.x, fam.k, fam.p, -1);
}

int LayeredGraph::vertex(int layer, long long index) const {
  if (layer < 1 || layer > s) throw ValidationError("layer out of range [1,s]");
  long long idx = ((index % n) + n) % n;
  return static_cast<int>((layer - 1) * n + idx);
}

nlohmann::json LayeredGraph::sidecar_json() const {
  return {{"s", s},
          {"n", n},
          {"x", family.x},
          {"variant", clique_variant ? "bk" : "bc"},
          {"layers", layer_of}};
}

namespace {

LayeredGraph build_layered(int s, long long n, const ResidueFamily& fam, bool clique) {
  if (s < 3 || s > 7 || s % 2 == 0)
    throw ValidationError("layer count must be odd and in [3,7]");
  if (!is_prime(n)) throw ValidationError("layer size must be prime");
  if (static_cast<long long>(s) * n > 50'000)
    throw ValidationError("layered graph too large");
  if (fam.p != n || fam.k != s)
    throw ValidationError("family must be built with p = n and k = s");
  if (!verify_behrend_set(fam))
    throw ValidationError("family fails its sum-free property");

  LayeredGraph lg;
  lg.s = s;
  lg.n = n;
  lg.clique_variant = clique;
  lg.family = fam;
  int total = static_cast<int>(s * n);
  lg.layer_of.resize(total);
  for (int v = 0; v < total; v++) lg.layer_of[v] = static_cast<int>(v / n) + 1;

  std::set<Edge> edges;
  auto add_edge = [&](int a, int b) {
    Edge e{std::min(a, b), std::max(a, b)};
    if (!edges.insert(e).second) lg.duplicate_edges++;
  };
  for (long long x : fam.x)
    for (long long b = 0; b < n; b++) {
      std::vector<int> tuple(s);
      for (int t = 1; t <= s; t++) tuple[t - 1] = lg.vertex(t, b + (t - 1) * x);
      if (clique) {
        for (int i = 0; i < s; i++)
          for (int j = i + 1; j < s; j++) add_edge(tuple[i], tuple[j]);
      } else {
        for (int i = 0; i < s; i++) add_edge(tuple[i], tuple[(i + 1) % s]);
      }
      lg.tuples.push_back(std::move(tuple));
    }
  lg.graph = Graph(total, {edges.begin(), edges.end()});
  return lg;
}

}  // namespace

LayeredGraph build_bc(int s, long long n, const ResidueFamily& fam) {
  return build_layered(s, n, fam, false);
}

LayeredGraph build_bk(int s, long long n, const ResidueFamily& fam) {
  return build_layered(s, n, fam, true);
}

double f_of_n(double n) {
  if (!(n >= 16.0)) throw ValidationError("f(n) needs n >= 16");
  double ll = std::log2(std::log2(n));
  double lll = std::log2(ll);
  return std::pow(n, (lll + 4.0) / ll);
}

int sample_single(long long n, Rng& rng) {
  if (n < 1) throw ValidationError("need at least one node");
  int count = 0;
  for (long long i = 0; i < n; i++)
    if (rng.bernoulli(1.0 / static_cast<double>(n)) && ++count >= 2) return 2;
  return count;
}

namespace {

struct Slot {
  int i = 0;  // claimed layer, 1-based
  int j = 0;  // slot column, 1-based
};

struct BehrendContext {
  int s = 0;
  int id_bits = 1;
  int s_bits = 1;
  int wgt_bits = 4;
  uint64_t weight_range = 16;
  const std::vector<std::vector<int>>* forced_marks = nullptr;
};

// Rounds: 0 marks out, 1 safe colors out, 2..s+1 weighted BFS, s+2 cycle
// candidates out, s+3 adjacency masks back and verdict.
class BehrendProgram : public NodeProgram {
 public:
  explicit BehrendProgram(const BehrendContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int s = ctx_->s;
    slots_.clear();
    if (ctx_->forced_marks) {
      for (int i = 1; i <= s; i++)
        for (int j = 1; j <= s; j++)
          if ((*ctx_->forced_marks)[i - 1][j - 1] == node.id()) slots_.push_back({i, j});
    } else {
      double p = 1.0 / node.n();
      for (int i = 1; i <= s; i++)
        for (int j = 1; j <= s; j++)
          if (node.rng().bernoulli(p)) slots_.push_back({i, j});
    }
    alive_.assign(s + 1, static_cast<uint16_t>((1u << s) - 1));
    color_ = -1;
    ncolor_.assign(node.degree(), -1);
    have_best_ = false;
    best_wgt_ = 0;
    best_root_ = -1;
    chain_.clear();
    pend_ = false;
    cycle_.clear();
    queried_ports_.clear();
    ok_masks_ = 0;
    reply_.assign(node.degree(), std::vector<int64_t>{});
  }

  void compose(Node& node, long long round) override {
    int s = ctx_->s;
    if (round == 0) {
      if (slots_.empty()) return;
      Message m;  // the smallest slot this node sampled itself into
      m.push(static_cast<uint64_t>(slots_.front().i - 1), ctx_->s_bits);
      m.push(static_cast<uint64_t>(slots_.front().j - 1), ctx_->s_bits);
      node.broadcast(m);
      return;
    }
    if (round == 1) {
      if (color_ < 0) return;
      Message m;
      m.push(static_cast<uint64_t>(color_ - 1), ctx_->s_bits);
      node.broadcast(m);
      return;
    }
    if (round < 2 + s) {
      long long r = round - 2;
      if (color_ - 1 != r % s) return;
      if (r == 0) {  // BFS seeds: color-1 nodes weight themselves
        best_wgt_ = node.rng().below(ctx_->weight_range);
        best_root_ = node.id();
        chain_ = {node.id()};
        have_best_ = true;
      }
      if (!have_best_) return;
      Message m;
      m.push(best_wgt_, ctx_->wgt_bits);
      m.push(static_cast<uint64_t>(best_root_), ctx_->id_bits);
      m.debug = chain_;
      node.broadcast(m);
      return;
    }
    if (round == 2 + s) {
      if (cycle_.empty()) return;
      // Every cycle member must already be our neighbor, or no clique.
      std::vector<int> ports;
      for (int64_t v : cycle_) {
        if (v == node.id()) continue;
        int p = node.port_of(static_cast<int>(v));
        if (p < 0) {
          cycle_.clear();
          return;
        }
        ports.push_back(p);
      }
      Message m;
      for (int64_t v : cycle_) m.push(static_cast<uint64_t>(v), ctx_->id_bits);
      for (int p : ports) node.send(p, m);
      queried_ports_ = ports;
      return;
    }
    if (round == 3 + s) {
      for (int p = 0; p < static_cast<int>(reply_.size()); p++) {
        if (reply_[p].empty()) continue;
        uint64_t mask = 0;
        for (size_t b = 0; b < reply_[p].size(); b++) {
          int v = static_cast<int>(reply_[p][b]);
          if (v == node.id() || node.port_of(v) >= 0) mask |= uint64_t{1} << b;
        }
        Message m;
        m.push(mask, s);
        node.send(p, m);
      }
    }
  }

  void receive(Node& node, long long round, int port, const Message& msg) override {
    int s = ctx_->s;
    if (round == 0) {
      int i = static_cast<int>(msg.value(0)) + 1;
      int j = static_cast<int>(msg.value(1)) + 1;
      alive_[j] &= static_cast<uint16_t>(~(1u << (i - 1)));
      return;
    }
    if (round == 1) {
      ncolor_[port] = static_cast<int>(msg.value(0)) + 1;
      return;
    }
    if (round < 2 + s) {
      long long r = round - 2;
      if (ncolor_[port] - 1 != r % s) return;  // stray sender
      uint64_t wgt = msg.value(0);
      int root = static_cast<int>(msg.value(1));
      if (r == s - 1) {
        // Closure: only the BFS origin may recognize itself.
        if (color_ - 1 == 0 && root == node.id() && cycle_.empty() &&
            static_cast<int>(msg.debug.size()) == s)
          cycle_ = msg.debug;
        return;
      }
      if (color_ - 1 != (r + 1) % s) return;
      if (!pend_ || std::tie(wgt, root) < std::tie(pend_wgt_, pend_root_)) {
        pend_ = true;
        pend_wgt_ = wgt;
        pend_root_ = root;
        pend_chain_ = msg.debug;
        pend_chain_.push_back(node.id());
      }
      return;
    }
    if (round == 2 + s) {
      reply_[port] = {};
      for (int f = 0; f < msg.size(); f++)
        reply_[port].push_back(static_cast<int64_t>(msg.value(f)));
      return;
    }
    if (round == 3 + s) {
      bool queried =
          std::find(queried_ports_.begin(), queried_ports_.end(), port) != queried_ports_.end();
      if (!queried) return;
      if (msg.value(0) == (uint64_t{1} << s) - 1) ok_masks_++;
      if (ok_masks_ == s - 1) {
        std::vector<int> witness(cycle_.begin(), cycle_.end());
        std::sort(witness.begin(), witness.end());
        node.reject(witness);
      }
    }
  }

  Status decide(Node& node, long long round) override {
    (void)node;
    int s = ctx_->s;
    if (round == 0) {
      // Safety: for column j everything but layer j itself was struck out.
      for (int j = 1; j <= s; j++)
        if (alive_[j] == (1u << (j - 1))) {
          if (color_ > 0) {  // ambiguous double-safety: stand down
            color_ = -1;
            break;
          }
          color_ = j;
        }
      return Status::Running;
    }
    if (round >= 2 && round < 2 + s) {
      long long r = round - 2;
      if (pend_ && color_ - 1 == (r + 1) % s) {
        have_best_ = true;
        best_wgt_ = pend_wgt_;
        best_root_ = pend_root_;
        chain_ = pend_chain_;
        pend_ = false;
      }
    }
    return round >= 3 + s ? Status::Halt : Status::Running;
  }

  int safe_color() const { return color_; }  // 1..s, or -1 if uncolored

 private:
  const BehrendContext* ctx_;
  std::vector<Slot> slots_;
  std::vector<uint16_t> alive_;  // per column j: bitmask of layers not yet struck
  int color_ = -1;
  std::vector<int> ncolor_;
  bool have_best_ = false;
  uint64_t best_wgt_ = 0;
  int best_root_ = -1;
  std::vector<int64_t> chain_;
  bool pend_ = false;
  uint64_t pend_wgt_ = 0;
  int pend_root_ = -1;
  std::vector<int64_t> pend_chain_;
  std::vector<int64_t> cycle_;
  std::vector<int> queried_ports_;
  int ok_masks_ = 0;
  std::vector<std::vector<int64_t>> reply_;
};

}  // namespace

TesterResult detect_ks_behrend(const LayeredGraph& g, const BehrendDetectOptions& opt) {
  if (g.s < 3) throw ValidationError("layered graph is not built");
  if (opt.max_reps < 1) throw ValidationError("need at least one repetition");
  int total = g.graph.n();
  if (opt.forced_marks) {
    if (static_cast<int>(opt.forced_marks->size()) != g.s)
      throw ValidationError("mark table needs s rows");
    for (const auto& row : *opt.forced_marks) {
      if (static_cast<int>(row.size()) != g.s)
        throw ValidationError("mark table needs s columns");
      for (int v : row)
        if (v < 0 || v >= total) throw ValidationError("mark vertex out of range");
    }
  }

  BehrendContext ctx;
  ctx.s = g.s;
  ctx.id_bits = std::max(1, ceil_log2(total));
  ctx.s_bits = std::max(1, ceil_log2(g.s));
  ctx.wgt_bits = 4 * ctx.id_bits;
  ctx.weight_range = 1;
  for (int i = 0; i < 4; i++) ctx.weight_range *= static_cast<uint64_t>(total);
  ctx.forced_marks = opt.forced_marks;

  long long rounds_per_rep = g.s + 4;
  TesterResult res;
  for (long long rep = 0; rep < opt.max_reps; rep++) {
    SimConfig cfg;
    cfg.global_seed = opt.seed;
    cfg.attempt = static_cast<uint64_t>(rep);
    cfg.beta = opt.beta;
    cfg.max_rounds = rounds_per_rep + 1;
    cfg.stop_on_reject = opt.stop_on_first_detection;
    Transcript t = run_protocol(
        g.graph, [&](int) { return std::make_unique<BehrendProgram>(&ctx); }, cfg);
    res.attempts++;
    res.sim_rounds += t.rounds;
    res.paper_rounds += rounds_per_rep;
    res.max_bits_per_edge = std::max(res.max_bits_per_edge, t.max_bits);
    if (t.rejected()) {
      res.detections++;
      if (!res.reject) {
        res.reject = true;
        res.witness = t.rejects.front().witness;
      }
      if (opt.stop_on_first_detection) break;
    }
  }
  return res;
}

std::vector<int> safe_color_map(const LayeredGraph& g,
                                const std::vector<std::vector<int>>& marks) {
  if (g.s < 3) throw ValidationError("layered graph is not built");
  if (static_cast<int>(marks.size()) != g.s) throw ValidationError("mark table needs s rows");
  int total = g.graph.n();
  std::vector<std::pair<int, int>> slot(total, {-1, -1});
  for (int i = 1; i <= g.s; i++) {
    if (static_cast<int>(marks[i - 1].size()) != g.s)
      throw ValidationError("mark table needs s columns");
    for (int j = 1; j <= g.s; j++) {
      int v = marks[i - 1][j - 1];
      if (v < 0 || v >= total) throw ValidationError("mark vertex out of range");
      if (slot[v].first < 0) slot[v] = {i, j};  // row-major scan = smallest slot
    }
  }
  std::vector<std::vector<uint16_t>> alive(
      total, std::vector<uint16_t>(g.s + 1, static_cast<uint16_t>((1u << g.s) - 1)));
  for (int v = 0; v < total; v++) {
    auto [i, j] = slot[v];
    if (i < 0) continue;
    for (int u : g.graph.neighbors(v)) alive[u][j] &= static_cast<uint16_t>(~(1u << (i - 1)));
  }
  std::vector<int> color(total, -1);
  for (int v = 0; v < total; v++)
    for (int j = 1; j <= g.s; j++)
      if (alive[v][j] == (1u << (j - 1))) {
        color[v] = color[v] < 0 ? j : -1;
        if (color[v] < 0) break;  // ambiguous double-safety
      }
  return color;
}

std::vector<std::vector<int>> rig_marks_for_tuple(const LayeredGraph& g, int tuple_index) {
  if (tuple_index < 0 || tuple_index >= static_cast<int>(g.tuples.size()))
    throw ValidationError("tuple index out of range");
  if (!g.clique_variant)
    throw ValidationError(
        "rigged marking requires the clique variant: ring vertices lack the "
        "cross-layer edges the elimination needs");
  if (g.family.x.size() < 2)
    throw ValidationError("rigged marking needs at least two residues");
  const std::vector<int>& w = g.tuples[tuple_index];
  long long n = g.n;
  long long base = w[0] % n;
  long long x = ((w[1] % n) - base % n + n) % n;
  long long alt = g.family.x[0] == x ? g.family.x[1] : g.family.x[0];

  std::vector<std::vector<int>> marks(g.s, std::vector<int>(g.s, -1));
  for (int i = 1; i <= g.s; i++) {
    std::set<long long> taken;  // indices used within layer i
    for (int j = 1; j <= g.s; j++) {
      if (i == j) continue;
      long long idx = ((base + (j - 1) * x + (i - j) * alt) % n + n) % n;
      marks[i - 1][j - 1] = g.vertex(i, idx);
      taken.insert(idx);
    }
    long long own = (base + (i - 1) * x) % n;  // the tuple vertex in this layer
    taken.insert(own);
    long long diag = (own + 1) % n;
    while (taken.count(diag)) diag = (diag + 1) % n;
    marks[i - 1][i - 1] = g.vertex(i, diag);
  }
  return marks;
}

}  // namespace cpt
