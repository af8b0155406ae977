#include "cpt/tester_directed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"
#include "cpt/sim.hpp"

namespace cpt {

int GapDisjInstance::c_node(int j) const {
  if (j < 1 || j > 5) throw ValidationError("C index out of range [1,5]");
  return 1 + j;
}

int GapDisjInstance::d_node(int j) const {
  if (j < 1 || j > 5) throw ValidationError("D index out of range [1,5]");
  return 6 + j;
}

int GapDisjInstance::universe_node(int i) const {
  if (i < 1 || i > nU) throw ValidationError("universe element out of range [1,nU]");
  return 11 + i;
}

int GapDisjInstance::witness_node(int i) const {
  if (i < 1 || i > nU) throw ValidationError("universe element out of range [1,nU]");
  return static_cast<int>(11 + nU + i);
}

nlohmann::json GapDisjInstance::sidecar_json() const {
  return {{"nU", nU}, {"X", X}, {"Y", Y}};
}

GapDisjInstance gen_gapdisj(long long nU, std::vector<int> X, std::vector<int> Y) {
  if (nU < 2) throw ValidationError("universe needs at least two elements");
  if (nU > 100'000) throw ValidationError("universe too large");
  auto normalize = [&](std::vector<int>& s, const char* name) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (int i : s)
      if (i < 1 || i > nU) throw ValidationError(std::string(name) + " element out of [1,nU]");
  };
  normalize(X, "X");
  normalize(Y, "Y");

  GapDisjInstance inst;
  inst.nU = nU;
  inst.X = std::move(X);
  inst.Y = std::move(Y);

  std::vector<Edge> arcs;
  arcs.push_back({inst.kA, inst.c_node(1)});
  for (int j = 1; j < 5; j++) arcs.push_back({inst.c_node(j), inst.c_node(j + 1)});
  arcs.push_back({inst.c_node(5), inst.kB});
  arcs.push_back({inst.kB, inst.d_node(1)});
  for (int j = 1; j < 5; j++) arcs.push_back({inst.d_node(j), inst.d_node(j + 1)});
  arcs.push_back({inst.d_node(5), inst.kA});
  // Each universe element i owns two nodes: an input node u_i that carries
  // the membership arcs u_i -> A (i in X) and u_i -> B (i in Y), and a
  // witness node w_i that receives the fan arcs A -> w_i and B -> w_i.
  // Both populations return to the C-path through chains, so no node other
  // than A, B, and the w_i has two in-arcs reachable from a common source in
  // two hops.  The only diamond shape left is {u_i, A, B, w_j}, which needs
  // u_i -> A and u_i -> B, i.e. an element of the intersection; element i
  // contributes the arc-disjoint copy {u_i, A, B, w_i}.
  for (int i = 1; i <= nU; i++) {
    arcs.push_back({inst.kA, inst.witness_node(i)});
    arcs.push_back({inst.kB, inst.witness_node(i)});
  }
  for (int i = 1; i < nU; i++) {
    arcs.push_back({inst.universe_node(i), inst.universe_node(i + 1)});
    arcs.push_back({inst.witness_node(i), inst.witness_node(i + 1)});
  }
  arcs.push_back({inst.d_node(1), inst.universe_node(1)});
  arcs.push_back({inst.universe_node(static_cast<int>(nU)), inst.c_node(3)});
  arcs.push_back({inst.witness_node(static_cast<int>(nU)), inst.c_node(3)});
  for (int i : inst.X) arcs.push_back({inst.universe_node(i), inst.kA});
  for (int i : inst.Y) arcs.push_back({inst.universe_node(i), inst.kB});
  inst.graph = DiGraph(static_cast<int>(12 + 2 * nU), std::move(arcs));
  return inst;
}

namespace {

struct DiamondContext {
  int wgt_bits = 0;
  int id_bits = 0;
  uint64_t weight_range = 0;  // n^4
  const std::vector<int>* fixed_colors = nullptr;
  const std::vector<uint64_t>* fixed_weights = nullptr;
};

// Roles by color: 0 offers (weight, id); 1 and 2 forward their lightest
// offer tagged with which side they are; 3 rejects when both sides deliver
// the same offer, which witnesses arcs 0->1, 0->2, 1->3, 2->3.
class DiamondProgram : public NodeProgram {
 public:
  explicit DiamondProgram(const DiamondContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int v = node.id();
    color_ = ctx_->fixed_colors ? (*ctx_->fixed_colors)[v]
                                : static_cast<int>(node.rng().below(4));
    wgt_ = ctx_->fixed_weights ? (*ctx_->fixed_weights)[v]
                               : node.rng().below(ctx_->weight_range);
    got_best_ = false;
    best_w_ = 0;
    best_root_ = -1;
    pairs_.clear();
    rejected_ = false;
  }

  void compose(Node& node, long long round) override {
    if (round == 0) {
      if (color_ != 0 || node.out_degree() == 0) return;
      Message m;
      m.push(wgt_, ctx_->wgt_bits);
      m.push(static_cast<uint64_t>(node.id()), ctx_->id_bits);
      node.broadcast(m);
      return;
    }
    if (round == 1 && (color_ == 1 || color_ == 2) && got_best_ && node.out_degree() > 0) {
      Message m;
      m.push(best_w_, ctx_->wgt_bits);
      m.push(static_cast<uint64_t>(best_root_), ctx_->id_bits);
      m.push(static_cast<uint64_t>(color_ - 1), 1);
      node.broadcast(m);
    }
  }

  void receive(Node& node, long long round, int port, const Message& msg) override {
    if (round == 0) {
      if (color_ != 1 && color_ != 2) return;
      uint64_t w = msg.value(0);
      int root = static_cast<int>(msg.value(1));
      if (!got_best_ || w < best_w_ || (w == best_w_ && root < best_root_)) {
        got_best_ = true;
        best_w_ = w;
        best_root_ = root;
      }
      return;
    }
    if (color_ != 3 || rejected_) return;
    uint64_t w = msg.value(0);
    int root = static_cast<int>(msg.value(1));
    int side = static_cast<int>(msg.value(2));
    auto& ports =
        pairs_.try_emplace({w, root}, std::pair<int, int>{-1, -1}).first->second;
    (side == 0 ? ports.first : ports.second) = port;
    if (ports.first >= 0 && ports.second >= 0) {
      rejected_ = true;
      std::vector<int> witness = {root, node.in_neighbor(ports.first),
                                  node.in_neighbor(ports.second), node.id()};
      node.reject(witness);
    }
  }

  Status decide(Node&, long long round) override { return round >= 1 ? Status::Halt : Status::Running; }

 private:
  const DiamondContext* ctx_;
  int color_ = 0;
  uint64_t wgt_ = 0;
  bool got_best_ = false;
  uint64_t best_w_ = 0;
  int best_root_ = -1;
  std::map<std::pair<uint64_t, int>, std::pair<int, int>> pairs_;
  bool rejected_ = false;
};

DiamondContext make_diamond_context(const DiGraph& g) {
  DiamondContext ctx;
  ctx.id_bits = ceil_log2(g.n());
  ctx.wgt_bits = 4 * ctx.id_bits;
  uint64_t n = static_cast<uint64_t>(std::max(g.n(), 1));
  ctx.weight_range = n * n * n * n;
  return ctx;
}

void attach_diamond(Simulator& sim, const DiamondContext* ctx) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) programs.push_back(std::make_unique<DiamondProgram>(ctx));
  sim.attach(std::move(programs));
}

struct DirCkContext {
  int k = 0;
  int wgt_bits = 0;
  int id_bits = 0;
  uint64_t weight_range = 0;
  const std::vector<int>* fixed_colors = nullptr;
  const std::vector<uint64_t>* fixed_weights = nullptr;
};

// As the undirected color-coded BFS, but offers travel along arcs only and
// every node owns a single weight (a broadcast cannot vary per out-arc).
class DirCkProgram : public NodeProgram {
 public:
  explicit DirCkProgram(const DirCkContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int v = node.id();
    color_ = ctx_->fixed_colors ? (*ctx_->fixed_colors)[v]
                                : static_cast<int>(node.rng().below(ctx_->k));
    root_ = v;
    wgt_ = ctx_->fixed_weights ? (*ctx_->fixed_weights)[v]
                               : node.rng().below(ctx_->weight_range);
    path_ = {v};
    got_best_ = false;
    rejected_ = false;
  }

  void compose(Node& node, long long round) override {
    if (color_ != static_cast<int>(round) || node.out_degree() == 0) return;
    Message m;
    m.push(wgt_, ctx_->wgt_bits);
    m.push(static_cast<uint64_t>(root_), ctx_->id_bits);
    m.debug.assign(path_.begin(), path_.end());
    node.broadcast(m);
  }

  void receive(Node& node, long long round, int, const Message& msg) override {
    uint64_t w = msg.value(0);
    int root = static_cast<int>(msg.value(1));
    if (static_cast<int>(round) == ctx_->k - 1 && color_ == 0 && root == node.id() &&
        !rejected_) {
      rejected_ = true;
      std::vector<int> witness(msg.debug.begin(), msg.debug.end());
      node.reject(witness);
    }
    if (!got_best_ || w < best_w_ || (w == best_w_ && root < best_root_)) {
      got_best_ = true;
      best_w_ = w;
      best_root_ = root;
      best_path_.assign(msg.debug.begin(), msg.debug.end());
    }
  }

  Status decide(Node& node, long long round) override {
    if (got_best_ && color_ == static_cast<int>((round + 1) % ctx_->k) && best_w_ < wgt_) {
      wgt_ = best_w_;
      root_ = best_root_;
      path_ = best_path_;
      path_.push_back(node.id());
    }
    got_best_ = false;
    return round == ctx_->k - 1 ? Status::Halt : Status::Running;
  }

 private:
  const DirCkContext* ctx_;
  int color_ = 0;
  int root_ = 0;
  uint64_t wgt_ = 0;
  std::vector<int64_t> path_;
  bool got_best_ = false;
  uint64_t best_w_ = 0;
  int best_root_ = 0;
  std::vector<int64_t> best_path_;
  bool rejected_ = false;
};

DirCkContext make_dir_ck_context(const DiGraph& g, int k) {
  if (k < 3 || k > 8) throw ValidationError("cycle length must be in [3,8]");
  DirCkContext ctx;
  ctx.k = k;
  ctx.id_bits = ceil_log2(g.n());
  ctx.wgt_bits = 4 * ctx.id_bits;
  uint64_t n = static_cast<uint64_t>(std::max(g.n(), 1));
  ctx.weight_range = n * n * n * n;
  return ctx;
}

void attach_dir_ck(Simulator& sim, const DirCkContext* ctx) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) programs.push_back(std::make_unique<DirCkProgram>(ctx));
  sim.attach(std::move(programs));
}

}  // namespace

long long diamond_attempt_budget(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("eps must be in (0,1]");
  double budget = std::ceil(20.0 * 256.0 / eps);
  if (!(budget < 9.0e18)) throw ValidationError("attempt budget overflows");
  return static_cast<long long>(budget);
}

TesterResult test_diamond_freeness(const DiGraph& g, const DiamondOptions& opt) {
  DiamondContext ctx = make_diamond_context(g);
  long long budget =
      opt.attempts_override > 0 ? opt.attempts_override : diamond_attempt_budget(opt.eps);

  Simulator sim(g);
  attach_diamond(sim, &ctx);

  TesterResult res;
  res.paper_rounds = budget * 2;
  for (long long a = 0; a < budget; a++) {
    SimConfig cfg;
    cfg.global_seed = opt.seed;
    cfg.attempt = static_cast<uint64_t>(a);
    cfg.beta = opt.beta;
    cfg.max_rounds = 2;
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

ColorBfsRun run_diamond_attempt(const DiGraph& g, const std::vector<int>& colors,
                                const std::vector<uint64_t>& weights, int beta) {
  DiamondContext ctx = make_diamond_context(g);
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one color per node");
  for (int c : colors)
    if (c < 0 || c >= 4) throw ValidationError("color out of range [0,4)");
  if (static_cast<int>(weights.size()) != g.n())
    throw ValidationError("need one weight per node");
  for (uint64_t w : weights)
    if (w >= ctx.weight_range) throw ValidationError("weight out of range [0,n^4)");
  ctx.fixed_colors = &colors;
  ctx.fixed_weights = &weights;

  Simulator sim(g);
  attach_diamond(sim, &ctx);
  SimConfig cfg;
  cfg.beta = beta;
  cfg.max_rounds = 2;
  cfg.stop_on_reject = false;
  ColorBfsRun out;
  out.transcript = sim.run(cfg);
  out.detected = out.transcript.rejected();
  out.detections = out.transcript.rejects;
  return out;
}

TesterResult test_directed_ck_freeness(const DiGraph& g, int k, const CkOptions& opt) {
  DirCkContext ctx = make_dir_ck_context(g, k);
  long long budget =
      opt.attempts_override > 0 ? opt.attempts_override : ck_attempt_budget(k, opt.eps);

  Simulator sim(g);
  attach_dir_ck(sim, &ctx);

  TesterResult res;
  res.paper_rounds = budget * k;
  for (long long a = 0; a < budget; a++) {
    SimConfig cfg;
    cfg.global_seed = opt.seed;
    cfg.attempt = static_cast<uint64_t>(a);
    cfg.beta = opt.beta;
    cfg.max_rounds = k;
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

ColorBfsRun run_directed_color_bfs(const DiGraph& g, int k, const std::vector<int>& colors,
                                   const std::vector<uint64_t>& weights, int beta) {
  DirCkContext ctx = make_dir_ck_context(g, k);
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one color per node");
  for (int c : colors)
    if (c < 0 || c >= k) throw ValidationError("color out of range [0,k)");
  if (static_cast<int>(weights.size()) != g.n())
    throw ValidationError("need one weight per node");
  for (uint64_t w : weights)
    if (w >= ctx.weight_range) throw ValidationError("weight out of range [0,n^4)");
  ctx.fixed_colors = &colors;
  ctx.fixed_weights = &weights;

  Simulator sim(g);
  attach_dir_ck(sim, &ctx);
  SimConfig cfg;
  cfg.beta = beta;
  cfg.max_rounds = k;
  cfg.stop_on_reject = false;
  ColorBfsRun out;
  out.transcript = sim.run(cfg);
  out.detected = out.transcript.rejected();
  out.detections = out.transcript.rejects;
  return out;
}

}  // namespace cpt
