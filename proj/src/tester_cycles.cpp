#include "cpt/tester_cycles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "cpt/errors.hpp"

namespace cpt {

namespace {

struct CkContext {
  int k = 0;
  int wgt_bits = 0;
  int id_bits = 0;
  uint64_t weight_range = 0;  // n^4
  const std::vector<int>* fixed_colors = nullptr;
  const std::vector<std::vector<uint64_t>>* fixed_weights = nullptr;
  const std::vector<char>* aborted = nullptr;
};

// One node of the color-coded BFS. Nodes colored r relay their lightest
// known (weight, root) in round r; nodes colored r+1 adopt the lightest
// strictly improving offer. The debug payload carries the relay chain so a
// detection can surface the actual cycle.
class CkProgram : public NodeProgram {
 public:
  explicit CkProgram(const CkContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int v = node.id();
    color_ = ctx_->fixed_colors ? (*ctx_->fixed_colors)[v]
                                : static_cast<int>(node.rng().below(ctx_->k));
    abort_ = ctx_->aborted && !ctx_->aborted->empty() && (*ctx_->aborted)[v] != 0;
    root_ = v;
    wgt_ = UINT64_MAX;
    if (ctx_->fixed_weights) {
      for (uint64_t w : (*ctx_->fixed_weights)[v]) wgt_ = std::min(wgt_, w);
    } else {
      for (int p = 0; p < node.degree(); p++)
        wgt_ = std::min(wgt_, node.rng().below(ctx_->weight_range));
    }
    path_.clear();
    path_.push_back(v);
    got_best_ = false;
    rejected_ = false;
  }

  void compose(Node& node, long long round) override {
    if (abort_ || color_ != static_cast<int>(round)) return;
    if (node.degree() == 0 || wgt_ == UINT64_MAX) return;
    Message m;
    m.push(wgt_, ctx_->wgt_bits);
    m.push(static_cast<uint64_t>(root_), ctx_->id_bits);
    m.debug.assign(path_.begin(), path_.end());
    node.broadcast(m);
  }

  void receive(Node& node, long long round, int, const Message& msg) override {
    if (abort_) return;
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
    if (!abort_ && got_best_ && color_ == static_cast<int>((round + 1) % ctx_->k) &&
        best_w_ < wgt_) {
      wgt_ = best_w_;
      root_ = best_root_;
      path_ = best_path_;
      path_.push_back(node.id());
    }
    got_best_ = false;
    return round == ctx_->k - 1 ? Status::Halt : Status::Running;
  }

 private:
  const CkContext* ctx_;
  int color_ = 0;
  bool abort_ = false;
  int root_ = 0;
  uint64_t wgt_ = 0;
  std::vector<int64_t> path_;
  bool got_best_ = false;
  uint64_t best_w_ = 0;
  int best_root_ = 0;
  std::vector<int64_t> best_path_;
  bool rejected_ = false;
};

CkContext make_context(const Graph& g, int k) {
  if (k < 3 || k > 8) throw ValidationError("cycle length must be in [3,8]");
  CkContext ctx;
  ctx.k = k;
  ctx.id_bits = ceil_log2(g.n());
  ctx.wgt_bits = 4 * ctx.id_bits;
  uint64_t n = static_cast<uint64_t>(std::max(g.n(), 1));
  ctx.weight_range = n * n * n * n;
  return ctx;
}

void attach_ck(Simulator& sim, const CkContext* ctx) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) programs.push_back(std::make_unique<CkProgram>(ctx));
  sim.attach(std::move(programs));
}

}  // namespace

long long ck_attempt_budget(int k, double eps) {
  if (k < 3 || k > 8) throw ValidationError("cycle length must be in [3,8]");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  double budget = std::ceil(20.0 * std::pow(static_cast<double>(k), k) / eps);
  if (!(budget < 9.0e18)) throw ValidationError("attempt budget overflows");
  return static_cast<long long>(budget);
}

TesterResult test_ck_freeness(const Graph& g, int k, const CkOptions& opt) {
  CkContext ctx = make_context(g, k);
  long long budget =
      opt.attempts_override > 0 ? opt.attempts_override : ck_attempt_budget(k, opt.eps);

  Simulator sim(g);
  attach_ck(sim, &ctx);

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

ColorBfsRun run_color_bfs(const Graph& g, int k, const std::vector<int>& colors,
                          const std::vector<std::vector<uint64_t>>& weights,
                          const std::vector<char>& aborted, int beta) {
  CkContext ctx = make_context(g, k);
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one color per node");
  for (int c : colors)
    if (c < 0 || c >= k) throw ValidationError("color out of range [0,k)");
  if (static_cast<int>(weights.size()) != g.n())
    throw ValidationError("need one weight list per node");
  for (int v = 0; v < g.n(); v++) {
    if (static_cast<int>(weights[v].size()) != g.degree(v))
      throw ValidationError("need one weight per outgoing orientation");
    for (uint64_t w : weights[v])
      if (w >= ctx.weight_range) throw ValidationError("weight out of range [0,n^4)");
  }
  if (!aborted.empty() && static_cast<int>(aborted.size()) != g.n())
    throw ValidationError("aborted mask must cover every node");
  ctx.fixed_colors = &colors;
  ctx.fixed_weights = &weights;
  ctx.aborted = &aborted;

  Simulator sim(g);
  attach_ck(sim, &ctx);
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
