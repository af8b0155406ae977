#include "cpt/tester_trees.hpp"

#include <algorithm>
#include <memory>

#include "cpt/errors.hpp"

namespace cpt {

TreePattern::TreePattern(std::vector<int> parents) : parents_(std::move(parents)) {
  k_ = static_cast<int>(parents_.size()) + 1;
  if (k_ < 2 || k_ > 8) throw ValidationError("tree must have between 2 and 8 nodes");
  children_.resize(k_);
  std::vector<Edge> edges;
  for (int i = 1; i < k_; i++) {
    int p = parents_[i - 1];
    if (p < 0 || p >= i)
      throw ValidationError("parent of node " + std::to_string(i) + " must be a smaller label");
    children_[p].push_back(i);
    edges.emplace_back(p, i);
  }
  pattern_ = Pattern(k_, std::move(edges));
  std::vector<int> d(k_, 0);
  for (int i = 1; i < k_; i++) {
    d[i] = d[parents_[i - 1]] + 1;
    depth_ = std::max(depth_, d[i]);
  }
}

int TreePattern::parent(int i) const {
  if (i < 1 || i >= k_) throw ValidationError("parent(): label out of range");
  return parents_[i - 1];
}

TreePattern TreePattern::subtree(int x, std::vector<int>* label_map) const {
  if (x < 0 || x >= k_) throw ValidationError("subtree(): label out of range");
  std::vector<char> keep(k_, 0);
  keep[x] = 1;
  for (int i = x + 1; i < k_; i++)
    if (keep[parents_[i - 1]]) keep[i] = 1;  // parents precede children
  std::vector<int> order;  // ascending original labels, root first
  for (int i = 0; i < k_; i++)
    if (keep[i]) order.push_back(i);
  std::vector<int> new_of(k_, -1);
  for (size_t j = 0; j < order.size(); j++) new_of[order[j]] = static_cast<int>(j);
  std::vector<int> parents;
  for (size_t j = 1; j < order.size(); j++) parents.push_back(new_of[parents_[order[j] - 1]]);
  if (label_map) *label_map = order;
  if (order.size() == 1) {
    // A lone leaf is not a valid TreePattern; callers must special-case it.
    throw ValidationError("subtree(): single-node subtree has no edges");
  }
  return TreePattern(std::move(parents));
}

namespace {

struct TreeContext {
  const TreePattern* tree = nullptr;
  int color_bits = 0;
  std::vector<uint16_t> child_mask;  // per label, bitmask of child labels
  const std::vector<int>* fixed_colors = nullptr;
};

class TreeProgram : public NodeProgram {
 public:
  explicit TreeProgram(const TreeContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int k = ctx_->tree->k();
    color_ = ctx_->fixed_colors ? (*ctx_->fixed_colors)[node.id()]
                                : static_cast<int>(node.rng().below(k));
    missing_ = ctx_->child_mask[color_];
    closed_ = missing_ == 0;
    pairs_.clear();
    pairs_.push_back(color_);
    pairs_.push_back(node.id());
    rejected_ = false;
  }

  void compose(Node& node, long long) override {
    Message m;
    m.push(static_cast<uint64_t>(color_), ctx_->color_bits);
    m.push(closed_ ? 1 : 0, 1);
    if (closed_) m.debug = pairs_;
    node.broadcast(m);
  }

  void receive(Node&, long long, int, const Message& msg) override {
    int c = static_cast<int>(msg.value(0));
    bool sender_closed = msg.value(1) == 1;
    if (!sender_closed || !(missing_ & (1u << c))) return;
    missing_ &= static_cast<uint16_t>(~(1u << c));
    pairs_.insert(pairs_.end(), msg.debug.begin(), msg.debug.end());
    if (missing_ == 0) closed_ = true;
  }

  Status decide(Node& node, long long round) override {
    if (round < ctx_->tree->depth() - 1) return Status::Running;
    if (color_ == 0 && closed_ && !rejected_) {
      rejected_ = true;
      int k = ctx_->tree->k();
      std::vector<int> witness(k, -1);
      for (size_t i = 0; i + 1 < pairs_.size(); i += 2)
        witness[static_cast<int>(pairs_[i])] = static_cast<int>(pairs_[i + 1]);
      node.reject(witness);
    }
    return Status::Halt;
  }

  bool closed() const { return closed_; }

 private:
  const TreeContext* ctx_;
  int color_ = 0;
  uint16_t missing_ = 0;
  bool closed_ = false;
  std::vector<int64_t> pairs_;  // flattened (label, vertex) of the closed subtree
  bool rejected_ = false;
};

TreeContext make_context(const TreePattern& t) {
  TreeContext ctx;
  ctx.tree = &t;
  ctx.color_bits = ceil_log2(t.k());
  ctx.child_mask.assign(t.k(), 0);
  for (int x = 0; x < t.k(); x++)
    for (int c : t.children(x)) ctx.child_mask[x] |= static_cast<uint16_t>(1u << c);
  return ctx;
}

std::vector<TreeProgram*> attach_tree(Simulator& sim, const TreeContext* ctx) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  std::vector<TreeProgram*> raw;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) {
    auto p = std::make_unique<TreeProgram>(ctx);
    raw.push_back(p.get());
    programs.push_back(std::move(p));
  }
  sim.attach(std::move(programs));
  return raw;
}

}  // namespace

long long tree_attempt_budget(int k) {
  if (k < 2 || k > 8) throw ValidationError("tree must have between 2 and 8 nodes");
  long long kk = 1;
  for (int i = 0; i < k; i++) kk *= k;
  return 10 * kk;
}

TesterResult test_tree_freeness(const Graph& g, const TreePattern& t,
                                const TreeTestOptions& opt) {
  TreeContext ctx = make_context(t);
  long long budget =
      opt.attempts_override > 0 ? opt.attempts_override : tree_attempt_budget(t.k());

  Simulator sim(g);
  attach_tree(sim, &ctx);

  TesterResult res;
  res.paper_rounds = budget * t.depth();
  for (long long a = 0; a < budget; a++) {
    SimConfig cfg;
    cfg.global_seed = opt.seed;
    cfg.attempt = static_cast<uint64_t>(a);
    cfg.beta = opt.beta;
    cfg.max_rounds = t.depth();
    cfg.stop_on_reject = true;
    Transcript tr = sim.run(cfg);
    res.attempts++;
    res.sim_rounds += tr.rounds;
    res.max_bits_per_edge = std::max(res.max_bits_per_edge, tr.max_bits);
    if (tr.rejected()) {
      res.detections++;
      if (!res.reject) {
        res.reject = true;
        res.witness = tr.rejects[0].witness;
      }
      if (opt.stop_on_first_detection) break;
    }
  }
  return res;
}

TreeCheckRun run_check_tree(const Graph& g, const TreePattern& t,
                            const std::vector<int>& colors, int beta) {
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one color per node");
  for (int c : colors)
    if (c < 0 || c >= t.k()) throw ValidationError("color out of range [0,k)");
  TreeContext ctx = make_context(t);
  ctx.fixed_colors = &colors;

  Simulator sim(g);
  auto raw = attach_tree(sim, &ctx);
  SimConfig cfg;
  cfg.beta = beta;
  cfg.max_rounds = t.depth();
  cfg.stop_on_reject = false;
  TreeCheckRun out;
  out.transcript = sim.run(cfg);
  out.detected = out.transcript.rejected();
  out.detections = out.transcript.rejects;
  out.closed.resize(g.n());
  for (int v = 0; v < g.n(); v++) out.closed[v] = raw[v]->closed() ? 1 : 0;
  return out;
}

}  // namespace cpt
