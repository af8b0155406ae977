#include "cpt/tester_cliques.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <string>

#include "cpt/errors.hpp"
#include "cpt/oracle.hpp"

namespace cpt {

namespace {

double e_squared() { return std::exp(2.0); }

long long ceil_to_ll(double x) {
  double c = std::ceil(x);
  if (!(c < 9.0e18)) throw ValidationError("round budget overflows");
  return static_cast<long long>(c);
}

void check_eps(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("eps must be in (0,1]");
}

void check_s(int s, int lo) {
  if (s < lo || s > 8)
    throw ValidationError("clique order must be in [" + std::to_string(lo) + ",8]");
}

double pow4(int s) { return static_cast<double>(s) * s * s * s; }

}  // namespace

double good_vertex_threshold(long long m, const Pattern& h, double eps) {
  check_eps(eps);
  if (m < 1) throw ValidationError("edge count must be positive");
  return std::sqrt(2.0 * static_cast<double>(m) * h.edge_count() / eps);
}

long long count_good_disjoint_copies_lb(const Graph& g, const Pattern& h, double eps) {
  if (g.m() == 0) return 0;
  double threshold = good_vertex_threshold(g.m(), h, eps);
  std::set<Edge> used;
  long long count = 0;
  for (const auto& copy : oracle::enumerate_copies(g, h)) {
    bool cheap = false;
    for (const Edge& e : copy)
      if (g.degree(e.first) <= threshold || g.degree(e.second) <= threshold) {
        cheap = true;
        break;
      }
    if (!cheap) continue;
    bool disjoint = true;
    for (const Edge& e : copy)
      if (used.count(e)) {
        disjoint = false;
        break;
      }
    if (!disjoint) continue;
    used.insert(copy.begin(), copy.end());
    count++;
  }
  return count;
}

long long triangle_classes(int degree) {
  if (degree < 0) throw ValidationError("degree must be nonnegative");
  return (degree + 199) / 200;
}

long long triangle_round_budget() { return ceil_to_ll(202.0 * e_squared()); }

long long ks_classes(int s, double eps, long long m) {
  check_s(s, 4);
  check_eps(eps);
  if (m < 1) throw ValidationError("edge count must be positive");
  double base = eps * static_cast<double>(m) / (2.0 * pow4(s));
  return std::max<long long>(1, ceil_to_ll(std::pow(base, 1.0 / (s - 2))));
}

long long ks_round_budget(int s, double eps, long long m) {
  check_s(s, 4);
  check_eps(eps);
  if (m < 1) throw ValidationError("edge count must be positive");
  double ex = 0.5 - 1.0 / (s - 2);
  double inner = std::pow(eps, -0.5 - 1.0 / (s - 2)) * std::pow(static_cast<double>(m), ex) +
                 (s - 1);
  return ceil_to_ll(2.0 * pow4(s) * e_squared() * inner);
}

long long bounded_degree_classes(int degree, int s, double alpha) {
  check_s(s, 3);
  if (degree < 0) throw ValidationError("degree must be nonnegative");
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return ceil_to_ll(degree / std::pow(2.0 * alpha, s - 2));
}

long long bounded_degree_round_budget(int s, double alpha) {
  check_s(s, 3);
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return ceil_to_ll(e_squared() * (std::pow(2.0 * alpha, s - 2) + (s - 1)));
}

double bounded_degree_cap(int s, double alpha, double eps, long long m) {
  check_s(s, 3);
  check_eps(eps);
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return std::pow(alpha * eps * static_cast<double>(m), 1.0 / (s - 2));
}

std::vector<int> draw_neighbor_classes(int degree, long long classes, Rng& rng) {
  if (degree < 0) throw ValidationError("degree must be nonnegative");
  if (degree > 0 && classes < 1) throw ValidationError("need at least one class");
  std::vector<int> out(degree);
  for (int& c : out) c = static_cast<int>(rng.below(static_cast<uint64_t>(classes)));
  return out;
}

namespace {

struct ScanContext {
  int s = 3;               // clique order to detect
  long long budget = 1;    // scan rounds before giving up
  int id_bits = 1;
  std::function<long long(int)> classes_of;                     // degree -> C(u)
  const std::vector<std::vector<int>>* fixed_colors = nullptr;  // white-box runs
};

// One node of the class scan. Even simulator rounds carry candidate ids,
// odd rounds carry the adjacency bits back; scan round r is the pair
// (2r, 2r+1). Nodes go quiescent once every class is exhausted, so the
// engine can cut runs short when the whole network is done early.
class ScanProgram : public NodeProgram {
 public:
  explicit ScanProgram(const ScanContext* ctx) : ctx_(ctx) {}

  void reset(Node& node) override {
    int d = node.degree();
    long long classes = 0;
    if (ctx_->fixed_colors) {
      color_ = (*ctx_->fixed_colors)[node.id()];
      for (int c : color_) classes = std::max(classes, static_cast<long long>(c) + 1);
    } else {
      classes = d > 0 ? std::max<long long>(1, ctx_->classes_of(d)) : 0;
      color_ = draw_neighbor_classes(d, classes, node.rng());
    }
    members_.assign(classes, {});
    for (int p = 0; p < d; p++) members_[color_[p]].push_back(p);
    slot_.assign(d, -1);
    for (const auto& mem : members_)
      for (size_t i = 0; i < mem.size(); i++) slot_[mem[i]] = static_cast<int>(i);
    adj_.assign(classes, {});
    for (long long c = 0; c < classes; c++)
      adj_[c].assign(members_[c].size() * members_[c].size(), 0);
    cursor_.assign(classes, 0);
    last_cand_.assign(classes, -1);
    reply_.assign(d, -1);
  }

  void compose(Node& node, long long round) override {
    if (round & 1) {
      for (int p = 0; p < static_cast<int>(reply_.size()); p++)
        if (reply_[p] >= 0) {
          Message m;
          m.push(static_cast<uint64_t>(reply_[p]), 1);
          node.send(p, m);
          reply_[p] = -1;
        }
      return;
    }
    if (round / 2 >= ctx_->budget) return;
    for (size_t c = 0; c < members_.size(); c++) {
      last_cand_[c] = -1;
      if (cursor_[c] >= static_cast<long long>(members_[c].size())) continue;
      int cand_port = members_[c][cursor_[c]++];
      last_cand_[c] = slot_[cand_port];
      Message m;
      m.push(static_cast<uint64_t>(node.neighbor(cand_port)), ctx_->id_bits);
      for (int p : members_[c]) node.send(p, m);
    }
  }

  void receive(Node& node, long long round, int port, const Message& msg) override {
    if ((round & 1) == 0) {
      // A neighbor asks whether its candidate is adjacent to us.
      reply_[port] = node.port_of(static_cast<int>(msg.value(0))) >= 0 ? 1 : 0;
      return;
    }
    int c = color_[port];
    int a = last_cand_[c];
    int b = slot_[port];
    if (a < 0 || a == b || msg.value(0) == 0) return;
    size_t t = members_[c].size();
    adj_[c][a * t + b] = adj_[c][b * t + a] = 1;
    // A clique can only become complete through its newest edge.
    std::vector<int> group{std::min(a, b), std::max(a, b)};
    if (!extend(c, group, ctx_->s - 3, 0)) return;
    std::vector<int> witness{node.id()};
    for (int sl : group) witness.push_back(node.neighbor(members_[c][sl]));
    std::sort(witness.begin(), witness.end());
    node.reject(witness);
  }

  Status decide(Node& node, long long round) override {
    (void)node;
    if (round & 1) {
      if (round / 2 + 1 >= ctx_->budget) return Status::Halt;
      return more_to_announce() ? Status::Running : Status::Quiescent;
    }
    if (more_to_announce()) return Status::Running;
    for (int r : reply_)
      if (r >= 0) return Status::Running;
    return Status::Quiescent;
  }

  // Inspection hooks for white-box tests.
  const std::vector<int>& port_colors() const { return color_; }
  long long class_count() const { return static_cast<long long>(members_.size()); }

 private:
  bool more_to_announce() const {
    for (size_t c = 0; c < members_.size(); c++)
      if (cursor_[c] < static_cast<long long>(members_[c].size())) return true;
    return false;
  }

  // Grow `group` by `need` class members known-adjacent to all chosen ones.
  bool extend(int c, std::vector<int>& group, int need, int start) {
    if (need == 0) return true;
    size_t t = members_[c].size();
    for (int x = start; x < static_cast<int>(t); x++) {
      bool ok = true;
      for (int y : group)
        if (y == x || !adj_[c][static_cast<size_t>(x) * t + y]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      group.push_back(x);
      if (extend(c, group, need - 1, x + 1)) return true;
      group.pop_back();
    }
    return false;
  }

  const ScanContext* ctx_;
  std::vector<int> color_;                 // class of each port
  std::vector<std::vector<int>> members_;  // ports per class, ascending
  std::vector<int> slot_;                  // position of a port inside its class
  std::vector<std::vector<uint8_t>> adj_;  // learned adjacency per class
  std::vector<long long> cursor_;          // next candidate index per class
  std::vector<int> last_cand_;             // slot announced this scan round
  std::vector<int> reply_;                 // adjacency bit owed per port
};

void accumulate_scan(TesterResult& res, const Graph& g, const ScanContext& ctx,
                     const CliqueOptions& opt, uint64_t attempt) {
  SimConfig cfg;
  cfg.global_seed = opt.seed;
  cfg.attempt = attempt;
  cfg.beta = opt.beta;
  // Classes never outlast the largest degree, so the engine is idle long
  // before a large nominal budget runs out.
  cfg.max_rounds = 2 * std::min<long long>(ctx.budget, g.n() + 1) + 4;
  cfg.stop_on_reject = opt.stop_on_first_detection;
  Transcript t = run_protocol(
      g, [&](int) { return std::make_unique<ScanProgram>(&ctx); }, cfg);
  res.attempts++;
  if (t.rejected()) {
    res.detections++;
    if (!res.reject) {
      res.reject = true;
      res.witness = t.rejects.front().witness;
    }
  }
  res.sim_rounds += t.rounds;
  res.paper_rounds += ctx.budget;
  res.max_bits_per_edge = std::max(res.max_bits_per_edge, t.max_bits);
}

int id_bits_for(const Graph& g) { return std::max(1, ceil_log2(g.n())); }

}  // namespace

TesterResult test_triangle_freeness(const Graph& g, const CliqueOptions& opt) {
  ScanContext ctx;
  ctx.s = 3;
  ctx.budget = triangle_round_budget();
  ctx.id_bits = id_bits_for(g);
  ctx.classes_of = [](int d) { return triangle_classes(d); };
  TesterResult res;
  accumulate_scan(res, g, ctx, opt, 0);
  return res;
}

TesterResult test_ks_freeness(const Graph& g, int s, double eps,
                              std::optional<long long> m_estimate,
                              const CliqueOptions& opt) {
  check_s(s, 4);
  check_eps(eps);
  long long m = m_estimate ? *m_estimate : std::max<long long>(1, g.m());
  if (m < 1) throw ValidationError("edge-count estimate must be positive");
  ScanContext ctx;
  ctx.s = s;
  ctx.budget = ks_round_budget(s, eps, m);
  ctx.id_bits = id_bits_for(g);
  ctx.classes_of = [s, eps, m](int) { return ks_classes(s, eps, m); };
  TesterResult res;
  accumulate_scan(res, g, ctx, opt, 0);
  return res;
}

TesterResult test_ks_freeness_guessing(const Graph& g, int s, double eps,
                                       const CliqueOptions& opt) {
  check_s(s, 4);
  check_eps(eps);
  if (g.n() < 1) throw ValidationError("graph must have at least one vertex");
  long long n = g.n();
  std::vector<long long> guesses;
  for (long long v = n;; v *= 2) {
    guesses.push_back(std::min(v, n * n));
    if (v >= n * n) break;
  }
  TesterResult res;
  for (size_t i = 0; i < guesses.size(); i++) {
    ScanContext ctx;
    ctx.s = s;
    ctx.budget = ks_round_budget(s, eps, guesses[i]);
    ctx.id_bits = id_bits_for(g);
    long long m = guesses[i];
    ctx.classes_of = [s, eps, m](int) { return ks_classes(s, eps, m); };
    accumulate_scan(res, g, ctx, opt, i);
    if (res.reject && opt.stop_on_first_detection) break;
  }
  return res;
}

TesterResult test_ks_bounded_degree(const Graph& g, int s, double alpha, double eps,
                                    const CliqueOptions& opt) {
  check_s(s, 3);
  check_eps(eps);
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  double cap = bounded_degree_cap(s, alpha, eps, g.m());
  int delta = g.max_degree();
  if (delta > cap + 1e-9)
    throw ValidationError("max degree " + std::to_string(delta) +
                          " exceeds the bounded-degree cap (alpha*eps*m)^(1/(s-2)) = " +
                          std::to_string(cap));
  ScanContext ctx;
  ctx.s = s;
  ctx.budget = bounded_degree_round_budget(s, alpha);
  ctx.id_bits = id_bits_for(g);
  ctx.classes_of = [s, alpha](int d) { return bounded_degree_classes(d, s, alpha); };
  TesterResult res;
  accumulate_scan(res, g, ctx, opt, 0);
  return res;
}

CliqueScanRun run_clique_scan(const Graph& g, int s, long long round_budget,
                              const std::vector<std::vector<int>>& colors, int beta) {
  check_s(s, 3);
  if (round_budget < 1) throw ValidationError("round budget must be positive");
  if (static_cast<int>(colors.size()) != g.n())
    throw ValidationError("need one class list per node");
  for (int v = 0; v < g.n(); v++) {
    if (static_cast<int>(colors[v].size()) != g.degree(v))
      throw ValidationError("need one class per port at node " + std::to_string(v));
    for (int c : colors[v])
      if (c < 0) throw ValidationError("classes must be nonnegative");
  }
  ScanContext ctx;
  ctx.s = s;
  ctx.budget = round_budget;
  ctx.id_bits = id_bits_for(g);
  ctx.fixed_colors = &colors;
  SimConfig cfg;
  cfg.max_rounds = 2 * std::min<long long>(round_budget, g.n() + 1) + 4;
  cfg.stop_on_reject = false;
  cfg.beta = beta;
  CliqueScanRun out;
  out.transcript = run_protocol(
      g, [&](int) { return std::make_unique<ScanProgram>(&ctx); }, cfg);
  out.detected = out.transcript.rejected();
  out.detections = out.transcript.rejects;
  return out;
}

}  // namespace cpt
