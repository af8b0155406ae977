#include "cpt/sim.hpp"

#include <algorithm>

#include <json.hpp>

#include "cpt/errors.hpp"

namespace cpt {

void Message::push(uint64_t value, int bits) {
  if (bits < 1 || bits > 64) throw ValidationError("message field width must be 1..64 bits");
  if (bits < 64 && value >> bits)
    throw ValidationError("message field value does not fit in its declared width");
  if (count_ == kMaxFields) throw ValidationError("message has too many fields");
  fields_[count_++] = {value, bits};
  total_bits_ += bits;
}

int Node::n() const { return sim_->n_; }
bool Node::directed() const { return sim_->directed_; }

int Node::degree() const {
  if (sim_->directed_) throw ValidationError("degree(): directed node, use in/out variants");
  return sim_->ug_.degree(id_);
}

int Node::neighbor(int port) const {
  if (sim_->directed_) throw ValidationError("neighbor(): directed node, use in_neighbor");
  auto nb = sim_->ug_.neighbors(id_);
  if (port < 0 || port >= static_cast<int>(nb.size()))
    throw ValidationError("neighbor(): port out of range");
  return nb[port];
}

int Node::port_of(int node_id) const {
  if (sim_->directed_) throw ValidationError("port_of(): directed node");
  auto nb = sim_->ug_.neighbors(id_);
  auto it = std::lower_bound(nb.begin(), nb.end(), node_id);
  if (it == nb.end() || *it != node_id) return -1;
  return static_cast<int>(it - nb.begin());
}

int Node::in_degree() const {
  if (!sim_->directed_) throw ValidationError("in_degree(): undirected node, use degree");
  return sim_->dg_.in_degree(id_);
}

int Node::in_neighbor(int port) const {
  if (!sim_->directed_) throw ValidationError("in_neighbor(): undirected node, use neighbor");
  auto nb = sim_->dg_.in_neighbors(id_);
  if (port < 0 || port >= static_cast<int>(nb.size()))
    throw ValidationError("in_neighbor(): port out of range");
  return nb[port];
}

int Node::out_degree() const {
  if (!sim_->directed_) throw ValidationError("out_degree(): undirected node, use degree");
  return sim_->dg_.out_degree(id_);
}

Rng& Node::rng() { return sim_->rngs_[id_]; }

void Node::send(int port, const Message& msg) {
  if (sim_->directed_)
    throw ValidationError("directed nodes cannot address ports; use broadcast");
  if (port < 0 || port >= sim_->ug_.degree(id_))
    throw ValidationError("send(): port out of range");
  sim_->send_on_arc(sim_->src_off_[id_] + port, id_, msg);
}

void Node::broadcast(const Message& msg) {
  if (sim_->directed_) {
    for (int j = sim_->src_off_[id_]; j < sim_->src_off_[id_ + 1]; j++)
      sim_->send_on_arc(sim_->out_arcs_[j], id_, msg);
  } else {
    for (int j = sim_->src_off_[id_]; j < sim_->src_off_[id_ + 1]; j++)
      sim_->send_on_arc(j, id_, msg);
  }
}

void Node::reject(std::span<const int> witness) { sim_->record_reject(id_, witness); }

Simulator::Simulator(Graph g) : n_(g.n()), directed_(false), ug_(std::move(g)) {
  src_off_.assign(n_ + 1, 0);
  for (int v = 0; v < n_; v++) src_off_[v + 1] = src_off_[v] + ug_.degree(v);
  int arcs = src_off_[n_];
  arc_dst_.resize(arcs);
  arc_dst_port_.resize(arcs);
  for (int v = 0; v < n_; v++) {
    auto nb = ug_.neighbors(v);
    for (int p = 0; p < static_cast<int>(nb.size()); p++) {
      int a = src_off_[v] + p;
      int w = nb[p];
      arc_dst_[a] = w;
      auto wnb = ug_.neighbors(w);
      arc_dst_port_[a] =
          static_cast<int>(std::lower_bound(wnb.begin(), wnb.end(), v) - wnb.begin());
    }
  }
  slot_.resize(arcs);
  has_msg_.assign(arcs, 0);
  rngs_.resize(n_);
  status_.resize(n_, Status::Running);
}

Simulator::Simulator(DiGraph g) : n_(g.n()), directed_(true), dg_(std::move(g)) {
  // Arc ids grouped by receiver: in-neighbor lists laid out consecutively.
  std::vector<int> in_off(n_ + 1, 0);
  for (int v = 0; v < n_; v++) in_off[v + 1] = in_off[v] + dg_.in_degree(v);
  int arcs = in_off[n_];
  arc_dst_.resize(arcs);
  arc_dst_port_.resize(arcs);
  src_off_.assign(n_ + 1, 0);
  for (int v = 0; v < n_; v++) src_off_[v + 1] = src_off_[v] + dg_.out_degree(v);
  out_arcs_.resize(arcs);
  std::vector<int> cursor(src_off_.begin(), src_off_.end() - 1);
  for (int w = 0; w < n_; w++) {
    auto nb = dg_.in_neighbors(w);
    for (int p = 0; p < static_cast<int>(nb.size()); p++) {
      int a = in_off[w] + p;
      arc_dst_[a] = w;
      arc_dst_port_[a] = p;
      out_arcs_[cursor[nb[p]]++] = a;
    }
  }
  slot_.resize(arcs);
  has_msg_.assign(arcs, 0);
  rngs_.resize(n_);
  status_.resize(n_, Status::Running);
}

void Simulator::attach(std::vector<std::unique_ptr<NodeProgram>> programs) {
  if (static_cast<int>(programs.size()) != n_)
    throw ValidationError("attach(): need exactly one program per node");
  for (const auto& p : programs)
    if (!p) throw ValidationError("attach(): null program");
  programs_ = std::move(programs);
}

const Graph& Simulator::graph() const {
  if (directed_) throw ValidationError("graph(): simulator is directed");
  return ug_;
}

const DiGraph& Simulator::digraph() const {
  if (!directed_) throw ValidationError("digraph(): simulator is undirected");
  return dg_;
}

int Simulator::bandwidth_budget(int beta) const { return beta * ceil_log2(n_); }

void Simulator::send_on_arc(int arc, int from, const Message& msg) {
  if (!sends_open_)
    throw ValidationError("node " + std::to_string(from) +
                          " tried to send outside the compose phase");
  int bits = msg.total_bits();
  if (bits > budget_)
    throw BandwidthError(from, arc_dst_[arc], static_cast<int>(round_), bits, budget_);
  if (has_msg_[arc])
    throw ValidationError("node " + std::to_string(from) +
                          " sent twice over one link in round " + std::to_string(round_));
  has_msg_[arc] = 1;
  slot_[arc] = msg;
  touched_.push_back(arc);
  out_->total_messages++;
  out_->max_bits = std::max(out_->max_bits, bits);
  round_max_bits_ = std::max(round_max_bits_, bits);
}

void Simulator::record_reject(int node, std::span<const int> witness) {
  out_->rejects.push_back({node, round_, {witness.begin(), witness.end()}});
}

Transcript Simulator::run(const SimConfig& cfg) {
  if (programs_.empty()) throw ValidationError("run(): no programs attached");
  if (cfg.beta < 1) throw ValidationError("run(): beta must be positive");
  if (cfg.max_rounds < 1) throw ValidationError("run(): max_rounds must be positive");

  Transcript t;
  out_ = &t;
  budget_ = bandwidth_budget(cfg.beta);
  round_ = 0;
  // clear leftovers in case a previous run threw mid-round
  for (int a : touched_) {
    slot_[a].clear();
    has_msg_[a] = 0;
  }
  touched_.clear();

  for (int v = 0; v < n_; v++) {
    rngs_[v].reseed(derive_node_seed(cfg.global_seed, static_cast<uint64_t>(v), cfg.attempt));
    status_[v] = Status::Running;
  }
  sends_open_ = false;
  for (int v = 0; v < n_; v++) {
    Node nd(this, v);
    programs_[v]->reset(nd);
  }

  std::vector<int> pending;
  for (round_ = 0;; round_++) {
    if (round_ >= cfg.max_rounds) {
      out_ = nullptr;
      throw RoundLimitError(cfg.max_rounds);
    }
    round_max_bits_ = 0;
    sends_open_ = true;
    for (int v = 0; v < n_; v++)
      if (status_[v] != Status::Halt) {
        Node nd(this, v);
        programs_[v]->compose(nd, round_);
      }
    sends_open_ = false;

    long long delivered = static_cast<long long>(touched_.size());
    pending.swap(touched_);
    for (int a : pending) {
      int dst = arc_dst_[a];
      if (status_[dst] != Status::Halt) {
        Node nd(this, dst);
        programs_[dst]->receive(nd, round_, arc_dst_port_[a], slot_[a]);
      }
      slot_[a].clear();
      has_msg_[a] = 0;
    }
    pending.clear();

    bool all_halt = true, any_running = false;
    for (int v = 0; v < n_; v++) {
      if (status_[v] == Status::Halt) continue;
      Node nd(this, v);
      status_[v] = programs_[v]->decide(nd, round_);
      if (status_[v] != Status::Halt) all_halt = false;
      if (status_[v] == Status::Running) any_running = true;
    }

    t.rounds = round_ + 1;
    t.per_round_max_bits.push_back(round_max_bits_);
    if (cfg.stop_on_reject && t.rejected()) break;
    if (all_halt) break;
    // Every node is at least quiescent and the network carried nothing this
    // round, so by the quiescence contract no node will ever send again.
    if (!any_running && delivered == 0) break;
  }
  out_ = nullptr;
  return t;
}

std::string Transcript::to_json() const {
  nlohmann::json j;
  j["rounds"] = rounds;
  j["total_messages"] = total_messages;
  j["max_bits"] = max_bits;
  j["per_round_max_bits"] = per_round_max_bits;
  j["verdict"] = rejected() ? "reject" : "accept";
  auto arr = nlohmann::json::array();
  for (const auto& r : rejects)
    arr.push_back({{"node", r.node}, {"round", r.round}, {"witness", r.witness}});
  j["rejects"] = arr;
  return j.dump(2);
}

namespace {

Transcript run_attached(Simulator& sim, const ProgramFactory& make, const SimConfig& cfg) {
  std::vector<std::unique_ptr<NodeProgram>> programs;
  programs.reserve(sim.n());
  for (int v = 0; v < sim.n(); v++) programs.push_back(make(v));
  sim.attach(std::move(programs));
  return sim.run(cfg);
}

}  // namespace

Transcript run_protocol(const Graph& g, const ProgramFactory& make, const SimConfig& cfg) {
  Simulator sim(g);
  return run_attached(sim, make, cfg);
}

Transcript run_protocol(const DiGraph& g, const ProgramFactory& make, const SimConfig& cfg) {
  Simulator sim(g);
  return run_attached(sim, make, cfg);
}

}  // namespace cpt
