#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cpt/graph.hpp"
#include "cpt/rng.hpp"

namespace cpt {

// One message on one edge in one round. The charged payload is a sequence of
// fixed-width fields; every pushed field declares its width in bits and the
// audit charges exactly those bits against the per-edge budget. `debug` is an
// uncharged side channel reserved for witness assembly and test
// instrumentation; protocol correctness must never depend on it.
class Message {
 public:
  static constexpr int kMaxFields = 12;

  void push(uint64_t value, int bits);
  int size() const { return count_; }
  uint64_t value(int i) const { return fields_[i].value; }
  int bits_of(int i) const { return fields_[i].bits; }
  int total_bits() const { return total_bits_; }
  bool has_payload() const { return count_ > 0 || !debug.empty(); }
  void clear() {
    count_ = 0;
    total_bits_ = 0;
    debug.clear();
  }

  std::vector<int64_t> debug;

 private:
  struct Field {
    uint64_t value;
    int bits;
  };
  std::array<Field, kMaxFields> fields_{};
  int count_ = 0;
  int total_bits_ = 0;
};

class Simulator;

// What a node sees and may do. In undirected mode a node knows its own id,
// the network size, its degree, and the id behind every port. In directed
// mode a node knows its in-arcs (with sender ids) and only the *number* of
// its out-arcs; it can send nothing but a uniform broadcast.
class Node {
 public:
  int id() const { return id_; }
  int n() const;
  bool directed() const;

  // undirected view
  int degree() const;
  int neighbor(int port) const;
  int port_of(int node_id) const;  // -1 if not a neighbor

  // directed view
  int in_degree() const;
  int in_neighbor(int port) const;
  int out_degree() const;

  Rng& rng();

  // Queue a message for this round. send() addresses one undirected port;
  // broadcast() sends a copy on every port (undirected) or on every out-arc
  // (directed). Sending twice over the same edge in one round is a protocol
  // bug and throws.
  void send(int port, const Message& msg);
  void broadcast(const Message& msg);

  void reject(std::span<const int> witness);

 private:
  friend class Simulator;
  Node(Simulator* sim, int id) : sim_(sim), id_(id) {}
  Simulator* sim_;
  int id_;
};

// Per-round lifecycle status reported by NodeProgram::decide. `Quiescent`
// promises the program will not send again unless it first receives a
// message; the engine stops early once every node is at least quiescent and
// a full round passes with no traffic. `Halt` is final: the node is not
// scheduled again for the rest of the run.
enum class Status { Running, Quiescent, Halt };

// A node-local protocol. One instance per node; the engine drives each round
// as compose (queue sends), receive (once per arriving message), decide.
// reset() begins a fresh attempt: the node's rng has just been reseeded from
// (global_seed, node, attempt) and all slots are empty.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual void reset(Node& node) = 0;
  virtual void compose(Node& node, long long round) = 0;
  virtual void receive(Node& node, long long round, int port, const Message& msg) = 0;
  virtual Status decide(Node& node, long long round) = 0;
};

struct SimConfig {
  uint64_t global_seed = 0;
  uint64_t attempt = 0;
  int beta = 8;  // per-edge per-round budget is beta * ceil_log2(n) bits
  long long max_rounds = 1'000'000;
  bool stop_on_reject = true;
};

struct RejectEvent {
  int node;
  long long round;
  std::vector<int> witness;
};

struct Transcript {
  long long rounds = 0;
  long long total_messages = 0;
  int max_bits = 0;  // largest charged message seen
  std::vector<int> per_round_max_bits;
  std::vector<RejectEvent> rejects;

  bool rejected() const { return !rejects.empty(); }
  std::string to_json() const;
};

// Synchronous message-passing engine over a fixed topology. Construct once
// per instance, attach one program per node, then run() any number of
// attempts; programs are reset, not reallocated, between attempts.
class Simulator {
 public:
  explicit Simulator(Graph g);
  explicit Simulator(DiGraph g);

  void attach(std::vector<std::unique_ptr<NodeProgram>> programs);

  int n() const { return n_; }
  bool directed() const { return directed_; }
  const Graph& graph() const;
  const DiGraph& digraph() const;
  int bandwidth_budget(int beta) const;  // beta * ceil_log2(n)

  Transcript run(const SimConfig& cfg);

 private:
  friend class Node;

  void send_on_arc(int arc, int from, const Message& msg);
  void record_reject(int node, std::span<const int> witness);

  // Topology. Every directed communication link is an "arc" with a message
  // slot. Undirected edges occupy two arcs, one per direction; arc ids are
  // then grouped by sender (adjacency order). In directed mode arc ids are
  // grouped by receiver, and out_arcs_ maps each sender to its arc ids.
  int n_ = 0;
  bool directed_ = false;
  Graph ug_;
  DiGraph dg_;
  std::vector<int> src_off_;
  std::vector<int> out_arcs_;  // directed mode only
  std::vector<int> arc_dst_, arc_dst_port_;

  std::vector<std::unique_ptr<NodeProgram>> programs_;
  std::vector<Rng> rngs_;
  std::vector<Message> slot_;
  std::vector<char> has_msg_;
  std::vector<int> touched_;
  std::vector<Status> status_;

  // live only inside run()
  Transcript* out_ = nullptr;
  long long round_ = 0;
  int budget_ = 0;
  int round_max_bits_ = 0;
  bool sends_open_ = false;
};

using ProgramFactory = std::function<std::unique_ptr<NodeProgram>(int node)>;

Transcript run_protocol(const Graph& g, const ProgramFactory& make, const SimConfig& cfg);
Transcript run_protocol(const DiGraph& g, const ProgramFactory& make, const SimConfig& cfg);

}  // namespace cpt
