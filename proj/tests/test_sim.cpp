#include <doctest.h>

#include <json.hpp>
#include <memory>
#include <unordered_set>
#include <vector>

#include "cpt/errors.hpp"
#include "cpt/graph.hpp"
#include "cpt/rng.hpp"
#include "cpt/sim.hpp"

using namespace cpt;

namespace {

// Broadcasts own id once, records everything heard, halts after one round.
struct IdExchange : NodeProgram {
  std::vector<std::pair<int, uint64_t>> heard;  // (port, id)
  void reset(Node&) override { heard.clear(); }
  void compose(Node& node, long long round) override {
    if (round > 0) return;
    Message m;
    m.push(static_cast<uint64_t>(node.id()), ceil_log2(node.n()));
    node.broadcast(m);
  }
  void receive(Node&, long long, int port, const Message& msg) override {
    heard.emplace_back(port, msg.value(0));
  }
  Status decide(Node&, long long) override { return Status::Halt; }
};

// Floods a token that starts at node 0; rejects upon first receipt.
struct TokenFlood : NodeProgram {
  bool have = false, sent = false;
  void reset(Node& node) override {
    have = node.id() == 0;
    sent = false;
  }
  void compose(Node& node, long long) override {
    if (!have || sent) return;
    Message m;
    m.push(1, 1);
    node.broadcast(m);
    sent = true;
  }
  void receive(Node& node, long long, int, const Message&) override {
    if (!have && node.id() != 0) {
      int w[] = {node.id()};
      node.reject(w);
    }
    have = true;
  }
  Status decide(Node&, long long) override { return have && sent ? Status::Quiescent : Status::Running; }
};

struct Spammer : NodeProgram {
  void reset(Node&) override {}
  void compose(Node& node, long long) override {
    Message m;
    m.push(0, 1);
    node.broadcast(m);
  }
  void receive(Node&, long long, int, const Message&) override {}
  Status decide(Node&, long long) override { return Status::Running; }
};

template <class P>
ProgramFactory factory_of() {
  return [](int) { return std::make_unique<P>(); };
}

}  // namespace

TEST_CASE("two nodes exchange ids in one round") {
  Graph g(2, {{0, 1}});
  Simulator sim(g);
  std::vector<std::unique_ptr<NodeProgram>> ps;
  std::vector<IdExchange*> raw;
  for (int v = 0; v < 2; v++) {
    auto p = std::make_unique<IdExchange>();
    raw.push_back(p.get());
    ps.push_back(std::move(p));
  }
  sim.attach(std::move(ps));
  Transcript t = sim.run({});
  CHECK(t.rounds == 1);
  CHECK(t.total_messages == 2);
  CHECK(t.max_bits == 1);  // ceil_log2(2) == 1
  REQUIRE(raw[0]->heard.size() == 1);
  CHECK(raw[0]->heard[0] == std::pair<int, uint64_t>{0, 1});
  REQUIRE(raw[1]->heard.size() == 1);
  CHECK(raw[1]->heard[0] == std::pair<int, uint64_t>{0, 0});
  CHECK_FALSE(t.rejected());
}

TEST_CASE("information travels one hop per round") {
  // path 0-1-2-3-4; the token reaches node i during round i-1
  Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  SimConfig cfg;
  cfg.stop_on_reject = false;
  Transcript t = run_protocol(g, factory_of<TokenFlood>(), cfg);
  REQUIRE(t.rejects.size() == 4);
  for (const auto& r : t.rejects) {
    CHECK(r.round == r.node - 1);
    REQUIRE(r.witness.size() == 1);
    CHECK(r.witness[0] == r.node);
  }
  CHECK(t.rounds == 6);  // 5 active rounds + 1 silent round proving quiescence
}

TEST_CASE("stop_on_reject halts at the first rejection") {
  Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  SimConfig cfg;  // stop_on_reject defaults to true
  Transcript t = run_protocol(g, factory_of<TokenFlood>(), cfg);
  CHECK(t.rejects.size() == 1);
  CHECK(t.rejects[0].node == 1);
  CHECK(t.rounds == 1);
}

TEST_CASE("identical configs replay bit-identically; attempts get fresh randomness") {
  Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}});
  struct RandomTalker : NodeProgram {
    uint64_t word = 0;
    void reset(Node& node) override { word = node.rng().below(1u << 16); }
    void compose(Node& node, long long round) override {
      if (round >= 3) return;
      Message m;
      m.push(word & 0xFFFF, 16);
      node.broadcast(m);
    }
    void receive(Node&, long long, int, const Message& msg) override { word ^= msg.value(0); }
    Status decide(Node&, long long round) override {
      return round >= 3 ? Status::Quiescent : Status::Running;
    }
  };
  Simulator sim(g);
  std::vector<std::unique_ptr<NodeProgram>> ps;
  std::vector<RandomTalker*> raw;
  for (int v = 0; v < 6; v++) {
    auto p = std::make_unique<RandomTalker>();
    raw.push_back(p.get());
    ps.push_back(std::move(p));
  }
  sim.attach(std::move(ps));
  auto words = [&] {
    std::vector<uint64_t> w;
    for (auto* p : raw) w.push_back(p->word);
    return w;
  };
  SimConfig cfg;
  cfg.global_seed = 777;
  cfg.attempt = 3;
  Transcript a = sim.run(cfg);
  auto wa = words();
  Transcript b = sim.run(cfg);  // same programs, reset not reallocated
  CHECK(a.to_json() == b.to_json());
  CHECK(words() == wa);
  cfg.attempt = 4;
  sim.run(cfg);
  CHECK(words() != wa);  // per-attempt reseeding actually changes the draws
}

TEST_CASE("bandwidth budget is enforced per edge per round") {
  // n = 16: ceil_log2 = 4, so beta=8 gives a 32-bit budget
  std::vector<Edge> star;
  for (int i = 1; i < 16; i++) star.emplace_back(0, i);
  Graph g(16, star);
  struct Fat : NodeProgram {
    int width;
    explicit Fat(int w) : width(w) {}
    void reset(Node&) override {}
    void compose(Node& node, long long round) override {
      if (round > 0 || node.id() != 0) return;
      Message m;
      m.push(0, width);
      node.broadcast(m);
    }
    void receive(Node&, long long, int, const Message&) override {}
    Status decide(Node&, long long) override { return Status::Quiescent; }
  };
  auto mk = [](int w) { return [w](int) { return std::make_unique<Fat>(w); }; };
  CHECK_NOTHROW(run_protocol(g, mk(32), {}));
  CHECK_THROWS_AS(run_protocol(g, mk(33), {}), BandwidthError);
  try {
    run_protocol(g, mk(33), {});
  } catch (const BandwidthError& e) {
    CHECK(e.from == 0);
    CHECK(e.round == 0);
    CHECK(e.bits == 33);
    CHECK(e.budget == 32);
  }
  SimConfig tight;
  tight.beta = 1;  // 4-bit budget
  CHECK_THROWS_AS(run_protocol(g, mk(5), tight), BandwidthError);
  CHECK_NOTHROW(run_protocol(g, mk(4), tight));
}

TEST_CASE("message field validation") {
  Message m;
  CHECK_THROWS_AS(m.push(0, 0), ValidationError);
  CHECK_THROWS_AS(m.push(0, 65), ValidationError);
  CHECK_THROWS_AS(m.push(4, 2), ValidationError);  // 4 needs 3 bits
  m.push(3, 2);
  m.push(~0ULL, 64);
  CHECK(m.total_bits() == 66);
  CHECK(m.size() == 2);
  CHECK(m.value(1) == ~0ULL);
  for (int i = 2; i < Message::kMaxFields; i++) m.push(0, 1);
  CHECK_THROWS_AS(m.push(0, 1), ValidationError);
  m.clear();
  CHECK(m.total_bits() == 0);
  CHECK_FALSE(m.has_payload());
}

TEST_CASE("runaway protocols hit the round limit") {
  Graph g(2, {{0, 1}});
  SimConfig cfg;
  cfg.max_rounds = 10;
  CHECK_THROWS_AS(run_protocol(g, factory_of<Spammer>(), cfg), RoundLimitError);
}

TEST_CASE("sending twice over one link in a round is a protocol bug") {
  Graph g(2, {{0, 1}});
  struct DoubleSend : NodeProgram {
    void reset(Node&) override {}
    void compose(Node& node, long long) override {
      Message m;
      m.push(0, 1);
      node.send(0, m);
      node.send(0, m);
    }
    void receive(Node&, long long, int, const Message&) override {}
    Status decide(Node&, long long) override { return Status::Halt; }
  };
  CHECK_THROWS_AS(run_protocol(g, factory_of<DoubleSend>(), {}), ValidationError);
}

TEST_CASE("sends are only legal during compose") {
  Graph g(2, {{0, 1}});
  struct ReplyInReceive : NodeProgram {
    void reset(Node&) override {}
    void compose(Node& node, long long round) override {
      if (round == 0 && node.id() == 0) {
        Message m;
        m.push(0, 1);
        node.broadcast(m);
      }
    }
    void receive(Node& node, long long, int, const Message&) override {
      Message m;
      m.push(1, 1);
      node.broadcast(m);  // illegal: replies must wait for the next compose
    }
    Status decide(Node&, long long) override { return Status::Quiescent; }
  };
  CHECK_THROWS_AS(run_protocol(g, factory_of<ReplyInReceive>(), {}), ValidationError);
}

TEST_CASE("directed mode: broadcast-only sending, in-arc knowledge") {
  // 0 -> 1, 0 -> 2, 2 -> 1
  DiGraph g(3, {{0, 1}, {0, 2}, {2, 1}});
  struct DirProbe : NodeProgram {
    std::vector<int> senders;
    void reset(Node& node) override {
      senders.clear();
      if (node.id() == 1) {
        CHECK(node.in_degree() == 2);
        CHECK(node.in_neighbor(0) == 0);
        CHECK(node.in_neighbor(1) == 2);
        CHECK(node.out_degree() == 0);
        CHECK_THROWS_AS(node.degree(), ValidationError);
        CHECK_THROWS_AS(node.neighbor(0), ValidationError);
      }
    }
    void compose(Node& node, long long round) override {
      if (round == 0) {
        Message m;
        m.push(static_cast<uint64_t>(node.id()), 2);
        node.broadcast(m);
      }
    }
    void receive(Node& node, long long, int port, const Message& msg) override {
      CHECK(static_cast<uint64_t>(node.in_neighbor(port)) == msg.value(0));
      senders.push_back(static_cast<int>(msg.value(0)));
    }
    Status decide(Node&, long long) override { return Status::Quiescent; }
  };
  Simulator sim(g);
  std::vector<std::unique_ptr<NodeProgram>> ps;
  std::vector<DirProbe*> raw;
  for (int v = 0; v < 3; v++) {
    auto p = std::make_unique<DirProbe>();
    raw.push_back(p.get());
    ps.push_back(std::move(p));
  }
  sim.attach(std::move(ps));
  Transcript t = sim.run({});
  CHECK(t.total_messages == 3);
  CHECK(raw[0]->senders.empty());
  CHECK(raw[1]->senders == std::vector<int>{0, 2});
  CHECK(raw[2]->senders == std::vector<int>{0});

  struct PortSender : NodeProgram {
    void reset(Node&) override {}
    void compose(Node& node, long long) override {
      Message m;
      m.push(0, 1);
      node.send(0, m);
    }
    void receive(Node&, long long, int, const Message&) override {}
    Status decide(Node&, long long) override { return Status::Halt; }
  };
  CHECK_THROWS_AS(run_protocol(g, factory_of<PortSender>(), {}), ValidationError);
}

TEST_CASE("transcript json is well formed") {
  Graph g(3, {{0, 1}, {1, 2}});
  SimConfig cfg;
  cfg.stop_on_reject = false;
  Transcript t = run_protocol(g, factory_of<TokenFlood>(), cfg);
  auto j = nlohmann::json::parse(t.to_json());
  CHECK(j["rounds"] == t.rounds);
  CHECK(j["verdict"] == "reject");
  CHECK(j["max_bits"] == 1);
  CHECK(j["rejects"].size() == 2);
  CHECK(j["rejects"][0]["node"] == 1);
  CHECK(j["per_round_max_bits"].size() == static_cast<size_t>(t.rounds));
}

TEST_CASE("node seed derivation has no collisions at desk scale") {
  std::unordered_set<uint64_t> seen;
  seen.reserve(1 << 20);
  for (uint64_t node = 0; node < 1000; node++)
    for (uint64_t attempt = 0; attempt < 1000; attempt++)
      seen.insert(derive_node_seed(0xC0FFEE, node, attempt));
  CHECK(seen.size() == 1000u * 1000u);
}

TEST_CASE("simulator validates configuration") {
  Graph g(2, {{0, 1}});
  Simulator sim(g);
  CHECK_THROWS_AS(sim.run({}), ValidationError);  // nothing attached
  std::vector<std::unique_ptr<NodeProgram>> one;
  one.push_back(std::make_unique<Spammer>());
  CHECK_THROWS_AS(sim.attach(std::move(one)), ValidationError);  // wrong count
  CHECK_THROWS_AS(sim.digraph(), ValidationError);
  CHECK(sim.bandwidth_budget(8) == 8);  // ceil_log2(2) == 1
  SimConfig bad;
  bad.beta = 0;
  std::vector<std::unique_ptr<NodeProgram>> two;
  two.push_back(std::make_unique<Spammer>());
  two.push_back(std::make_unique<Spammer>());
  sim.attach(std::move(two));
  CHECK_THROWS_AS(sim.run(bad), ValidationError);
}
