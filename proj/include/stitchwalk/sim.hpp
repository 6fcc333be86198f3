#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stitchwalk/graph.hpp"
#include "stitchwalk/routing.hpp"

namespace stitchwalk {

enum class TokenKind : std::uint8_t {
  WalkExtend,
  DestReturn,
  StitchMove,
  NaiveStep,
  NaiveReturn,
};

inline const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::WalkExtend: return "walk-extend";
    case TokenKind::DestReturn: return "dest-return";
    case TokenKind::StitchMove: return "stitch-move";
    case TokenKind::NaiveStep: return "naive-step";
    case TokenKind::NaiveReturn: return "naive-return";
  }
  return "?";
}

enum class Phase : std::uint8_t {
  PreprocessForward = 0,
  PreprocessReturn = 1,
  Stitch = 2,
  NaiveTail = 3,
  NaiveBaseline = 4,
};
constexpr std::size_t kPhaseCount = 5;

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::PreprocessForward: return "preprocess-forward";
    case Phase::PreprocessReturn: return "preprocess-return";
    case Phase::Stitch: return "stitch";
    case Phase::NaiveTail: return "naive-tail";
    case Phase::NaiveBaseline: return "naive-baseline";
  }
  return "?";
}

// One in-network message. Payload is identity- and counter-sized only, so it
// fits the per-edge B = O(log n) bit budget by construction.
struct Token {
  TokenKind kind = TokenKind::NaiveStep;
  std::uint64_t walk_id = 0;
  NodeId source = 0;
  std::uint32_t counter = 0;        // steps taken so far
  std::uint32_t target_length = 0;  // intended total steps
  NodeId payload_dest = 0;          // meaningful for returns/stitches
};
static_assert(sizeof(Token) <= 32, "token exceeds the small-message budget");

struct PhaseSplit {
  std::array<std::uint64_t, kPhaseCount> by_phase{};

  std::uint64_t& operator[](Phase p) { return by_phase[static_cast<size_t>(p)]; }
  std::uint64_t operator[](Phase p) const {
    return by_phase[static_cast<size_t>(p)];
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto x : by_phase) s += x;
    return s;
  }
  PhaseSplit& operator+=(const PhaseSplit& o) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) by_phase[i] += o.by_phase[i];
    return *this;
  }
  friend PhaseSplit operator-(PhaseSplit a, const PhaseSplit& b) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) a.by_phase[i] -= b.by_phase[i];
    return a;
  }
  friend bool operator==(const PhaseSplit&, const PhaseSplit&) = default;
};

struct CostRecord {
  PhaseSplit rounds;
  PhaseSplit messages;

  std::uint64_t total_rounds() const { return rounds.total(); }
  std::uint64_t total_messages() const { return messages.total(); }
  CostRecord& operator+=(const CostRecord& o) {
    rounds += o.rounds;
    messages += o.messages;
    return *this;
  }
  friend CostRecord operator-(CostRecord a, const CostRecord& b) {
    a.rounds = a.rounds - b.rounds;
    a.messages = a.messages - b.messages;
    return a;
  }
  friend bool operator==(const CostRecord&, const CostRecord&) = default;
};

constexpr std::uint64_t kUnboundedCapacity =
    std::numeric_limits<std::uint64_t>::max();

struct SimConfig {
  std::uint64_t capacity = 1;  // tokens per directed edge per round
  bool record_delivery_log = false;
};

struct DeliveryRecord {
  std::uint64_t round;
  NodeId edge_u, edge_v;  // canonical (min, max)
  std::uint8_t direction;  // 0: u->v, 1: v->u
  TokenKind kind;
  std::uint64_t walk_id;
};

class SimAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synchronous round-based kernel. Tokens sit on per-direction edge queues;
// each round delivers up to `capacity` tokens per directed edge (FIFO, ties
// within a round broken by (walk_id, source)), hands them to the node
// handler, and enqueues whatever the handler emits for the next round.
class SimState {
 public:
  // handler(node, from, token, sim): `from` is the tail of the arrival edge
  // (the port the message came in on). Call forward() to re-emit or finish()
  // to terminate the token; exactly one of the two per delivery.
  using Handler =
      std::function<void(NodeId, NodeId, const Token&, SimState&)>;

  SimState(const Graph& g, SimConfig cfg = {}) : g_(&g), cfg_(cfg) {
    if (cfg_.capacity == 0) throw std::invalid_argument("capacity must be >= 1");
    edge_offset_.assign(g.n + 1, 0);
    for (NodeId v = 0; v < g.n; ++v)
      edge_offset_[v + 1] = edge_offset_[v] + g.degree(v);
    queues_.assign(edge_offset_.back(), {});
    delivered_to_.assign(g.n, {});
  }

  const Graph& graph() const { return *g_; }
  std::uint64_t round() const { return round_; }
  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }

  // Emits a token onto the directed edge from->to. Used both for initial
  // injection and for handler re-emissions; injections are counted so the
  // conservation audit can compare against finish() calls.
  void inject(NodeId from, NodeId to, const Token& t) {
    ++injected_;
    emit(from, to, t);
  }

  void forward(NodeId from, NodeId to, const Token& t) { emit(from, to, t); }

  void finish(const Token&) { ++finished_; }

  bool idle() const { return in_flight_ == 0; }

  // One synchronous round. Returns false (and does nothing) when idle.
  bool step_round(const Handler& handler) {
    if (idle()) return false;
    flush_pending();
    // deliver up to capacity per directed edge
    touched_nodes_.clear();
    for (std::size_t e = 0; e < queues_.size(); ++e) {
      auto& q = queues_[e];
      if (q.empty()) continue;
      std::uint64_t take = cfg_.capacity == kUnboundedCapacity
                               ? q.size()
                               : std::min<std::uint64_t>(cfg_.capacity, q.size());
      NodeId to = edge_head(e);
      NodeId from = edge_tail(e);
      for (std::uint64_t i = 0; i < take; ++i) {
        Token t = q.front();
        q.pop_front();
        --in_flight_;
        if (t.counter > t.target_length)
          throw SimAbort("malformed token: counter exceeds target length");
        if (cfg_.record_delivery_log) {
          NodeId a = std::min(from, to), b = std::max(from, to);
          log_.push_back({round_ + 1, a, b,
                          static_cast<std::uint8_t>(from == a ? 0 : 1), t.kind,
                          t.walk_id});
        }
        if (delivered_to_[to].empty()) touched_nodes_.push_back(to);
        delivered_to_[to].push_back({from, t});
        ++delivered_count_this_round_;
      }
    }
    ++round_;
    rounds_[phase_] += 1;
    messages_[phase_] += delivered_count_this_round_;
    messages_total_ += delivered_count_this_round_;
    delivered_count_this_round_ = 0;
    // handlers run per node in ascending id order
    std::sort(touched_nodes_.begin(), touched_nodes_.end());
    for (NodeId v : touched_nodes_) {
      for (const auto& [from, t] : delivered_to_[v]) handler(v, from, t, *this);
      delivered_to_[v].clear();
    }
    return true;
  }

  void run_until_idle(const Handler& handler) {
    while (step_round(handler)) {
    }
  }

  CostRecord totals() const {
    CostRecord c;
    c.rounds = rounds_;
    c.messages = messages_;
    return c;
  }

  std::uint64_t messages_total() const { return messages_total_; }
  std::uint64_t injected() const { return injected_; }
  std::uint64_t finished() const { return finished_; }
  const std::vector<DeliveryRecord>& delivery_log() const { return log_; }

  void write_delivery_log_csv(std::ostream& out) const {
    out << "round,edge_u,edge_v,direction,kind,walk_id\n";
    for (const auto& r : log_)
      out << r.round << ',' << r.edge_u << ',' << r.edge_v << ','
          << unsigned(r.direction) << ',' << token_kind_name(r.kind) << ','
          << r.walk_id << '\n';
  }

 private:
  struct PendingEmit {
    std::size_t edge;
    Token token;
  };

  std::size_t edge_index(NodeId from, NodeId to) const {
    const auto& nbrs = g_->adj[from];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), to);
    if (it == nbrs.end() || *it != to)
      throw SimAbort("emit on a non-edge " + std::to_string(from) + "->" +
                     std::to_string(to));
    return edge_offset_[from] + static_cast<std::size_t>(it - nbrs.begin());
  }

  NodeId edge_head(std::size_t e) const {
    NodeId from = edge_tail(e);
    return g_->adj[from][e - edge_offset_[from]];
  }

  NodeId edge_tail(std::size_t e) const {
    auto it = std::upper_bound(edge_offset_.begin(), edge_offset_.end(), e);
    return static_cast<NodeId>(it - edge_offset_.begin() - 1);
  }

  void emit(NodeId from, NodeId to, const Token& t) {
    pending_.push_back({edge_index(from, to), t});
    ++in_flight_;
  }

  // Emissions buffered during a round join the queues afterwards, sorted by
  // (edge, walk_id, source) for a deterministic FIFO tie-break.
  void flush_pending() {
    if (pending_.empty()) return;
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const PendingEmit& a, const PendingEmit& b) {
                       if (a.edge != b.edge) return a.edge < b.edge;
                       if (a.token.walk_id != b.token.walk_id)
                         return a.token.walk_id < b.token.walk_id;
                       return a.token.source < b.token.source;
                     });
    for (auto& pe : pending_) queues_[pe.edge].push_back(pe.token);
    pending_.clear();
  }

  const Graph* g_;
  SimConfig cfg_;
  Phase phase_ = Phase::NaiveBaseline;
  std::uint64_t round_ = 0;
  std::uint64_t in_flight_ = 0;
  std::uint64_t injected_ = 0;
  std::uint64_t finished_ = 0;
  std::uint64_t delivered_count_this_round_ = 0;
  std::uint64_t messages_total_ = 0;
  PhaseSplit rounds_;
  PhaseSplit messages_;
  std::vector<std::uint64_t> edge_offset_;
  std::vector<std::deque<Token>> queues_;
  std::vector<PendingEmit> pending_;
  std::vector<std::vector<std::pair<NodeId, Token>>> delivered_to_;
  std::vector<NodeId> touched_nodes_;
  std::vector<DeliveryRecord> log_;
};

// Moves a token hop-by-hop along oracle next-hops from `from` to `to`.
// Requires an otherwise idle network; returns the cost of the move
// (shortest-path mode: exactly dist(from,to) messages).
inline CostRecord route(SimState& sim, const RoutingOracle& oracle, NodeId from,
                        NodeId to, Token token) {
  if (!sim.idle()) throw SimAbort("route requires an idle network");
  CostRecord before = sim.totals();
  if (from == to) return CostRecord{};
  std::vector<NodeId> hops = oracle.path(from, to);
  std::size_t next = 1;
  sim.inject(from, hops[0], token);
  sim.run_until_idle([&](NodeId at, NodeId, const Token& t, SimState& s) {
    if (at == to) {
      s.finish(t);
      return;
    }
    s.forward(at, hops[next], t);
    ++next;
  });
  return sim.totals() - before;
}

// Post-hoc bandwidth audit: no directed edge may carry more than `capacity`
// tokens in any round. Exact count over the sorted log.
inline bool audit_bandwidth(const std::vector<DeliveryRecord>& log,
                            std::uint64_t capacity) {
  std::vector<std::array<std::uint64_t, 2>> keys;
  keys.reserve(log.size());
  for (const auto& r : log)
    keys.push_back({(r.round << 1) | r.direction,
                    (static_cast<std::uint64_t>(r.edge_u) << 32) | r.edge_v});
  std::sort(keys.begin(), keys.end());
  std::uint64_t run = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    run = (i > 0 && keys[i] == keys[i - 1]) ? run + 1 : 1;
    if (run > capacity) return false;
  }
  return true;
}

}  // namespace stitchwalk
