#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stitchwalk/graph.hpp"
#include "stitchwalk/rng.hpp"
#include "stitchwalk/routing.hpp"
#include "stitchwalk/short_walks.hpp"
#include "stitchwalk/sim.hpp"

namespace stitchwalk {

enum class WalkStatus { Ok, FailedNeedsRebuild };

struct WalkRequest {
  NodeId source = 0;
  std::uint32_t length = 0;
};

struct WalkResult {
  WalkRequest request;
  NodeId destination = 0;  // meaningful when status == Ok
  std::vector<NodeId> connectors;
  CostRecord cost;
  WalkStatus status = WalkStatus::Ok;
  std::uint32_t stitches = 0;
  std::uint32_t stitched_length = 0;
  std::uint32_t tail_steps = 0;
};

namespace detail {

// Neighbor choice for step `k` of a pre-processed short walk. Addressed by
// counter so the path replays identically in either engine and under any
// edge capacity.
inline NodeId short_walk_step(const Graph& g, std::uint64_t path_key, NodeId at,
                              std::uint32_t k) {
  return g.adj[at][bounded(stream_at(path_key, k), g.degree(at))];
}

inline std::uint64_t short_walk_path_key(std::uint64_t seed, std::uint64_t epoch,
                                         std::uint64_t walk_id) {
  return derive_key(seed, stream::short_walk_step, epoch, walk_id);
}

inline std::uint32_t short_walk_offset(std::uint64_t seed, std::uint64_t epoch,
                                       std::uint64_t walk_id,
                                       std::uint32_t lambda) {
  std::uint64_t key = derive_key(seed, stream::short_walk_offset, epoch, walk_id);
  return bounded(stream_at(key, 0), lambda);
}

// Per-node predecessor records for reverse-path retracing, keyed by walk id.
// A node visited twice by one walk holds two records; returns pop LIFO.
class Breadcrumbs {
 public:
  explicit Breadcrumbs(std::uint32_t n) : per_node_(n) {}

  void push(NodeId at, std::uint64_t walk_id, NodeId pred) {
    per_node_[at][walk_id].push_back(pred);
  }

  NodeId pop(NodeId at, std::uint64_t walk_id) {
    auto& stacks = per_node_[at];
    auto it = stacks.find(walk_id);
    if (it == stacks.end() || it->second.empty())
      throw SimAbort("missing reverse-path record");
    NodeId pred = it->second.back();
    it->second.pop_back();
    if (it->second.empty()) stacks.erase(it);
    return pred;
  }

 private:
  std::vector<std::unordered_map<std::uint64_t, std::vector<NodeId>>> per_node_;
};

constexpr std::uint64_t kRequestIdTag = 1ULL << 63;
constexpr std::uint64_t kNaiveIdTag = 1ULL << 62;

}  // namespace detail

// Baseline: send a token for `len` steps picking a random neighbor each
// step, then return the destination id along the same path. Costs exactly
// 2*len rounds and 2*len messages on an otherwise idle network.
inline WalkResult naive_walk(const Graph& g, NodeId s, std::uint32_t len,
                             Rng& rng, SimState* external_sim = nullptr) {
  if (len == 0) throw std::invalid_argument("walk length must be >= 1");
  if (s >= g.n) throw std::invalid_argument("source node out of range");
  std::unique_ptr<SimState> owned;
  if (!external_sim) owned = std::make_unique<SimState>(g, SimConfig{});
  SimState& sim = external_sim ? *external_sim : *owned;
  if (!sim.idle()) throw SimAbort("naive_walk requires an idle network");

  WalkResult res;
  res.request = {s, len};
  res.connectors = {s};
  res.tail_steps = len;
  CostRecord before = sim.totals();
  sim.set_phase(Phase::NaiveBaseline);

  detail::Breadcrumbs crumbs(g.n);
  NodeId forward_dest = 0;
  bool done = false;
  Token fwd{TokenKind::NaiveStep, detail::kNaiveIdTag, s, 1, len, 0};
  sim.inject(s, g.adj[s][rng.below(g.degree(s))], fwd);
  sim.run_until_idle([&](NodeId at, NodeId from, const Token& t, SimState& sm) {
    if (t.kind == TokenKind::NaiveStep) {
      crumbs.push(at, t.walk_id, from);
      if (t.counter == t.target_length) {
        forward_dest = at;
        sm.finish(t);
        Token ret{TokenKind::NaiveReturn, t.walk_id, s, 1, len, at};
        sm.inject(at, crumbs.pop(at, t.walk_id), ret);
        return;
      }
      Token next = t;
      ++next.counter;
      sm.forward(at, g.adj[at][rng.below(g.degree(at))], next);
      return;
    }
    // return leg
    if (t.counter == t.target_length) {
      res.destination = t.payload_dest;
      done = true;
      sm.finish(t);
      return;
    }
    Token next = t;
    ++next.counter;
    sm.forward(at, crumbs.pop(at, t.walk_id), next);
  });
  if (!done || res.destination != forward_dest)
    throw SimAbort("naive walk return did not reach its source");
  res.cost = sim.totals() - before;
  return res;
}

struct PreprocessResult {
  ShortWalkTable table;
  CostRecord cost;
  std::uint32_t r_max = 0;
};

// Builds the short-walk table: eta_v walks of length lambda + r_i from every
// node, destinations reported back along reverse paths. With a SimState the
// walks run as tokens (one hop per round, capacity permitting, forward phase
// then a return phase); without one the same table is computed by direct
// accounting, with idealized-capacity round totals (lambda + r_max each way).
inline PreprocessResult pre_processing(const Graph& g, double eta,
                                       std::uint32_t lambda, std::uint64_t seed,
                                       std::uint64_t epoch,
                                       SimState* sim = nullptr) {
  PreprocessResult out{ShortWalkTable(g, eta, lambda, epoch), {}, 0};
  ShortWalkTable& table = out.table;

  // lengths first: lambda + r_i, r_i uniform on [0, lambda-1]
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < table.entry_count(v); ++i) {
      auto& e = table.entry(v, i);
      std::uint32_t r = detail::short_walk_offset(seed, epoch, e.walk_id, lambda);
      e.length = lambda + r;
      out.r_max = std::max(out.r_max, r);
    }

  if (!sim) {
    std::uint64_t forward_messages = 0;
    for (NodeId v = 0; v < g.n; ++v)
      for (std::uint32_t i = 0; i < table.entry_count(v); ++i) {
        auto& e = table.entry(v, i);
        std::uint64_t key = detail::short_walk_path_key(seed, epoch, e.walk_id);
        NodeId at = v;
        for (std::uint32_t k = 0; k < e.length; ++k)
          at = detail::short_walk_step(g, key, at, k);
        e.destination = at;
        forward_messages += e.length;
      }
    out.cost.messages[Phase::PreprocessForward] = forward_messages;
    out.cost.messages[Phase::PreprocessReturn] = forward_messages;
    std::uint64_t phase_rounds = lambda + out.r_max;
    out.cost.rounds[Phase::PreprocessForward] = phase_rounds;
    out.cost.rounds[Phase::PreprocessReturn] = phase_rounds;
    return out;
  }

  if (!sim->idle()) throw SimAbort("pre_processing requires an idle network");
  CostRecord before = sim->totals();
  detail::Breadcrumbs crumbs(g.n);
  std::unordered_map<std::uint64_t, std::pair<NodeId, std::uint32_t>> locate;
  locate.reserve(table.total_entries());
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < table.entry_count(v); ++i)
      locate.emplace(table.entry(v, i).walk_id, std::make_pair(v, i));

  // forward phase: every token advances one hop per round, capacity allowing
  sim->set_phase(Phase::PreprocessForward);
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < table.entry_count(v); ++i) {
      const auto& e = table.entry(v, i);
      std::uint64_t key = detail::short_walk_path_key(seed, epoch, e.walk_id);
      Token t{TokenKind::WalkExtend, e.walk_id, v, 1, e.length, 0};
      sim->inject(v, detail::short_walk_step(g, key, v, 0), t);
    }
  sim->run_until_idle([&](NodeId at, NodeId from, const Token& t, SimState& sm) {
    crumbs.push(at, t.walk_id, from);
    if (t.counter == t.target_length) {
      // `at` is the destination: it stores the source id and, harness-side,
      // the entry learns its endpoint
      auto [src, idx] = locate.at(t.walk_id);
      table.entry(src, idx).destination = at;
      sm.finish(t);
      return;
    }
    std::uint64_t key = detail::short_walk_path_key(seed, epoch, t.walk_id);
    Token next = t;
    ++next.counter;
    sm.forward(at, detail::short_walk_step(g, key, at, t.counter), next);
  });

  // return phase: destination ids travel back along the reverse paths
  sim->set_phase(Phase::PreprocessReturn);
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < table.entry_count(v); ++i) {
      const auto& e = table.entry(v, i);
      Token t{TokenKind::DestReturn, e.walk_id, v, 1, e.length, e.destination};
      sim->inject(e.destination, crumbs.pop(e.destination, e.walk_id), t);
    }
  sim->run_until_idle([&](NodeId at, NodeId, const Token& t, SimState& sm) {
    if (t.counter == t.target_length) {
      if (at != t.source) throw SimAbort("return token missed its source");
      sm.finish(t);
      return;
    }
    Token next = t;
    ++next.counter;
    sm.forward(at, crumbs.pop(at, t.walk_id), next);
  });

  out.cost = sim->totals() - before;
  return out;
}

// Stitches unused short walks until fewer than 2*lambda steps remain, then
// walks naively to exactly `len` steps. The holder of the token at the end
// outputs the source id (reported out of band at zero network cost unless
// notify_source routes it back). Fails, discarding partial progress, when a
// connector has no unused entry left.
inline WalkResult single_random_walk(const Graph& g, ShortWalkTable& table,
                                     const RoutingOracle& oracle, NodeId s,
                                     std::uint32_t len, Rng& rng,
                                     SimState* sim = nullptr,
                                     bool notify_source = false) {
  if (len == 0) throw std::invalid_argument("walk length must be >= 1");
  if (s >= g.n) throw std::invalid_argument("source node out of range");
  WalkResult res;
  res.request = {s, len};
  res.connectors = {s};
  const std::uint32_t lambda = table.lambda();
  const std::uint64_t request_id = detail::kRequestIdTag | (rng.key() >> 32);
  CostRecord before = sim ? sim->totals() : CostRecord{};
  CostRecord acc;

  NodeId current = s;
  std::uint64_t completed = 0;
  while (completed + 2ULL * lambda <= len) {
    auto pick = table.pick_unused(current, rng);
    if (!pick) {
      res.status = WalkStatus::FailedNeedsRebuild;
      res.cost = sim ? sim->totals() - before : acc;
      return res;
    }
    if (res.stitches > 0) res.connectors.push_back(current);
    const auto& e = table.entry(current, *pick);
    if (sim) {
      sim->set_phase(Phase::Stitch);
      Token t{TokenKind::StitchMove, request_id, s, 0, len, e.destination};
      route(*sim, oracle, current, e.destination, t);
    } else {
      std::uint32_t d = oracle.distance(current, e.destination);
      acc.messages[Phase::Stitch] += d;
      acc.rounds[Phase::Stitch] += d;
    }
    completed += e.length;
    res.stitched_length += e.length;
    ++res.stitches;
    current = e.destination;
  }

  std::uint32_t remaining = static_cast<std::uint32_t>(len - completed);
  res.tail_steps = remaining;
  if (remaining > 0) {
    if (sim) {
      sim->set_phase(Phase::NaiveTail);
      Token t{TokenKind::NaiveStep, request_id, s, 1, remaining, 0};
      sim->inject(current, g.adj[current][rng.below(g.degree(current))], t);
      sim->run_until_idle(
          [&](NodeId at, NodeId, const Token& tok, SimState& sm) {
            if (tok.counter == tok.target_length) {
              current = at;
              sm.finish(tok);
              return;
            }
            Token next = tok;
            ++next.counter;
            sm.forward(at, g.adj[at][rng.below(g.degree(at))], next);
          });
    } else {
      for (std::uint32_t k = 0; k < remaining; ++k)
        current = g.adj[current][rng.below(g.degree(current))];
      acc.messages[Phase::NaiveTail] += remaining;
      acc.rounds[Phase::NaiveTail] += remaining;
    }
  }
  res.destination = current;

  if (notify_source && current != s) {
    if (sim) {
      sim->set_phase(Phase::Stitch);
      Token t{TokenKind::DestReturn, request_id, s, 0, len, current};
      route(*sim, oracle, current, s, t);
    } else {
      std::uint32_t d = oracle.distance(current, s);
      acc.messages[Phase::Stitch] += d;
      acc.rounds[Phase::Stitch] += d;
    }
  }
  res.cost = sim ? sim->totals() - before : acc;
  return res;
}

enum class LambdaMode { SqrtLen, Theory, Explicit };

// lambda = ceil(sqrt(len)), the figure-caption default.
inline std::uint32_t lambda_sqrt_len(std::uint32_t len) {
  auto lam = static_cast<std::uint32_t>(
      std::ceil(std::sqrt(static_cast<double>(len))));
  return std::max<std::uint32_t>(1, lam);
}

// lambda = 24 * sqrt(len * D) * (log2 n)^3, the analysis value. Far larger
// than len at desk scale, which collapses requests to the naive tail.
inline std::uint32_t lambda_theory(std::uint32_t len, std::uint32_t diam,
                                   std::uint32_t n) {
  double lg = std::log2(static_cast<double>(n));
  double lam = 24.0 *
               std::sqrt(static_cast<double>(len) *
                         std::max<std::uint32_t>(1, diam)) *
               lg * lg * lg;
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(lam)));
}

inline std::uint32_t choose_lambda(LambdaMode mode, std::uint32_t explicit_value,
                                   std::uint32_t len, std::uint32_t diam,
                                   std::uint32_t n) {
  switch (mode) {
    case LambdaMode::SqrtLen: return lambda_sqrt_len(len);
    case LambdaMode::Theory: return lambda_theory(len, diam, n);
    case LambdaMode::Explicit:
      if (explicit_value == 0)
        throw std::invalid_argument("explicit lambda must be >= 1");
      return explicit_value;
  }
  return 1;
}

struct ContinuousConfig {
  double eta = 1.0;
  LambdaMode lambda_mode = LambdaMode::SqrtLen;
  std::uint32_t lambda_explicit = 0;
  RoutingMode routing = RoutingMode::ShortestPath;
  bool simulate = false;               // token-level kernel vs direct accounting
  std::uint64_t capacity = 1;          // simulate only
  bool record_delivery_log = false;    // simulate only
  bool notify_source = false;
  std::uint32_t max_rebuilds_per_request = 64;
};

// Serves walk requests continuously: one short-walk table at a time, rebuilt
// whenever a request fails, with the failed request rerun from scratch on
// the fresh table. Tracks per-epoch utilization and phase-split costs.
class ContinuousWalkServer {
 public:
  struct EpochStats {
    std::uint64_t epoch = 0;
    double kappa = 0.0;  // used/total at the failure that closed the epoch
    std::uint64_t walks_served = 0;
    CostRecord cost;  // preprocessing + all serving charged to this epoch
  };

  ContinuousWalkServer(const Graph& g, std::uint32_t len, ContinuousConfig cfg,
                       std::uint64_t seed)
      : g_(&g),
        len_(len),
        cfg_(cfg),
        seed_(seed),
        oracle_(RoutingOracle::build(g, cfg.routing)),
        sampler_(g) {
    lambda_ = choose_lambda(cfg.lambda_mode, cfg.lambda_explicit, len,
                            oracle_.graph_diameter(), g.n);
    if (cfg_.simulate)
      sim_ = std::make_unique<SimState>(
          g, SimConfig{cfg_.capacity, cfg_.record_delivery_log});
    rebuild();
  }

  WalkResult serve_next() {
    Rng rng(derive_key(seed_, stream::source_draw, request_index_));
    return serve(sampler_.draw(rng));
  }

  // called for every attempt, failed ones included
  using ResultObserver =
      std::function<void(const WalkResult&, std::uint64_t epoch,
                         std::uint64_t request_index)>;
  void set_result_observer(ResultObserver obs) { observer_ = std::move(obs); }

  WalkResult serve(NodeId source) {
    std::uint64_t request = request_index_++;
    for (std::uint32_t attempt = 0;; ++attempt) {
      if (attempt >= cfg_.max_rebuilds_per_request)
        throw std::runtime_error(
            "request keeps failing on fresh tables; lambda/eta leave too few "
            "stitchable walks");
      Rng rng(derive_key(seed_, stream::request, request, attempt));
      WalkResult res =
          single_random_walk(*g_, *table_, oracle_, source, len_, rng,
                             sim_.get(), cfg_.notify_source);
      if (!cfg_.simulate) account_ += res.cost;
      if (observer_) observer_(res, epoch_, request);
      if (res.status == WalkStatus::Ok) {
        ++walks_served_;
        return res;
      }
      // epoch ends: record utilization at the instant of failure
      EpochStats stats;
      stats.epoch = epoch_;
      stats.kappa = table_->kappa();
      stats.walks_served = walks_served_;
      stats.cost = cumulative_cost() - epoch_start_cost_;
      epochs_.push_back(stats);
      ++epoch_;
      walks_served_ = 0;
      rebuild();
    }
  }

  std::uint64_t epoch() const { return epoch_; }
  std::uint32_t lambda() const { return lambda_; }
  const ShortWalkTable& table() const { return *table_; }
  const RoutingOracle& oracle() const { return oracle_; }
  const std::vector<EpochStats>& completed_epochs() const { return epochs_; }
  std::uint64_t walks_served_this_epoch() const { return walks_served_; }
  SimState* sim() { return sim_.get(); }

  CostRecord cumulative_cost() const {
    return cfg_.simulate ? sim_->totals() : account_;
  }

 private:
  void rebuild() {
    epoch_start_cost_ = cumulative_cost();
    auto pre = pre_processing(*g_, cfg_.eta, lambda_, seed_, epoch_, sim_.get());
    table_ = std::make_unique<ShortWalkTable>(std::move(pre.table));
    if (!cfg_.simulate) account_ += pre.cost;
  }

  const Graph* g_;
  std::uint32_t len_;
  ContinuousConfig cfg_;
  std::uint64_t seed_;
  RoutingOracle oracle_;
  DegreeSampler sampler_;
  std::uint32_t lambda_ = 1;
  std::unique_ptr<SimState> sim_;
  std::unique_ptr<ShortWalkTable> table_;
  CostRecord account_;
  CostRecord epoch_start_cost_;
  std::uint64_t epoch_ = 0;
  std::uint64_t walks_served_ = 0;
  std::uint64_t request_index_ = 0;
  std::vector<EpochStats> epochs_;
  ResultObserver observer_;
};

// Tables for len_i = 1, 2, 4, ..., up to the smallest power of two >= len_max.
// A request for arbitrary len is served at the smallest table length >= len,
// guaranteeing len <= served < 2*len.
class DoublingFamily {
 public:
  DoublingFamily(const Graph& g, std::uint32_t len_max, double eta,
                 std::uint64_t seed, ContinuousConfig cfg = {}) {
    if (len_max == 0) throw std::invalid_argument("len_max must be >= 1");
    len_max_ = len_max;
    std::uint32_t len = 1;
    for (std::uint32_t i = 0;; ++i) {
      ContinuousConfig table_cfg = cfg;
      table_cfg.eta = eta;
      table_cfg.lambda_mode = LambdaMode::SqrtLen;
      servers_.push_back(std::make_unique<ContinuousWalkServer>(
          g, len, table_cfg, derive_key(seed, stream::epoch, i)));
      if (len >= len_max) break;
      len *= 2;
    }
  }

  std::size_t table_count() const { return servers_.size(); }

  std::uint32_t served_length(std::uint32_t len) const {
    if (len == 0 || len > len_max_)
      throw std::invalid_argument("requested length outside [1, len_max]");
    std::uint32_t l = 1;
    while (l < len) l *= 2;
    return l;
  }

  // Returns the walk result (performed at served_length(len)) and that length.
  std::pair<WalkResult, std::uint32_t> serve(NodeId s, std::uint32_t len) {
    std::uint32_t l = served_length(len);
    std::size_t idx = 0;
    while ((1u << idx) < l) ++idx;
    return {servers_[idx]->serve(s), l};
  }

 private:
  std::uint32_t len_max_ = 0;
  std::vector<std::unique_ptr<ContinuousWalkServer>> servers_;
};

}  // namespace stitchwalk
