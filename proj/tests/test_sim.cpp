#include <catch2/catch_amalgamated.hpp>

#include "stitchwalk/generators.hpp"
#include "stitchwalk/sim.hpp"
#include "test_support.hpp"

using namespace stitchwalk;

namespace {
Token make_token(std::uint64_t id, NodeId src, std::uint32_t counter,
                 std::uint32_t target) {
  return Token{TokenKind::NaiveStep, id, src, counter, target, 0};
}
}  // namespace

TEST_CASE("single token crossing one edge costs one round, one message") {
  auto g = sw_test::path_graph(2);
  SimState sim(g);
  sim.inject(0, 1, make_token(1, 0, 1, 1));
  sim.run_until_idle([](NodeId, NodeId, const Token& t, SimState& s) {
    s.finish(t);
  });
  REQUIRE(sim.round() == 1);
  REQUIRE(sim.messages_total() == 1);
}

TEST_CASE("capacity one serializes three tokens FIFO") {
  auto g = sw_test::path_graph(2);
  SimState sim(g, SimConfig{1, true});
  for (std::uint64_t id = 1; id <= 3; ++id)
    sim.inject(0, 1, make_token(id, 0, 1, 1));
  std::vector<std::uint64_t> arrival_order;
  sim.run_until_idle([&](NodeId, NodeId, const Token& t, SimState& s) {
    arrival_order.push_back(t.walk_id);
    s.finish(t);
  });
  REQUIRE(sim.round() == 3);
  REQUIRE(sim.messages_total() == 3);
  REQUIRE(arrival_order == std::vector<std::uint64_t>{1, 2, 3});
  REQUIRE(audit_bandwidth(sim.delivery_log(), 1));
}

TEST_CASE("idealized capacity delivers everything in one round") {
  auto g = sw_test::path_graph(2);
  SimState sim(g, SimConfig{kUnboundedCapacity, false});
  const int k = 17;
  for (int id = 0; id < k; ++id) sim.inject(0, 1, make_token(id, 0, 1, 1));
  sim.run_until_idle([](NodeId, NodeId, const Token& t, SimState& s) {
    s.finish(t);
  });
  REQUIRE(sim.round() == 1);
  REQUIRE(sim.messages_total() == k);
}

TEST_CASE("malformed token aborts the run") {
  auto g = sw_test::path_graph(2);
  SimState sim(g);
  sim.inject(0, 1, make_token(1, 0, 5, 3));  // counter beyond target
  REQUIRE_THROWS_AS(
      sim.run_until_idle([](NodeId, NodeId, const Token& t, SimState& s) {
        s.finish(t);
      }),
      SimAbort);
}

TEST_CASE("route from a node to itself is free") {
  auto g = sw_test::cycle_graph(6);
  SimState sim(g);
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto cost = route(sim, oracle, 2, 2, make_token(1, 2, 0, 0));
  REQUIRE(cost.total_rounds() == 0);
  REQUIRE(cost.total_messages() == 0);
}

TEST_CASE("route across the 3x3 grid costs 4 rounds and 4 messages") {
  auto g = generate({Family::Grid, 9, {}, {}, {}, 1}).graph;
  SimState sim(g);
  sim.set_phase(Phase::Stitch);
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto cost = route(sim, oracle, 0, 8, make_token(1, 0, 0, 9));
  REQUIRE(cost.total_rounds() == 4);
  REQUIRE(cost.total_messages() == 4);
  REQUIRE(cost.messages[Phase::Stitch] == 4);
}

TEST_CASE("leaf to leaf over a star bfs tree costs 2 messages") {
  auto g = sw_test::star_graph(4);
  SimState sim(g);
  auto oracle = RoutingOracle::build(g, RoutingMode::BfsTree);
  auto cost = route(sim, oracle, 1, 3, make_token(1, 1, 0, 9));
  REQUIRE(cost.total_messages() == 2);
}

TEST_CASE("tokens are conserved") {
  auto g = sw_test::cycle_graph(8);
  SimState sim(g);
  Rng rng(derive_key(3, stream::naive_walk, 1));
  for (std::uint64_t id = 0; id < 20; ++id) {
    NodeId start = rng.below(8);
    sim.inject(start, g.adj[start][rng.below(2)],
               make_token(id, start, 1, 5));
  }
  sim.run_until_idle([&](NodeId at, NodeId, const Token& t, SimState& s) {
    if (t.counter == t.target_length) {
      s.finish(t);
      return;
    }
    Token next = t;
    ++next.counter;
    s.forward(at, g.adj[at][rng.below(2)], next);
  });
  REQUIRE(sim.idle());
  REQUIRE(sim.injected() == 20);
  REQUIRE(sim.finished() == 20);
  REQUIRE(sim.messages_total() == 20 * 5);
}

TEST_CASE("identical runs produce identical traces") {
  auto g = generate({Family::GnpExpander, 30, {}, {}, {}, 12}).graph;
  auto run = [&] {
    SimState sim(g, SimConfig{1, true});
    Rng rng(derive_key(55, stream::naive_walk, 0));
    for (std::uint64_t id = 0; id < 40; ++id) {
      NodeId start = rng.below(g.n);
      sim.inject(start, g.adj[start][rng.below(g.degree(start))],
                 make_token(id, start, 1, 7));
    }
    sim.run_until_idle([&](NodeId at, NodeId, const Token& t, SimState& s) {
      if (t.counter == t.target_length) {
        s.finish(t);
        return;
      }
      Token next = t;
      ++next.counter;
      s.forward(at, g.adj[at][rng.below(g.degree(at))], next);
    });
    return sim;
  };
  SimState a = run(), b = run();
  REQUIRE(a.round() == b.round());
  REQUIRE(a.messages_total() == b.messages_total());
  REQUIRE(a.delivery_log().size() == b.delivery_log().size());
  for (std::size_t i = 0; i < a.delivery_log().size(); ++i) {
    REQUIRE(a.delivery_log()[i].round == b.delivery_log()[i].round);
    REQUIRE(a.delivery_log()[i].walk_id == b.delivery_log()[i].walk_id);
    REQUIRE(a.delivery_log()[i].edge_u == b.delivery_log()[i].edge_u);
    REQUIRE(a.delivery_log()[i].edge_v == b.delivery_log()[i].edge_v);
  }
}
