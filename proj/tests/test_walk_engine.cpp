#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "stitchwalk/generators.hpp"
#include "stitchwalk/walk_engine.hpp"
#include "test_support.hpp"

using namespace stitchwalk;

TEST_CASE("naive walk costs exactly 2l rounds and 2l messages") {
  auto g = generate({Family::GnpExpander, 16, {}, {}, {}, 2}).graph;
  for (std::uint32_t len : {1u, 5u, 40u}) {
    Rng rng(derive_key(1, stream::naive_walk, len));
    WalkResult res = naive_walk(g, 3, len, rng);
    REQUIRE(res.cost.total_rounds() == 2 * len);
    REQUIRE(res.cost.total_messages() == 2 * len);
    REQUIRE(res.cost.messages[Phase::NaiveBaseline] == 2 * len);
  }
}

TEST_CASE("naive walk from the middle of a 3-path always returns") {
  auto g = sw_test::path_graph(3);
  for (int i = 0; i < 50; ++i) {
    Rng rng(derive_key(7, stream::naive_walk, i));
    WalkResult res = naive_walk(g, 1, 2, rng);
    REQUIRE(res.destination == 1);
  }
}

TEST_CASE("naive walk on C4 splits between home and antipode") {
  auto g = sw_test::cycle_graph(4);
  int home = 0, anti = 0;
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    Rng rng(derive_key(8, stream::naive_walk, i));
    WalkResult res = naive_walk(g, 0, 2, rng);
    if (res.destination == 0) ++home;
    if (res.destination == 2) ++anti;
  }
  REQUIRE(home + anti == trials);
  REQUIRE(static_cast<double>(home) / trials ==
          Catch::Approx(0.5).margin(0.03));
}

TEST_CASE("lambda=1 entries all have length one and uniform-neighbor ends") {
  auto g = sw_test::star_graph(4);
  auto pre = pre_processing(g, 0.2, 1, 42, 0);  // eta small: eta_v >= 1
  REQUIRE(pre.r_max == 0);
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < pre.table.entry_count(v); ++i) {
      const auto& e = pre.table.entry(v, i);
      REQUIRE(e.length == 1);
      REQUIRE(std::binary_search(g.adj[v].begin(), g.adj[v].end(),
                                 e.destination));
    }
}

TEST_CASE("idealized forward phase takes exactly lambda + r_max rounds") {
  auto g = sw_test::complete_graph(5);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SimState sim(g, SimConfig{kUnboundedCapacity, false});
    auto pre = pre_processing(g, 1.0, 4, seed, 0, &sim);
    REQUIRE(pre.r_max <= 3);
    REQUIRE(pre.cost.rounds[Phase::PreprocessForward] == 4 + pre.r_max);
    REQUIRE(pre.cost.rounds[Phase::PreprocessReturn] == 4 + pre.r_max);
  }
}

TEST_CASE("3x3 grid table has 158 entries at eta=2") {
  // sum over nodes of ceil(2 * deg * log2 9)
  auto g = generate({Family::Grid, 9, {}, {}, {}, 1}).graph;
  auto pre = pre_processing(g, 2.0, 3, 5, 0);
  std::uint64_t expected = 0;
  for (NodeId v = 0; v < g.n; ++v)
    expected += static_cast<std::uint64_t>(
        std::ceil(2.0 * g.degree(v) * std::log2(9.0)));
  REQUIRE(expected == 158);
  REQUIRE(pre.table.total_entries() == expected);
}

TEST_CASE("account and simulate builds agree") {
  for (Family f : {Family::GnpExpander, Family::TwoTier, Family::PowerLaw,
                   Family::Geometric, Family::Grid}) {
    GeneratorSpec spec;
    spec.family = f;
    spec.n = 24;
    spec.seed = 33;
    const Graph& g = generate(spec).graph;
    auto fast = pre_processing(g, 1.0, 3, 99, 0);
    SimState sim(g, SimConfig{kUnboundedCapacity, false});
    auto slow = pre_processing(g, 1.0, 3, 99, 0, &sim);
    REQUIRE(fast.r_max == slow.r_max);
    REQUIRE(fast.table.total_entries() == slow.table.total_entries());
    for (NodeId v = 0; v < g.n; ++v)
      for (std::uint32_t i = 0; i < fast.table.entry_count(v); ++i) {
        REQUIRE(fast.table.entry(v, i).length == slow.table.entry(v, i).length);
        REQUIRE(fast.table.entry(v, i).destination ==
                slow.table.entry(v, i).destination);
      }
    REQUIRE(fast.cost == slow.cost);
  }
}

TEST_CASE("capacity-one preprocessing yields the same table, slower rounds") {
  const Graph& g = generate({Family::Geometric, 30, {}, {}, {}, 14}).graph;
  auto fast = pre_processing(g, 1.0, 4, 5, 0);
  SimState sim(g, SimConfig{1, true});
  auto slow = pre_processing(g, 1.0, 4, 5, 0, &sim);
  for (NodeId v = 0; v < g.n; ++v)
    for (std::uint32_t i = 0; i < fast.table.entry_count(v); ++i)
      REQUIRE(fast.table.entry(v, i).destination ==
              slow.table.entry(v, i).destination);
  REQUIRE(fast.cost.messages == slow.cost.messages);
  REQUIRE(slow.cost.total_rounds() >= fast.cost.total_rounds());
  REQUIRE(audit_bandwidth(sim.delivery_log(), 1));
  REQUIRE(sim.injected() == sim.finished());
}

TEST_CASE("short request is a pure naive tail") {
  const Graph& g = generate({Family::GnpExpander, 20, {}, {}, {}, 6}).graph;
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto pre = pre_processing(g, 1.0, 8, 10, 0);
  Rng rng(derive_key(10, stream::request, 0));
  WalkResult res = single_random_walk(g, pre.table, oracle, 2, 9, rng);
  REQUIRE(res.status == WalkStatus::Ok);
  REQUIRE(res.stitches == 0);  // 9 < 2*8
  REQUIRE(res.tail_steps == 9);
  REQUIRE(res.connectors == std::vector<NodeId>{2});
  REQUIRE(res.cost.total_messages() == 9);
  REQUIRE(res.cost.messages[Phase::NaiveTail] == 9);
}

TEST_CASE("stitched walk conserves length and bounds stitches") {
  const Graph& g = generate({Family::TwoTier, 40, {}, {}, {}, 16}).graph;
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  const std::uint32_t lambda = 3, len = 25;
  for (int run = 0; run < 30; ++run) {
    auto pre = pre_processing(g, 1.0, lambda, 100 + run, 0);
    Rng rng(derive_key(200, stream::request, run));
    WalkResult res = single_random_walk(g, pre.table, oracle, 1, len, rng);
    REQUIRE(res.status == WalkStatus::Ok);
    REQUIRE(res.stitched_length + res.tail_steps == len);
    REQUIRE(res.stitches >= 1);
    REQUIRE(res.stitches <= (len + lambda - 1) / lambda);
    REQUIRE(res.tail_steps < 2 * lambda);
    REQUIRE(res.connectors.front() == 1);
    REQUIRE(res.connectors.size() == std::max<std::size_t>(1, res.stitches));
  }
}

TEST_CASE("stitch consumes entries exactly once") {
  const Graph& g = sw_test::complete_graph(6);
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto pre = pre_processing(g, 1.0, 2, 7, 0);
  std::uint64_t before_used = pre.table.used_entries();
  REQUIRE(before_used == 0);
  Rng rng(derive_key(7, stream::request, 1));
  WalkResult res = single_random_walk(g, pre.table, oracle, 0, 20, rng);
  REQUIRE(res.status == WalkStatus::Ok);
  REQUIRE(pre.table.used_entries() == res.stitches);
  // dump marks exactly the consumed entries used
  std::ostringstream dump;
  pre.table.dump(dump);
  std::istringstream lines(dump.str());
  std::string line;
  std::size_t used_lines = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("node ", 0) == 0) continue;
    std::istringstream fields(line);
    std::uint64_t id, len, dest, used;
    REQUIRE((fields >> id >> len >> dest >> used));
    used_lines += used;
  }
  REQUIRE(used_lines == res.stitches);
}

TEST_CASE("exhausted connector fails the walk and keeps partial cost") {
  // two-node path: each node holds one length-1 walk at eta tiny, lambda 1;
  // a long request must exhaust them
  const Graph& g = sw_test::path_graph(2);
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto pre = pre_processing(g, 0.5, 1, 3, 0);
  REQUIRE(pre.table.total_entries() == 2);  // ceil(0.5*1*1) each
  Rng rng(derive_key(3, stream::request, 0));
  WalkResult res = single_random_walk(g, pre.table, oracle, 0, 50, rng);
  REQUIRE(res.status == WalkStatus::FailedNeedsRebuild);
  REQUIRE(pre.table.kappa() == 1.0);
}

TEST_CASE("simulate and account serving agree on the full walk") {
  const Graph& g = generate({Family::Geometric, 25, {}, {}, {}, 19}).graph;
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  for (int run = 0; run < 10; ++run) {
    auto t1 = pre_processing(g, 1.0, 3, 50 + run, 0);
    auto t2 = pre_processing(g, 1.0, 3, 50 + run, 0);
    Rng r1(derive_key(60, stream::request, run));
    Rng r2(derive_key(60, stream::request, run));
    WalkResult fast = single_random_walk(g, t1.table, oracle, 4, 21, r1);
    SimState sim(g, SimConfig{kUnboundedCapacity, false});
    WalkResult slow = single_random_walk(g, t2.table, oracle, 4, 21, r2, &sim);
    REQUIRE(fast.destination == slow.destination);
    REQUIRE(fast.stitches == slow.stitches);
    REQUIRE(fast.connectors == slow.connectors);
    REQUIRE(fast.cost == slow.cost);
  }
}

TEST_CASE("stitch messages stay within ceil(l/lambda)*D") {
  const Graph& g = generate({Family::Grid, 49, {}, {}, {}, 1}).graph;
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  const std::uint32_t lambda = 3, len = 30;
  std::uint32_t diam = oracle.graph_diameter();
  for (int run = 0; run < 20; ++run) {
    auto pre = pre_processing(g, 1.0, lambda, 300 + run, 0);
    Rng rng(derive_key(70, stream::request, run));
    WalkResult res = single_random_walk(g, pre.table, oracle, 24, len, rng);
    REQUIRE(res.status == WalkStatus::Ok);
    REQUIRE(res.cost.messages[Phase::Stitch] <=
            static_cast<std::uint64_t>((len + lambda - 1) / lambda) * diam);
  }
}

TEST_CASE("notify-source adds a routed return") {
  const Graph& g = sw_test::cycle_graph(8);
  auto oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  auto a = pre_processing(g, 1.0, 2, 9, 0);
  auto b = pre_processing(g, 1.0, 2, 9, 0);
  Rng r1(derive_key(80, stream::request, 0));
  Rng r2(derive_key(80, stream::request, 0));
  WalkResult plain = single_random_walk(g, a.table, oracle, 0, 11, r1);
  WalkResult notified =
      single_random_walk(g, b.table, oracle, 0, 11, r2, nullptr, true);
  REQUIRE(notified.destination == plain.destination);
  std::uint32_t d = oracle.distance(plain.destination, 0);
  REQUIRE(notified.cost.total_messages() ==
          plain.cost.total_messages() + d);
}
