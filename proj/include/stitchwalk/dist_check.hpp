#pragma once

#include <cstdint>
#include <vector>

#include "stitchwalk/distribution.hpp"
#include "stitchwalk/graph.hpp"
#include "stitchwalk/routing.hpp"
#include "stitchwalk/walk_engine.hpp"

namespace stitchwalk {

struct DistCheckResult {
  double tv = 0.0;
  std::uint64_t samples = 0;
  NodeId source = 0;
  std::uint32_t length = 0;
  std::uint32_t lambda = 0;
};

// Oracle-equivalence check: stitched-walk destinations over fresh tables
// (one table per run, so runs are independent) against the exact power-
// iterated walk law from the same source. Failed runs rerun on another
// fresh table, mirroring the continuous protocol.
inline DistCheckResult destination_distribution_check(
    const Graph& g, NodeId source, std::uint32_t length, std::uint64_t samples,
    std::uint64_t seed, std::uint32_t lambda = 0) {
  if (lambda == 0) lambda = lambda_sqrt_len(length);
  RoutingOracle oracle = RoutingOracle::build(g, RoutingMode::ShortestPath);
  std::vector<NodeId> destinations;
  destinations.reserve(samples);
  std::uint64_t epoch = 0;
  for (std::uint64_t run = 0; run < samples; ++run) {
    for (;;) {
      auto pre = pre_processing(g, 1.0, lambda, seed, epoch++);
      Rng rng(derive_key(seed, stream::request, run, epoch));
      WalkResult res = single_random_walk(g, pre.table, oracle, source, length,
                                          rng);
      if (res.status == WalkStatus::Ok) {
        destinations.push_back(res.destination);
        break;
      }
    }
  }
  DistributionVector exact = exact_walk_distribution(g, source, length);
  DistributionVector emp = empirical_distribution(
      std::span<const NodeId>(destinations.data(), destinations.size()), g);
  return {tv_distance(emp, exact), samples, source, length, lambda};
}

}  // namespace stitchwalk
