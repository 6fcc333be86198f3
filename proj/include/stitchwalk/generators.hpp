#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stitchwalk/graph.hpp"
#include "stitchwalk/rng.hpp"

namespace stitchwalk {

enum class Family { GnpExpander, TwoTier, PowerLaw, Geometric, Grid };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::GnpExpander: return "gnp-expander";
    case Family::TwoTier: return "two-tier";
    case Family::PowerLaw: return "power-law";
    case Family::Geometric: return "geometric";
    case Family::Grid: return "grid";
  }
  return "?";
}

inline std::optional<Family> family_from_name(const std::string& s) {
  if (s == "gnp-expander" || s == "gnp") return Family::GnpExpander;
  if (s == "two-tier") return Family::TwoTier;
  if (s == "power-law") return Family::PowerLaw;
  if (s == "geometric") return Family::Geometric;
  if (s == "grid") return Family::Grid;
  return std::nullopt;
}

struct GeneratorSpec {
  Family family = Family::GnpExpander;
  std::uint32_t n = 0;
  std::optional<double> p;       // edge probability (gnp, two-tier)
  std::optional<double> alpha;   // preferential attachment exponent
  std::optional<double> radius;  // geometric threshold
  std::uint64_t seed = 0;
};

struct GenInfo {
  std::uint32_t requested_n = 0;
  std::uint32_t effective_n = 0;
  int attempts = 0;
  bool largest_component_fallback = false;
};

struct GeneratedGraph {
  Graph graph;
  GenInfo info;
};

namespace detail {

constexpr int kMaxConnectivityRetries = 20;
constexpr std::uint32_t kPowerLawSeedClique = 5;
constexpr int kPowerLawAttachments = 5;

inline void validate(const GeneratorSpec& spec) {
  if (spec.n < 4) throw std::invalid_argument("generator requires n >= 4");
  if (spec.p && !(*spec.p > 0.0 && *spec.p <= 1.0))
    throw std::invalid_argument("p must lie in (0,1]");
  if (spec.radius && !(*spec.radius > 0.0 && *spec.radius < std::sqrt(2.0)))
    throw std::invalid_argument("r must lie in (0, sqrt(2))");
  if (spec.alpha && !(*spec.alpha >= 0.0))
    throw std::invalid_argument("alpha must be >= 0");
}

// log base 2 throughout, matching the eta_v bit-budget convention
inline double default_gnp_p(std::uint32_t n) {
  return std::min(1.0, std::log2(static_cast<double>(n)) / n);
}

// G(n,p) edges by geometric skipping over the n(n-1)/2 pair indices.
inline std::vector<std::pair<NodeId, NodeId>> gnp_edges(std::uint32_t n,
                                                        double p, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  if (p >= 1.0) {
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return edges;
  }
  const double log1mp = std::log1p(-p);
  std::int64_t v = 1, w = -1;
  while (v < static_cast<std::int64_t>(n)) {
    double u = 1.0 - rng.unit();  // (0,1]
    w += 1 + static_cast<std::int64_t>(std::floor(std::log(u) / log1mp));
    while (w >= v && v < static_cast<std::int64_t>(n)) {
      w -= v;
      ++v;
    }
    if (v < static_cast<std::int64_t>(n))
      edges.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(w));
  }
  return edges;
}

inline Graph build_gnp(std::uint32_t n, double p, Rng& rng) {
  return make_graph(n, gnp_edges(n, p, rng));
}

inline Graph build_two_tier(std::uint32_t n, std::optional<double> p_opt,
                            Rng& rng) {
  // Four roughly equal clusters, then a second-tier G(M,p) over ceil(n/16)
  // uniformly chosen nodes from each cluster.
  std::uint32_t base = n / 4, rem = n % 4;
  std::vector<std::uint32_t> sizes(4, base);
  for (std::uint32_t i = 0; i < rem; ++i) ++sizes[i];

  std::set<std::pair<NodeId, NodeId>> edge_set;
  auto add_edge = [&edge_set](NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    edge_set.emplace(a, b);
  };
  std::vector<NodeId> tier_two;
  std::uint32_t offset = 0;
  std::uint32_t pick = (n + 15) / 16;
  for (int c = 0; c < 4; ++c) {
    std::uint32_t size = sizes[c];
    double p = p_opt ? *p_opt : default_gnp_p(std::max<std::uint32_t>(size, 2));
    for (auto [u, v] : gnp_edges(size, p, rng)) add_edge(offset + u, offset + v);
    // partial Fisher-Yates to select tier-two members
    std::vector<NodeId> ids(size);
    for (std::uint32_t i = 0; i < size; ++i) ids[i] = offset + i;
    std::uint32_t take = std::min(pick, size);
    for (std::uint32_t i = 0; i < take; ++i) {
      std::uint32_t j = i + rng.below(size - i);
      std::swap(ids[i], ids[j]);
      tier_two.push_back(ids[i]);
    }
    offset += size;
  }
  std::uint32_t tn = static_cast<std::uint32_t>(tier_two.size());
  double tp = p_opt ? *p_opt : default_gnp_p(std::max<std::uint32_t>(tn, 2));
  for (auto [u, v] : gnp_edges(tn, tp, rng)) add_edge(tier_two[u], tier_two[v]);
  std::vector<std::pair<NodeId, NodeId>> edges(edge_set.begin(), edge_set.end());
  return make_graph(n, edges);
}

// Fenwick tree over per-node attachment weights deg(v)^alpha.
class WeightTree {
 public:
  explicit WeightTree(std::uint32_t capacity) : tree_(capacity + 1, 0.0) {}

  void add(std::uint32_t i, double delta) {
    for (std::uint32_t k = i + 1; k < tree_.size(); k += k & (~k + 1))
      tree_[k] += delta;
  }

  double total() const {
    double s = 0.0;
    std::uint32_t k = static_cast<std::uint32_t>(tree_.size()) - 1;
    for (; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  // Largest index with prefix sum <= x.
  std::uint32_t find(double x) const {
    std::uint32_t pos = 0;
    std::uint32_t mask = 1;
    while (2u * mask < tree_.size()) mask <<= 1;
    for (; mask > 0; mask >>= 1) {
      std::uint32_t next = pos + mask;
      if (next < tree_.size() && tree_[next] <= x) {
        x -= tree_[next];
        pos = next;
      }
    }
    return pos;  // 0-based node index
  }

 private:
  std::vector<double> tree_;
};

inline Graph build_power_law(std::uint32_t n, double alpha, Rng& rng) {
  std::uint32_t clique = std::min(kPowerLawSeedClique, n);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::uint32_t> deg(n, 0);
  for (NodeId u = 0; u < clique; ++u)
    for (NodeId v = u + 1; v < clique; ++v) {
      edges.emplace_back(u, v);
      ++deg[u];
      ++deg[v];
    }
  WeightTree weights(n);
  auto weight_of = [&](NodeId v) {
    return std::pow(static_cast<double>(deg[v]), alpha);
  };
  for (NodeId v = 0; v < clique; ++v) weights.add(v, weight_of(v));

  std::vector<NodeId> targets;
  for (NodeId v = clique; v < n; ++v) {
    targets.clear();
    for (int i = 0; i < kPowerLawAttachments; ++i) {
      double x = rng.unit() * weights.total();
      NodeId t = weights.find(x);
      if (t >= v) t = v - 1;  // top-of-range round-off guard
      targets.push_back(t);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (NodeId t : targets) {
      edges.emplace_back(t, v);
      double before = weight_of(t);
      ++deg[t];
      weights.add(t, weight_of(t) - before);
    }
    deg[v] = static_cast<std::uint32_t>(targets.size());
    weights.add(v, weight_of(v));
  }
  return make_graph(n, edges);
}

inline Graph build_geometric(std::uint32_t n, double r, Rng& rng) {
  std::vector<double> xs(n), ys(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    xs[i] = rng.unit();
    ys[i] = rng.unit();
  }
  // bucket grid of cell size >= r; only 3x3 neighborhoods can hold edges
  std::uint32_t cells = std::max<std::uint32_t>(
      1, static_cast<std::uint32_t>(std::floor(1.0 / r)));
  auto cell_of = [&](double x) {
    auto c = static_cast<std::uint32_t>(x * cells);
    return std::min(c, cells - 1);
  };
  std::vector<std::vector<NodeId>> buckets(static_cast<std::size_t>(cells) *
                                           cells);
  for (NodeId i = 0; i < n; ++i)
    buckets[static_cast<std::size_t>(cell_of(ys[i])) * cells + cell_of(xs[i])]
        .push_back(i);
  const double r2 = r * r;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i) {
    std::uint32_t cx = cell_of(xs[i]), cy = cell_of(ys[i]);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        std::int64_t bx = static_cast<std::int64_t>(cx) + dx;
        std::int64_t by = static_cast<std::int64_t>(cy) + dy;
        if (bx < 0 || by < 0 || bx >= cells || by >= cells) continue;
        for (NodeId j : buckets[static_cast<std::size_t>(by) * cells + bx]) {
          if (j <= i) continue;
          double ddx = xs[i] - xs[j], ddy = ys[i] - ys[j];
          if (ddx * ddx + ddy * ddy <= r2) edges.emplace_back(i, j);
        }
      }
  }
  return make_graph(n, edges);
}

inline Graph build_grid(std::uint32_t n) {
  auto side = static_cast<std::uint32_t>(std::floor(std::sqrt(
      static_cast<double>(n))));
  while ((side + 1) * (side + 1) <= n) ++side;  // fp round-off guard
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::uint32_t i = 0; i < side; ++i)
    for (std::uint32_t j = 0; j < side; ++j) {
      NodeId v = i * side + j;
      if (j + 1 < side) edges.emplace_back(v, v + 1);
      if (i + 1 < side) edges.emplace_back(v, v + side);
    }
  return make_graph(side * side, edges);
}

}  // namespace detail

// Builds a connected instance of the requested family. Random families are
// resampled with derived sub-seeds up to 20 times; if all attempts come out
// disconnected the largest component is kept (renumbered) and the fallback is
// recorded in the metadata.
inline GeneratedGraph generate(const GeneratorSpec& spec) {
  detail::validate(spec);
  GenInfo info;
  info.requested_n = spec.n;

  if (spec.family == Family::Grid) {
    Graph g = detail::build_grid(spec.n);
    info.effective_n = g.n;
    info.attempts = 1;
    return {std::move(g), info};
  }

  auto attempt_build = [&](int attempt) -> Graph {
    Rng rng(derive_key(spec.seed, stream::generator,
                       static_cast<std::uint64_t>(spec.family), attempt));
    switch (spec.family) {
      case Family::GnpExpander:
        return detail::build_gnp(spec.n, spec.p ? *spec.p
                                                : detail::default_gnp_p(spec.n),
                                 rng);
      case Family::TwoTier:
        return detail::build_two_tier(spec.n, spec.p, rng);
      case Family::PowerLaw:
        return detail::build_power_law(spec.n, spec.alpha ? *spec.alpha : 1.0,
                                       rng);
      case Family::Geometric: {
        double r = spec.radius
                       ? *spec.radius
                       : std::sqrt(std::log2(static_cast<double>(spec.n)) /
                                   spec.n);
        return detail::build_geometric(spec.n, r, rng);
      }
      default:
        throw std::logic_error("unreachable");
    }
  };

  bool retryable = spec.family == Family::GnpExpander ||
                   spec.family == Family::TwoTier ||
                   spec.family == Family::Geometric;
  Graph g = attempt_build(0);
  info.attempts = 1;
  if (retryable) {
    while (!is_connected(g) && info.attempts < detail::kMaxConnectivityRetries) {
      g = attempt_build(info.attempts);
      ++info.attempts;
    }
    if (!is_connected(g)) {
      g = largest_component(g).first;
      info.largest_component_fallback = true;
    }
  }
  if (!is_connected(g))
    throw std::runtime_error("generator produced a disconnected graph");
  info.effective_n = g.n;
  return {std::move(g), info};
}

}  // namespace stitchwalk
