#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "stitchwalk/graph.hpp"

namespace stitchwalk {

struct BfsResult {
  std::vector<std::uint32_t> dist;
  std::vector<NodeId> parent;  // parent[src] == src
};

inline BfsResult bfs(const Graph& g, NodeId src) {
  constexpr std::uint32_t unreached = ~std::uint32_t{0};
  BfsResult r;
  r.dist.assign(g.n, unreached);
  r.parent.assign(g.n, 0);
  std::vector<NodeId> queue;
  queue.reserve(g.n);
  queue.push_back(src);
  r.dist[src] = 0;
  r.parent[src] = src;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    NodeId u = queue[head];
    for (NodeId w : g.adj[u])
      if (r.dist[w] == unreached) {
        r.dist[w] = r.dist[u] + 1;
        r.parent[w] = u;
        queue.push_back(w);
      }
  }
  return r;
}

inline std::uint32_t eccentricity(const Graph& g, NodeId src) {
  auto r = bfs(g, src);
  return *std::max_element(r.dist.begin(), r.dist.end());
}

inline std::uint32_t exact_diameter(const Graph& g) {
  constexpr std::uint32_t unreached = ~std::uint32_t{0};
  std::vector<std::uint32_t> dist(g.n);
  std::vector<NodeId> queue;
  queue.reserve(g.n);
  std::uint32_t best = 0;
  for (NodeId src = 0; src < g.n; ++src) {
    std::fill(dist.begin(), dist.end(), unreached);
    queue.clear();
    queue.push_back(src);
    dist[src] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      NodeId u = queue[head];
      for (NodeId w : g.adj[u])
        if (dist[w] == unreached) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
    }
    best = std::max(best, dist[queue.back()]);
  }
  return best;
}

// Double sweep: BFS from node 0 to the farthest node a (smallest id on
// ties), then ecc(a). A lower bound in general; exact on trees and cycles.
inline std::uint32_t double_sweep_diameter(const Graph& g) {
  auto first = bfs(g, 0);
  NodeId far = static_cast<NodeId>(
      std::max_element(first.dist.begin(), first.dist.end()) -
      first.dist.begin());
  return eccentricity(g, far);
}

inline std::uint32_t diameter(const Graph& g,
                              std::uint32_t exact_limit = 100000) {
  return g.n > exact_limit ? double_sweep_diameter(g) : exact_diameter(g);
}

enum class RoutingMode { BfsTree, ShortestPath };

// Next-hop routing between arbitrary node pairs. bfs-tree mode routes along
// one tree rooted at node 0 (<= 2D hops); shortest-path mode follows true
// shortest paths (exactly dist(u,w) hops), with per-destination parent rows
// computed lazily and cached behind a mutex so oracles stay shareable.
class RoutingOracle {
 public:
  static RoutingOracle build(const Graph& g, RoutingMode mode) {
    RoutingOracle o;
    o.g_ = &g;
    o.mode_ = mode;
    o.diameter_ = diameter(g);
    if (mode == RoutingMode::BfsTree) {
      auto r = bfs(g, 0);
      o.root_ = 0;
      o.tree_parent_ = std::move(r.parent);
      o.tree_depth_ = std::move(r.dist);
    }
    return o;
  }

  RoutingMode mode() const { return mode_; }
  std::uint32_t graph_diameter() const { return diameter_; }
  NodeId root() const { return root_; }
  const std::vector<NodeId>& tree_parents() const { return tree_parent_; }

  // Hop sequence from `from` to `to`, excluding `from`, including `to`.
  std::vector<NodeId> path(NodeId from, NodeId to) const {
    std::vector<NodeId> hops;
    if (from == to) return hops;
    if (mode_ == RoutingMode::ShortestPath) {
      const auto& toward = row_toward(to);
      NodeId cur = from;
      while (cur != to) {
        cur = toward[cur];
        hops.push_back(cur);
      }
      return hops;
    }
    // tree route: climb both endpoints to their meeting point
    std::vector<NodeId> up_from, up_to;
    NodeId a = from, b = to;
    while (tree_depth_[a] > tree_depth_[b]) {
      a = tree_parent_[a];
      up_from.push_back(a);
    }
    while (tree_depth_[b] > tree_depth_[a]) {
      up_to.push_back(b);
      b = tree_parent_[b];
    }
    while (a != b) {
      a = tree_parent_[a];
      up_from.push_back(a);
      up_to.push_back(b);
      b = tree_parent_[b];
    }
    hops = std::move(up_from);
    hops.insert(hops.end(), up_to.rbegin(), up_to.rend());
    return hops;
  }

  std::uint32_t distance(NodeId from, NodeId to) const {
    if (from == to) return 0;
    if (mode_ == RoutingMode::BfsTree)
      return static_cast<std::uint32_t>(path(from, to).size());
    const auto& toward = row_toward(to);
    std::uint32_t d = 0;
    for (NodeId cur = from; cur != to; cur = toward[cur]) ++d;
    return d;
  }

 private:
  // parent-toward-destination row (BFS tree rooted at `to`); map references
  // stay valid across later insertions, so the row is safe to use unlocked
  const std::vector<NodeId>& row_toward(NodeId to) const {
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    auto it = rows_.find(to);
    if (it == rows_.end()) {
      auto r = bfs(*g_, to);
      it = rows_.emplace(to, std::move(r.parent)).first;
    }
    return it->second;
  }

  const Graph* g_ = nullptr;
  RoutingMode mode_ = RoutingMode::ShortestPath;
  std::uint32_t diameter_ = 0;
  NodeId root_ = 0;
  std::vector<NodeId> tree_parent_;
  std::vector<std::uint32_t> tree_depth_;
  std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
  mutable std::unordered_map<NodeId, std::vector<NodeId>> rows_;
};

}  // namespace stitchwalk
