#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stitchwalk/rng.hpp"

namespace stitchwalk {

using NodeId = std::uint32_t;

// Undirected, unweighted, connected graph. Adjacency lists are sorted and
// free of self-loops and duplicates; m counts each undirected edge once.
struct Graph {
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  std::vector<std::vector<NodeId>> adj;

  std::uint32_t degree(NodeId v) const {
    return static_cast<std::uint32_t>(adj[v].size());
  }
};

inline Graph make_graph(std::uint32_t n,
                        const std::vector<std::pair<NodeId, NodeId>>& edges) {
  Graph g;
  g.n = n;
  g.adj.assign(n, {});
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loop");
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& nbrs : g.adj) {
    std::sort(nbrs.begin(), nbrs.end());
    if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
      throw std::invalid_argument("duplicate edge");
  }
  g.m = edges.size();
  return g;
}

inline bool is_connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(g.n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::uint32_t count = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : g.adj[u])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == g.n;
}

// Largest connected component, renumbered to [0, size) preserving relative
// order of the original ids. Second value maps old id -> new id (or npos).
inline std::pair<Graph, std::vector<NodeId>> largest_component(const Graph& g) {
  constexpr NodeId npos = ~NodeId{0};
  std::vector<NodeId> comp(g.n, npos);
  NodeId ncomp = 0;
  std::vector<std::uint32_t> sizes;
  for (NodeId s = 0; s < g.n; ++s) {
    if (comp[s] != npos) continue;
    std::vector<NodeId> stack{s};
    comp[s] = ncomp;
    std::uint32_t size = 0;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      ++size;
      for (NodeId w : g.adj[u])
        if (comp[w] == npos) {
          comp[w] = ncomp;
          stack.push_back(w);
        }
    }
    sizes.push_back(size);
    ++ncomp;
  }
  NodeId best = static_cast<NodeId>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> remap(g.n, npos);
  NodeId next = 0;
  for (NodeId v = 0; v < g.n; ++v)
    if (comp[v] == best) remap[v] = next++;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < g.n; ++u) {
    if (remap[u] == npos) continue;
    for (NodeId w : g.adj[u])
      if (u < w && remap[w] != npos) edges.emplace_back(remap[u], remap[w]);
  }
  return {make_graph(next, edges), remap};
}

// Full invariant check; returns a description of the first violation.
inline std::optional<std::string> check_graph_invariants(const Graph& g) {
  if (g.n == 0) return "empty graph";
  if (g.adj.size() != g.n) return "adjacency size mismatch";
  std::uint64_t degree_sum = 0;
  for (NodeId u = 0; u < g.n; ++u) {
    const auto& nbrs = g.adj[u];
    if (!std::is_sorted(nbrs.begin(), nbrs.end())) return "unsorted adjacency";
    if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
      return "duplicate edge at node " + std::to_string(u);
    for (NodeId w : nbrs) {
      if (w >= g.n) return "neighbor out of range";
      if (w == u) return "self-loop at node " + std::to_string(u);
      if (!std::binary_search(g.adj[w].begin(), g.adj[w].end(), u))
        return "asymmetric edge " + std::to_string(u) + "-" + std::to_string(w);
    }
    degree_sum += nbrs.size();
  }
  if (degree_sum != 2 * g.m) return "m does not equal half the degree sum";
  if (!is_connected(g)) return "graph is not connected";
  return std::nullopt;
}

// Plain-text edge list: first line "n m", then one "u v" per line, 0-based.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.n << ' ' << g.m << '\n';
  for (NodeId u = 0; u < g.n; ++u)
    for (NodeId w : g.adj[u])
      if (u < w) out << u << ' ' << w << '\n';
}

// Reader tolerates leading '#' comment lines ahead of the "n m" header.
inline Graph read_edge_list(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') break;
  }
  std::istringstream header(line);
  std::uint32_t n;
  std::uint64_t m;
  if (!(header >> n >> m)) throw std::runtime_error("bad edge list header");
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  NodeId u, v;
  while (in >> u >> v) edges.emplace_back(u, v);
  if (edges.size() != m) throw std::runtime_error("edge count mismatch");
  return make_graph(n, edges);
}

// Draws nodes with probability deg(v)/2m: a uniform index into the directed
// stub list, located by prefix sums.
class DegreeSampler {
 public:
  explicit DegreeSampler(const Graph& g) : cumulative_(g.n) {
    std::uint64_t acc = 0;
    for (NodeId v = 0; v < g.n; ++v) {
      acc += g.degree(v);
      cumulative_[v] = acc;
    }
  }

  NodeId draw(Rng& rng) const {
    std::uint64_t stubs = cumulative_.back();
    std::uint64_t t = bounded_u64(rng.next(), stubs);
    return static_cast<NodeId>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), t) -
        cumulative_.begin());
  }

 private:
  static std::uint64_t bounded_u64(std::uint64_t draw, std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(draw) *
         static_cast<unsigned __int128>(bound)) >>
        64);
  }

  std::vector<std::uint64_t> cumulative_;
};

inline NodeId sample_source_by_degree(const Graph& g, Rng& rng) {
  return DegreeSampler(g).draw(rng);
}

}  // namespace stitchwalk
