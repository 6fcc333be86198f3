#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "stitchwalk/graph.hpp"
#include "stitchwalk/rng.hpp"

namespace stitchwalk {

// One pre-processed short walk, stored at its source node. length stays in
// [lambda, 2*lambda - 1].
struct ShortWalkEntry {
  std::uint64_t walk_id = 0;
  std::uint32_t length = 0;
  NodeId destination = 0;
  bool used = false;
};

// eta_v = ceil(eta * deg(v) * log2 n), log base 2.
inline std::uint32_t walks_per_node(double eta, std::uint32_t degree,
                                    std::uint32_t n) {
  double raw = eta * degree * std::log2(static_cast<double>(n));
  return static_cast<std::uint32_t>(std::ceil(raw - 1e-12));
}

// Per-node inventory of pre-processed short walks. Entry contents are filled
// by pre-processing; consumption marks entries used exactly once.
class ShortWalkTable {
 public:
  ShortWalkTable(const Graph& g, double eta, std::uint32_t lambda,
                 std::uint64_t epoch)
      : eta_(eta), lambda_(lambda), epoch_(epoch) {
    if (lambda == 0) throw std::invalid_argument("lambda must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    entries_.resize(g.n);
    unused_.resize(g.n);
    std::uint64_t next_id = 0;
    for (NodeId v = 0; v < g.n; ++v) {
      std::uint32_t count = walks_per_node(eta, g.degree(v), g.n);
      entries_[v].resize(count);
      unused_[v].resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        entries_[v][i].walk_id = next_id++;
        unused_[v][i] = i;
      }
      total_ += count;
    }
  }

  double eta() const { return eta_; }
  std::uint32_t lambda() const { return lambda_; }
  std::uint64_t epoch() const { return epoch_; }
  std::uint64_t total_entries() const { return total_; }
  std::uint64_t used_entries() const { return used_; }

  double kappa() const {
    return total_ == 0 ? 0.0
                       : static_cast<double>(used_) / static_cast<double>(total_);
  }

  std::uint32_t entry_count(NodeId v) const {
    return static_cast<std::uint32_t>(entries_[v].size());
  }
  std::uint32_t unused_count(NodeId v) const {
    return static_cast<std::uint32_t>(unused_[v].size());
  }

  const ShortWalkEntry& entry(NodeId v, std::uint32_t i) const {
    return entries_[v][i];
  }
  ShortWalkEntry& entry(NodeId v, std::uint32_t i) { return entries_[v][i]; }

  // Uniform draw over v's unused entries; marks it used. Null when the node
  // has exhausted its supply.
  std::optional<std::uint32_t> pick_unused(NodeId v, Rng& rng) {
    auto& pool = unused_[v];
    if (pool.empty()) return std::nullopt;
    std::uint32_t k = rng.below(static_cast<std::uint32_t>(pool.size()));
    std::uint32_t idx = pool[k];
    pool[k] = pool.back();
    pool.pop_back();
    entries_[v][idx].used = true;
    ++used_;
    return idx;
  }

  // Debug dump: per node, one "walk_id length dest used" line per entry.
  void dump(std::ostream& out) const {
    for (NodeId v = 0; v < entries_.size(); ++v) {
      out << "node " << v << '\n';
      for (const auto& e : entries_[v])
        out << e.walk_id << ' ' << e.length << ' ' << e.destination << ' '
            << (e.used ? 1 : 0) << '\n';
    }
  }

 private:
  double eta_;
  std::uint32_t lambda_;
  std::uint64_t epoch_;
  std::uint64_t total_ = 0;
  std::uint64_t used_ = 0;
  std::vector<std::vector<ShortWalkEntry>> entries_;
  std::vector<std::vector<std::uint32_t>> unused_;
};

}  // namespace stitchwalk
