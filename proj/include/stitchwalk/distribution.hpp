#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "stitchwalk/graph.hpp"

namespace stitchwalk {

// Per-node probability mass, indexed by node id.
struct DistributionVector {
  std::vector<double> mass;

  std::size_t size() const { return mass.size(); }
  double operator[](std::size_t i) const { return mass[i]; }

  double total() const {
    double s = 0.0;
    for (double x : mass) s += x;
    return s;
  }
};

// Point mass at s advanced `length` times by P(x,y) = 1/deg(x) for neighbors.
// Dense iteration; capped so the vectors stay desk-sized.
inline DistributionVector exact_walk_distribution(const Graph& g, NodeId s,
                                                  std::uint32_t length,
                                                  std::uint32_t size_cap =
                                                      10000) {
  if (g.n > size_cap)
    throw std::length_error("exact_walk_distribution: graph exceeds size cap");
  if (s >= g.n) throw std::invalid_argument("source out of range");
  std::vector<double> cur(g.n, 0.0), next(g.n, 0.0);
  cur[s] = 1.0;
  for (std::uint32_t step = 0; step < length; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (NodeId x = 0; x < g.n; ++x) {
      if (cur[x] == 0.0) continue;
      double share = cur[x] / g.degree(x);
      for (NodeId y : g.adj[x]) next[y] += share;
    }
    cur.swap(next);
  }
  return {std::move(cur)};
}

// deg(v)/2m, the stationary law of the simple random walk.
inline DistributionVector stationary_distribution(const Graph& g) {
  std::vector<double> mass(g.n);
  double denom = 2.0 * static_cast<double>(g.m);
  for (NodeId v = 0; v < g.n; ++v) mass[v] = g.degree(v) / denom;
  return {std::move(mass)};
}

inline double tv_distance(const DistributionVector& p,
                          const DistributionVector& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("tv_distance: mismatched supports");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.mass[i] - q.mass[i]);
  return 0.5 * s;
}

inline DistributionVector empirical_distribution(std::span<const NodeId> samples,
                                                 std::uint32_t n) {
  if (samples.empty())
    throw std::invalid_argument("empirical_distribution: empty sample set");
  std::vector<double> mass(n, 0.0);
  for (NodeId v : samples) {
    if (v >= n) throw std::invalid_argument("sample out of range");
    mass[v] += 1.0;
  }
  for (double& x : mass) x /= static_cast<double>(samples.size());
  return {std::move(mass)};
}

inline DistributionVector empirical_distribution(std::span<const NodeId> samples,
                                                 const Graph& g) {
  return empirical_distribution(samples, g.n);
}

inline void write_distribution_csv(const DistributionVector& d,
                                   std::ostream& out) {
  out << "node,probability\n";
  for (std::size_t v = 0; v < d.size(); ++v)
    out << v << ',' << d.mass[v] << '\n';
}

namespace detail {

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction form.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Q(a,x) by Lentz continued fraction
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

// Upper-tail p-value of a chi-square statistic with `dof` degrees of freedom.
inline double chi_square_pvalue(double statistic, std::uint32_t dof) {
  return detail::gamma_q(0.5 * dof, 0.5 * statistic);
}

// Goodness of fit of observed counts against expected probabilities.
// Returns the p-value; reject when it falls below the significance level.
inline double chi_square_gof_pvalue(std::span<const std::uint64_t> counts,
                                    const DistributionVector& expected) {
  if (counts.size() != expected.size())
    throw std::invalid_argument("chi_square_gof: mismatched supports");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("chi_square_gof: no samples");
  double stat = 0.0;
  std::uint32_t dof = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double exp_count = expected.mass[i] * static_cast<double>(total);
    if (exp_count == 0.0) {
      if (counts[i] != 0)
        throw std::invalid_argument("observed mass outside expected support");
      continue;
    }
    double diff = static_cast<double>(counts[i]) - exp_count;
    stat += diff * diff / exp_count;
    ++dof;
  }
  return chi_square_pvalue(stat, dof - 1);
}

}  // namespace stitchwalk
