#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <vector>

#include "qthermo/generator.hpp"

namespace qthermo {

struct CycleReport {
  /// Closed state sequences i_0, i_1, ..., i_n, i_0.
  std::vector<std::vector<std::size_t>> cycles;
  /// log(prod forward rates / prod backward rates) for each cycle.
  std::vector<double> log_ratios;
  double max_abs_log_ratio = 0.0;
  bool balanced = true;
};

namespace detail {

inline double cycle_log_ratio(const Generator& g, const std::vector<std::size_t>& cycle) {
  double log_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < cycle.size(); ++k) {
    log_ratio += std::log(g.rate(cycle[k], cycle[k + 1])) - std::log(g.rate(cycle[k + 1], cycle[k]));
  }
  return log_ratio;
}

}  // namespace detail

/// Kolmogorov criterion on a fundamental cycle basis.
///
/// A BFS spanning forest is grown from state 0 (then from the lowest
/// unvisited state), visiting neighbours in index order. Each non-tree edge
/// (u, v), u < v, closes one basis cycle u -> v -> ... -> lca -> ... -> u.
/// The rate products agree on every cycle iff they agree on the basis.
inline CycleReport kolmogorov_cycles(const Generator& g, double tolerance) {
  if (!g.microscopically_reversible()) {
    throw Error(ErrorCode::kNotReversible, "an edge exists in only one direction");
  }
  const std::size_t n = g.size();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(n, kNone);
  std::vector<std::size_t> depth(n, 0);
  std::vector<bool> seen(n, false);
  std::vector<std::vector<bool>> tree_edge(n, std::vector<bool>(n, false));

  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (seen[v] || !g.has_edge(u, v)) continue;
        seen[v] = true;
        parent[v] = u;
        depth[v] = depth[u] + 1;
        tree_edge[u][v] = tree_edge[v][u] = true;
        queue.push_back(v);
      }
    }
  }

  CycleReport report;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (!g.has_edge(u, v) || tree_edge[u][v]) continue;
      // Walk both endpoints up to their lowest common ancestor.
      std::vector<std::size_t> from_v{v};
      std::vector<std::size_t> from_u;
      std::size_t a = v;
      std::size_t b = u;
      while (depth[a] > depth[b]) from_v.push_back(a = parent[a]);
      while (depth[b] > depth[a]) {
        b = parent[b];
        from_u.push_back(b);
      }
      while (a != b) {
        from_v.push_back(a = parent[a]);
        b = parent[b];
        from_u.push_back(b);
      }
      // from_u ends with the lca, which from_v already holds.
      if (!from_u.empty()) from_u.pop_back();

      std::vector<std::size_t> cycle{u};
      cycle.insert(cycle.end(), from_v.begin(), from_v.end());
      cycle.insert(cycle.end(), from_u.rbegin(), from_u.rend());
      cycle.push_back(u);

      const double log_ratio = detail::cycle_log_ratio(g, cycle);
      report.max_abs_log_ratio = std::max(report.max_abs_log_ratio, std::abs(log_ratio));
      report.cycles.push_back(std::move(cycle));
      report.log_ratios.push_back(log_ratio);
    }
  }
  report.balanced = report.max_abs_log_ratio <= tolerance;
  return report;
}

}  // namespace qthermo
