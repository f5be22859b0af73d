#pragma once

// Node centralities on unweighted undirected graphs (edge iff weight > 0).

#include <sese/graph.hpp>

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

namespace sese::centrality {

namespace detail {

inline std::vector<std::vector<std::size_t>> neighbours(const DirectedGraph& g) {
  std::vector<std::vector<std::size_t>> adj(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (i != j && (g(i, j) > 0.0 || g(j, i) > 0.0)) adj[i].push_back(j);
  return adj;
}

inline constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

inline std::vector<std::size_t> bfs_distances(const std::vector<std::vector<std::size_t>>& adj,
                                              std::size_t s) {
  std::vector<std::size_t> dist(adj.size(), kUnreached);
  std::deque<std::size_t> q{s};
  dist[s] = 0;
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop_front();
    for (std::size_t w : adj[v]) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace detail

/// Brandes betweenness, each unordered (s, t) pair counted once.
inline std::vector<double> betweenness(const DirectedGraph& g) {
  const auto adj = detail::neighbours(g);
  const std::size_t n = g.size();
  std::vector<double> cb(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> order;
    std::vector<std::vector<std::size_t>> pred(n);
    std::vector<double> sigma(n, 0.0), delta(n, 0.0);
    std::vector<std::size_t> dist(n, detail::kUnreached);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<std::size_t> q{s};
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      order.push_back(v);
      for (std::size_t w : adj[v]) {
        if (dist[w] == detail::kUnreached) {
          dist[w] = dist[v] + 1;
          q.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  for (double& c : cb) c /= 2.0;
  return cb;
}

/// Closeness (|V| - 1) / sum_u d(v, u) * |V| / |V_v|, summing over the
/// |V_v| vertices reachable from v (v included). Isolated vertices get 0.
inline std::vector<double> closeness(const DirectedGraph& g) {
  const auto adj = detail::neighbours(g);
  const std::size_t n = g.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto dist = detail::bfs_distances(adj, v);
    double total = 0.0;
    std::size_t reached = 0;
    for (std::size_t d : dist) {
      if (d == detail::kUnreached) continue;
      total += static_cast<double>(d);
      ++reached;
    }
    if (total > 0.0) {
      c[v] = static_cast<double>(n - 1) / total * static_cast<double>(n) / static_cast<double>(reached);
    }
  }
  return c;
}

/// PageRank with uniform teleport; dangling vertices spread uniformly.
inline std::vector<double> pagerank(const DirectedGraph& g, double damping = 0.85,
                                    double tol = 1e-14, int max_iter = 10000) {
  const auto adj = detail::neighbours(g);
  const std::size_t n = g.size();
  const double nn = static_cast<double>(n);
  std::vector<double> pr(n, 1.0 / nn), next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      if (adj[v].empty()) dangling += pr[v];
    std::fill(next.begin(), next.end(), (1.0 - damping) / nn + damping * dangling / nn);
    for (std::size_t u = 0; u < n; ++u) {
      if (adj[u].empty()) continue;
      const double share = damping * pr[u] / static_cast<double>(adj[u].size());
      for (std::size_t v : adj[u]) next[v] += share;
    }
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) diff = std::max(diff, std::abs(next[v] - pr[v]));
    pr.swap(next);
    if (diff < tol) break;
  }
  const double total = std::accumulate(pr.begin(), pr.end(), 0.0);
  for (double& x : pr) x /= total;
  return pr;
}

/// Principal eigenvector of the adjacency matrix, unit L2 norm. Iterates on
/// A + I so bipartite graphs (eigenvalues +-lambda) still converge.
inline std::vector<double> eigenvector(const DirectedGraph& g, double tol = 1e-13, int max_iter = 100000) {
  const auto adj = detail::neighbours(g);
  const std::size_t n = g.size();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = x[v];
      for (std::size_t u : adj[v]) next[v] += x[u];
    }
    double norm = 0.0;
    for (double y : next) norm += y * y;
    norm = std::sqrt(norm);
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= norm;
      diff = std::max(diff, std::abs(next[v] - x[v]));
    }
    x.swap(next);
    if (diff < tol) break;
  }
  return x;
}

}  // namespace sese::centrality
