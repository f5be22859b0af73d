#pragma once

// Dense directed weighted graphs, strong-connectivity repair and the
// stationary distribution of the resulting random walk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <tuple>
#include <vector>

namespace sese {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the stationary solver exhausts its iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Square matrix of non-negative edge weights, weights(i, j) = W(i -> j).
class DirectedGraph {
 public:
  DirectedGraph() = default;

  explicit DirectedGraph(std::size_t n) : n_(n), w_(n * n, 0.0) {}

  /// Validating constructor: finite, non-negative, zero diagonal.
  DirectedGraph(std::size_t n, std::vector<double> weights) : n_(n), w_(std::move(weights)) {
    if (w_.size() != n_ * n_) {
      throw std::invalid_argument("weight matrix is not " + std::to_string(n_) + "x" +
                                  std::to_string(n_));
    }
    validate();
  }

  static DirectedGraph from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> w;
    w.reserve(n * n);
    for (const auto& r : rows) {
      if (r.size() != n) throw std::invalid_argument("weight matrix is not square");
      w.insert(w.end(), r.begin(), r.end());
    }
    return DirectedGraph(n, std::move(w));
  }

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return w_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) noexcept { return w_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {w_.data() + i * n_, n_};
  }
  std::span<double> row(std::size_t i) noexcept { return {w_.data() + i * n_, n_}; }
  std::span<const double> weights() const noexcept { return w_; }

  double out_degree(std::size_t i) const noexcept {
    auto r = row(i);
    return std::accumulate(r.begin(), r.end(), 0.0);
  }
  double in_degree(std::size_t j) const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, j);
    return s;
  }
  double total_weight() const noexcept { return std::accumulate(w_.begin(), w_.end(), 0.0); }

  bool has_edge(std::size_t i, std::size_t j) const noexcept { return (*this)(i, j) > 0.0; }

  bool is_symmetric(double tol = 0.0) const noexcept {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != n_)
      throw std::invalid_argument("label count does not match vertex count");
    labels_ = std::move(labels);
  }

  /// Throws std::invalid_argument naming the first offending entry.
  void validate() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = (*this)(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw std::invalid_argument("weight (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") must be finite and non-negative");
        }
        if (i == j && v != 0.0) {
          throw std::invalid_argument("self-loop at vertex " + std::to_string(i));
        }
      }
    }
  }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
  std::vector<std::string> labels_;
};

using Components = std::vector<std::vector<std::size_t>>;

/// Tarjan's algorithm over positive-weight edges. Components come out in
/// reverse topological order of the condensation (sinks first); vertices
/// within a component are sorted.
inline Components tarjan_scc(const DirectedGraph& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (vertex, next successor)
  Components out;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      auto& [v, next] = call.back();
      bool descended = false;
      while (next < n) {
        const std::size_t w = next++;
        if (!g.has_edge(v, w)) continue;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;

      const std::size_t done = v;
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return out;
}

/// Vertices reachable from `from` over positive-weight edges (including itself).
inline std::vector<bool> reachable_from(const DirectedGraph& g, std::size_t from) {
  std::vector<bool> seen(g.size(), false);
  std::vector<std::size_t> todo{from};
  seen[from] = true;
  while (!todo.empty()) {
    const std::size_t v = todo.back();
    todo.pop_back();
    for (std::size_t w = 0; w < g.size(); ++w) {
      if (!seen[w] && g.has_edge(v, w)) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

/// Weight given to sink -> source repair edges.
struct EpsPolicy {
  enum class Kind { min_positive, fixed };
  Kind kind = Kind::min_positive;
  double value = 1e-6;  // fixed weight, or the fallback for graphs with no edges

  static EpsPolicy fixed(double v) { return {Kind::fixed, v}; }

  double resolve(const DirectedGraph& g) const {
    if (kind == Kind::fixed) return value;
    double best = std::numeric_limits<double>::infinity();
    for (double w : g.weights())
      if (w > 0.0) best = std::min(best, w);
    return std::isfinite(best) ? best : value;
  }
};

struct RepairEdge {
  std::size_t from;
  std::size_t to;
  double weight;
  friend bool operator==(const RepairEdge&, const RepairEdge&) = default;
};

/// Row-stochastic, strongly connected graph together with its stationary
/// distribution. Produced only by adjust().
struct StochasticGraph {
  DirectedGraph graph;
  std::vector<double> pi;
  double volume = 0.0;  // sum of in- and out-degrees
  std::vector<RepairEdge> added_edges;

  std::size_t size() const noexcept { return graph.size(); }
};

struct StationaryOptions {
  double tolerance = 1e-12;
  int max_squarings = 128;
};

/// Stationary distribution of an irreducible row-stochastic matrix.
///
/// Works on the lazy chain P = (A + I) / 2, which has the same stationary
/// vector as A but is aperiodic, so P^m converges to the rank-one matrix
/// 1 pi^T. P^m is advanced by repeated squaring (m = 2, 4, 8, ...) until the
/// rows agree to `tolerance` in the max norm. Since pi is a convex
/// combination of the rows of P^m, the row spread bounds the error of any
/// row against pi, so the stopping rule is a certificate rather than a
/// stall detector.
inline std::vector<double> stationary_distribution(const DirectedGraph& a,
                                                   const StationaryOptions& opts = {}) {
  const std::size_t n = a.size();
  if (n == 0) throw std::invalid_argument("stationary_distribution: empty graph");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a.out_degree(i) - 1.0) > 1e-9)
      throw std::invalid_argument("stationary_distribution: row " + std::to_string(i) +
                                  " is not stochastic");
  }
  if (n == 1) return {1.0};

  std::vector<double> p(n * n), next(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p[i * n + j] = 0.5 * a(i, j) + (i == j ? 0.5 : 0.0);

  auto spread = [&](const std::vector<double>& m) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double lo = m[j], hi = m[j];
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, m[i * n + j]);
        hi = std::max(hi, m[i * n + j]);
      }
      worst = std::max(worst, hi - lo);
    }
    return worst;
  };

  auto column_means = [&](const std::vector<double>& m) {
    std::vector<double> pi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pi[j] += m[i * n + j];
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& x : pi) x /= total;
    return pi;
  };

  for (int it = 0; it < opts.max_squarings; ++it) {
    if (spread(p) <= opts.tolerance) return column_means(p);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double pik = p[i * n + k];
        if (pik == 0.0) continue;
        const double* src = &p[k * n];
        double* dst = &next[i * n];
        for (std::size_t j = 0; j < n; ++j) dst[j] += pik * src[j];
      }
      // Rows drift off the simplex by rounding; pull them back.
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += next[i * n + j];
      for (std::size_t j = 0; j < n; ++j) next[i * n + j] /= s;
    }
    p.swap(next);
  }
  // The row spread bounds the error of the best available estimate.
  const double bound = spread(p);
  throw ConvergenceError("stationary distribution did not converge (error bound " + std::to_string(bound) + ")",
                         bound);
}

/// Adjusting operator: make the graph strongly connected and row-stochastic.
///
/// 1. Rows with zero out-degree become uniform over the other vertices.
/// 2. Each sink SCC is linked to each source SCC it cannot reach, with an
///    eps edge from every vertex of the sink to every vertex of the source.
/// 3. Rows are divided by their out-degree.
/// Edges added in steps 1 and 2 are reported in added_edges.
inline StochasticGraph adjust(const DirectedGraph& input, const EpsPolicy& eps_policy = {}) {
  const std::size_t n = input.size();
  if (n == 0) throw std::invalid_argument("adjust: graph has no vertices");

  StochasticGraph out;
  DirectedGraph g = input;

  if (n == 1) {
    // The lone vertex can only walk to itself; an adjusted single vertex
    // already carries that loop, so it is accepted here.
    if (!std::isfinite(g(0, 0)) || g(0, 0) < 0.0)
      throw std::invalid_argument("weight (0,0) must be finite and non-negative");
    g.at(0, 0) = 1.0;
    out.graph = std::move(g);
    out.pi = {1.0};
    out.volume = 2.0;
    return out;
  }
  input.validate();

  for (std::size_t i = 0; i < n; ++i) {
    if (g.out_degree(i) > 0.0) continue;
    const double w = 1.0 / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      g.at(i, j) = w;
      out.added_edges.push_back({i, j, w});
    }
  }

  const double eps = eps_policy.resolve(g);
  const Components sccs = tarjan_scc(g);
  if (sccs.size() > 1) {
    std::vector<std::size_t> comp_of(n);
    for (std::size_t c = 0; c < sccs.size(); ++c)
      for (std::size_t v : sccs[c]) comp_of[v] = c;
    std::vector<bool> has_in(sccs.size(), false), has_out(sccs.size(), false);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (g.has_edge(i, j) && comp_of[i] != comp_of[j]) {
          has_out[comp_of[i]] = true;
          has_in[comp_of[j]] = true;
        }
      }
    }
    // Every vertex of a sink component links to every vertex of each source
    // component it cannot reach in the unrepaired graph, so the result does
    // not depend on how vertices are numbered.
    const DirectedGraph before = g;
    for (std::size_t c = 0; c < sccs.size(); ++c) {
      if (has_out[c]) continue;
      const auto reach = reachable_from(before, sccs[c].front());
      for (std::size_t d = 0; d < sccs.size(); ++d) {
        if (has_in[d] || d == c || reach[sccs[d].front()]) continue;
        for (std::size_t s : sccs[c])
          for (std::size_t t : sccs[d]) {
            g.at(s, t) = eps;
            out.added_edges.push_back({s, t, eps});
          }
      }
    }
    std::sort(out.added_edges.begin(), out.added_edges.end(),
              [](const RepairEdge& x, const RepairEdge& y) { return std::tie(x.from, x.to) < std::tie(y.from, y.to); });
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double d = g.out_degree(i);
    for (double& w : g.row(i)) w /= d;
  }

  out.pi = stationary_distribution(g);
  out.volume = 0.0;
  for (std::size_t v = 0; v < n; ++v) out.volume += g.out_degree(v) + g.in_degree(v);
  out.graph = std::move(g);
  return out;
}

}  // namespace sese
