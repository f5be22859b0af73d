#pragma once

// Directed semantic graph from pairwise NLI probabilities, with kNN
// sparsification chosen by minimising one-dimensional directed entropy.

#include <sese/entropy.hpp>
#include <sese/graph.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sese {

/// (p_entail, p_neutral, p_contradict) for one premise -> hypothesis pair.
using NliTriple = std::array<double, 3>;

inline constexpr double kSimplexTolerance = 1e-6;

inline bool is_simplex(const NliTriple& t, double tol = kSimplexTolerance) {
  for (double p : t)
    if (!std::isfinite(p) || p < 0.0) return false;
  return std::abs(t[0] + t[1] + t[2] - 1.0) <= tol;
}

/// N x N matrix of directional NLI triples; the diagonal is never read.
class EntailmentMatrix {
 public:
  EntailmentMatrix() = default;

  EntailmentMatrix(std::size_t n, std::vector<NliTriple> probs) : n_(n), probs_(std::move(probs)) {
    if (probs_.size() != n_ * n_)
      throw std::invalid_argument("entailment matrix must hold n*n triples");
    validate();
  }

  static EntailmentMatrix from_nested(const std::vector<std::vector<NliTriple>>& rows) {
    const std::size_t n = rows.size();
    std::vector<NliTriple> flat;
    flat.reserve(n * n);
    for (const auto& r : rows) {
      if (r.size() != n) throw std::invalid_argument("entailment matrix is not square");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return EntailmentMatrix(n, std::move(flat));
  }

  std::size_t size() const noexcept { return n_; }
  const NliTriple& operator()(std::size_t i, std::size_t j) const noexcept { return probs_[i * n_ + j]; }

  void validate() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        if (!is_simplex((*this)(i, j)))
          throw std::invalid_argument("entailment triple (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") is not a probability simplex");
      }
    }
  }

 private:
  std::size_t n_ = 0;
  std::vector<NliTriple> probs_;
};

/// W(i, j) = 1 * p_e + 1/2 * p_n + 0 * p_c for i != j.
inline DirectedGraph entailment_weights(const EntailmentMatrix& em) {
  em.validate();
  const std::size_t n = em.size();
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& t = em(i, j);
      g.at(i, j) = std::clamp(t[0] + 0.5 * t[1], 0.0, 1.0);
    }
  }
  return g;
}

/// Keep the k heaviest outgoing edges of every vertex. Ties at the cutoff
/// go to the smaller column index.
inline DirectedGraph knn_sparsify(const DirectedGraph& g, std::size_t k) {
  const std::size_t n = g.size();
  if (k < 1 || k + 1 > n)
    throw std::invalid_argument("knn_sparsify: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(n == 0 ? 0 : n - 1) + "]");
  DirectedGraph out(n);
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i) {
    cols.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cols.push_back(j);
    std::stable_sort(cols.begin(), cols.end(),
                     [&](std::size_t a, std::size_t b) { return g(i, a) > g(i, b); });
    for (std::size_t r = 0; r < k; ++r) out.at(i, cols[r]) = g(i, cols[r]);
  }
  out.set_labels(g.labels());
  return out;
}

struct SparsifiedGraph {
  StochasticGraph graph;
  std::size_t k_star = 1;
  std::map<std::size_t, double> h1_by_k;
};

/// Smallest k with H(k-1) >= H(k) <= H(k+1), the sequence padded with +inf
/// at both ends; falls back to the global argmin (smallest k on ties).
inline std::size_t select_k_star(const std::map<std::size_t, double>& h1_by_k, double tol = 1e-12) {
  if (h1_by_k.empty()) throw std::invalid_argument("select_k_star: empty audit trail");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, double>> seq(h1_by_k.begin(), h1_by_k.end());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double prev = i == 0 ? inf : seq[i - 1].second;
    const double next = i + 1 == seq.size() ? inf : seq[i + 1].second;
    const double h = seq[i].second;
    if (prev >= h - tol && h <= next + tol) return seq[i].first;
  }
  auto best = std::min_element(seq.begin(), seq.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
  return best->first;
}

inline SparsifiedGraph adaptive_sparsify(const DirectedGraph& g, const EpsPolicy& eps = {}) {
  const std::size_t n = g.size();
  if (n < 2) throw std::invalid_argument("adaptive_sparsify: need at least two responses");
  SparsifiedGraph out;
  std::map<std::size_t, StochasticGraph> candidates;
  for (std::size_t k = 1; k < n; ++k) {
    auto sg = adjust(knn_sparsify(g, k), eps);
    out.h1_by_k[k] = h1_directed(sg);
    candidates.emplace(k, std::move(sg));
  }
  out.k_star = select_k_star(out.h1_by_k);
  out.graph = std::move(candidates.at(out.k_star));
  return out;
}

inline SparsifiedGraph build_semantic_graph(const EntailmentMatrix& em) {
  return adaptive_sparsify(entailment_weights(em));
}

}  // namespace sese
