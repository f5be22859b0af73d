#pragma once

// Claim-level SeSE for long-form answers: an encoding tree over the
// response-claim bipartite graph, scored per claim along its root-to-leaf
// path.

#include <sese/centrality.hpp>
#include <sese/entropy.hpp>
#include <sese/graph.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sese {

struct ClaimRecord {
  std::string id;
  std::string question;
  std::vector<std::string> claims;
  std::vector<std::string> responses;
  /// rc_entails[r][c] == 1 iff response r entails claim c.
  std::vector<std::vector<std::uint8_t>> rc_entails;
  std::optional<std::vector<bool>> labels;

  std::size_t n_responses() const noexcept { return rc_entails.size(); }
  std::size_t n_claims() const noexcept { return rc_entails.empty() ? claims.size() : rc_entails.front().size(); }

  void validate() const {
    if (rc_entails.empty()) throw std::invalid_argument("claim record " + id + ": need N >= 1 responses");
    const std::size_t m = rc_entails.front().size();
    if (m == 0) throw std::invalid_argument("claim record " + id + ": need M >= 1 claims");
    for (const auto& row : rc_entails) {
      if (row.size() != m) throw std::invalid_argument("claim record " + id + ": ragged rc_entails");
      for (auto v : row)
        if (v > 1) throw std::invalid_argument("claim record " + id + ": rc_entails must be 0/1");
    }
    if (!claims.empty() && claims.size() != m)
      throw std::invalid_argument("claim record " + id + ": claim count does not match rc_entails");
    if (!responses.empty() && responses.size() != rc_entails.size())
      throw std::invalid_argument("claim record " + id + ": response count does not match rc_entails");
    if (labels && labels->size() != m)
      throw std::invalid_argument("claim record " + id + ": label count does not match claims");
  }
};

struct ClaimScores {
  std::vector<double> sese;
  /// Negated centralities: higher means less central, i.e. more uncertain.
  std::map<std::string, std::vector<double>> baselines;
  std::size_t tree_height = 0;
  std::optional<nlohmann::json> tree;
};

inline constexpr std::size_t kDefaultClaimHeight = 2;
inline constexpr double kIsolatedRepairWeight = 1e-6;

/// Symmetric (N + M)-vertex graph: responses 0..N-1, claims N..N+M-1, unit
/// edges where a response entails a claim.
inline DirectedGraph build_bipartite(const ClaimRecord& cr) {
  cr.validate();
  const std::size_t n = cr.n_responses(), m = cr.n_claims();
  DirectedGraph g(n + m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (cr.rc_entails[r][c]) g.at(r, n + c) = g.at(n + c, r) = 1.0;
    }
  }
  return g;
}

/// Attach every isolated vertex to all vertices on the opposite side with a
/// tiny symmetric weight so degree-based volumes are positive.
inline DirectedGraph repair_isolated(DirectedGraph g, std::size_t n_responses,
                                     double weight = kIsolatedRepairWeight) {
  const std::size_t total = g.size();
  std::vector<bool> isolated(total);
  for (std::size_t v = 0; v < total; ++v) isolated[v] = g.out_degree(v) == 0.0;
  for (std::size_t v = 0; v < total; ++v) {
    if (!isolated[v]) continue;
    const bool is_response = v < n_responses;
    const std::size_t lo = is_response ? n_responses : 0;
    const std::size_t hi = is_response ? total : n_responses;
    for (std::size_t u = lo; u < hi; ++u) {
      if (g(v, u) == 0.0) g.at(v, u) = g.at(u, v) = weight;
    }
  }
  return g;
}

/// Negated centralities of the claim vertices on the raw bipartite graph.
inline std::map<std::string, std::vector<double>> centrality_baselines(const ClaimRecord& cr) {
  const DirectedGraph g = build_bipartite(cr);
  const std::size_t n = cr.n_responses(), m = cr.n_claims();
  auto claims_only = [&](const std::vector<double>& all) {
    std::vector<double> out(m);
    for (std::size_t c = 0; c < m; ++c) out[c] = 0.0 - all[n + c];  // no -0.0
    return out;
  };
  return {
      {"betweenness", claims_only(centrality::betweenness(g))},
      {"closeness", claims_only(centrality::closeness(g))},
      {"eigenvector", claims_only(centrality::eigenvector(g))},
      {"pagerank", claims_only(centrality::pagerank(g))},
  };
}

/// Per-claim SeSE: the sum of node entropies on the path from the root to
/// the claim's leaf in the optimised undirected encoding tree.
inline ClaimScores claim_sese(const ClaimRecord& cr, std::size_t k = kDefaultClaimHeight,
                              bool keep_tree = false) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  const std::size_t n = cr.n_responses();
  const DirectedGraph g = repair_isolated(build_bipartite(cr), n);
  const EncodingTree tree = optimize_tree(g, k);

  ClaimScores out;
  out.sese.resize(cr.n_claims());
  for (std::size_t c = 0; c < cr.n_claims(); ++c) out.sese[c] = tree.path_entropy(tree.leaf_of(n + c));
  out.baselines = centrality_baselines(cr);
  out.tree_height = tree.height();
  if (keep_tree) out.tree = tree.to_json();
  return out;
}

}  // namespace sese
