#pragma once

// Sentence-level scoring: SeSE over the sparsified directed entailment graph,
// plus the discrete semantic entropy baseline.

#include <sese/entropy.hpp>
#include <sese/eval.hpp>
#include <sese/semantic_graph.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sese {

struct QueryRecord {
  std::string id;
  std::string question;
  std::string greedy_response;
  std::vector<std::string> responses;
  EntailmentMatrix entailment;
  std::optional<bool> label;

  void validate() const {
    if (responses.size() < 2) throw std::invalid_argument("query " + id + ": need N >= 2 responses");
    if (entailment.size() != responses.size())
      throw std::invalid_argument("query " + id + ": entailment matrix size does not match N");
  }
};

struct UncertaintyReport {
  std::string id;
  double sese = 0.0;
  std::size_t k_star = 0;
  std::size_t tree_height = 0;
  std::optional<double> dse;
  std::optional<bool> label;
  std::map<std::string, double> extras;
};

inline constexpr std::size_t kDefaultSentenceHeight = 3;

/// Greedy first-fit clustering by bidirectional entailment against each
/// cluster's first member. Entailment must be the argmax class in both
/// directions; on exact ties entailment wins.
inline std::vector<std::size_t> cluster_responses(const EntailmentMatrix& em) {
  auto entails = [&](std::size_t i, std::size_t j) {
    const auto& t = em(i, j);
    return t[0] >= t[1] && t[0] >= t[2];
  };
  std::vector<std::size_t> ids(em.size());
  std::vector<std::size_t> heads;
  for (std::size_t i = 0; i < em.size(); ++i) {
    std::size_t c = 0;
    for (; c < heads.size(); ++c)
      if (entails(i, heads[c]) && entails(heads[c], i)) break;
    if (c == heads.size()) heads.push_back(i);
    ids[i] = c;
  }
  return ids;
}

/// Shannon entropy (bits) of the cluster-frequency distribution.
inline double cluster_entropy(const std::vector<std::size_t>& cluster_ids) {
  std::map<std::size_t, std::size_t> sizes;
  for (std::size_t c : cluster_ids) ++sizes[c];
  const auto n = static_cast<double>(cluster_ids.size());
  double h = 0.0;
  for (const auto& [_, s] : sizes) h += plogp(static_cast<double>(s) / n);
  return h;
}

inline double dse_baseline(const QueryRecord& q) { return cluster_entropy(cluster_responses(q.entailment)); }

/// SeSE of one query: tree entropy of the optimised height-K encoding tree
/// of the adaptively sparsified entailment graph.
inline UncertaintyReport sese_sentence(const QueryRecord& q, std::size_t k = kDefaultSentenceHeight) {
  q.validate();
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  const DirectedGraph weights = entailment_weights(q.entailment);
  const SparsifiedGraph sparse = adaptive_sparsify(weights);
  const EncodingTree flat = init_flat_tree(sparse.graph);
  OptimizeOptions opts;
  opts.max_height = k;
  const EncodingTree tree = optimize_tree(flat, opts);

  UncertaintyReport r;
  r.id = q.id;
  r.sese = tree.entropy();
  r.k_star = sparse.k_star;
  r.tree_height = tree.height();
  r.dse = dse_baseline(q);
  r.label = q.label;
  r.extras["n"] = static_cast<double>(q.responses.size());
  r.extras["h1"] = sparse.h1_by_k.at(sparse.k_star);
  r.extras["flat_tree_entropy"] = flat.entropy();

  DirectedGraph sym(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    for (std::size_t j = 0; j < weights.size(); ++j)
      sym.at(i, j) = 0.5 * (weights(i, j) + weights(j, i));
  for (const auto& [name, value] : graph_uncertainty_ablations(sym)) r.extras[name] = value;
  return r;
}

}  // namespace sese
