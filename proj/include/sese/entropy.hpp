#pragma once

// Structural entropy of graphs under encoding trees, and the greedy
// merge/combine optimizer that searches for a low-entropy tree of bounded
// height.

#include <sese/graph.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sese {

enum class EntropyMode { directed, undirected };

/// Flow matrix F and normaliser vol shared by both entropy modes.
///
/// For a vertex set S: volume V_S = sum_{i, j in S} F(i, j) and cut
/// g_S = sum_{i not in S, j in S} F(i, j). Directed mode uses
/// F(i, j) = pi(i) W'(i, j) with vol = sum of in- and out-degrees;
/// undirected mode uses F = W with vol = sum of degrees.
class FlowModel {
 public:
  static FlowModel directed(const StochasticGraph& sg) {
    const std::size_t n = sg.size();
    FlowModel m(EntropyMode::directed, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m.f_[i * n + j] = sg.pi[i] * sg.graph(i, j);
    m.vol_ = sg.volume;
    m.finish();
    return m;
  }

  static FlowModel undirected(const DirectedGraph& g) {
    g.validate();
    if (!g.is_symmetric(1e-12))
      throw std::invalid_argument("undirected entropy requires a symmetric weight matrix");
    const std::size_t n = g.size();
    FlowModel m(EntropyMode::undirected, n);
    std::copy(g.weights().begin(), g.weights().end(), m.f_.begin());
    m.vol_ = g.total_weight();
    if (!(m.vol_ > 0.0)) throw Error("undirected entropy of a zero-volume graph");
    m.finish();
    return m;
  }

  EntropyMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return n_; }
  double vol() const noexcept { return vol_; }
  double flow(std::size_t i, std::size_t j) const noexcept { return f_[i * n_ + j]; }
  /// Volume of a single vertex: pi(v) in directed mode, d_v in undirected mode.
  double vertex_volume(std::size_t v) const noexcept { return in_flow_[v]; }

  double volume_of(const std::vector<std::size_t>& s) const noexcept {
    double v = 0.0;
    for (std::size_t j : s) v += in_flow_[j];
    return v;
  }

  /// Flow from a to b: sum_{i in a, j in b} F(i, j).
  double cross(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) const noexcept {
    double s = 0.0;
    for (std::size_t i : a)
      for (std::size_t j : b) s += flow(i, j);
    return s;
  }

  double cut_of(const std::vector<std::size_t>& s) const noexcept {
    return std::max(0.0, volume_of(s) - cross(s, s));
  }

  /// Colour refinement classes: vertices share a class when no number of
  /// rounds of comparing (in-flow, out-flow, neighbour class) multisets
  /// separates them. Class ids are ranks of the signatures, so they do not
  /// depend on vertex labels.
  const std::vector<std::size_t>& vertex_classes() const noexcept { return classes_; }

 private:
  FlowModel(EntropyMode mode, std::size_t n) : mode_(mode), n_(n), f_(n * n, 0.0) {}

  void finish() {
    in_flow_.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) in_flow_[j] += flow(i, j);
    refine_classes();
  }

  void refine_classes() {
    // Flows are compared after rounding to 1e-9 of the total so that
    // summation order cannot split symmetric vertices.
    const double scale = vol_ > 0.0 ? 1e9 / vol_ : 1.0;
    auto q = [&](double x) { return std::llround(x * scale); };
    using Sig = std::vector<long long>;
    classes_.assign(n_, 0);
    std::size_t n_classes = 0;
    for (std::size_t round = 0; round <= n_; ++round) {
      std::vector<Sig> sig(n_);
      for (std::size_t v = 0; v < n_; ++v) {
        std::vector<std::array<long long, 3>> nb;
        for (std::size_t u = 0; u < n_; ++u) {
          if (u == v || (flow(u, v) == 0.0 && flow(v, u) == 0.0)) continue;
          nb.push_back({static_cast<long long>(classes_[u]), q(flow(v, u)), q(flow(u, v))});
        }
        std::sort(nb.begin(), nb.end());
        Sig& s = sig[v];
        s = {static_cast<long long>(classes_[v]), q(flow(v, v)), q(in_flow_[v])};
        for (const auto& e : nb) s.insert(s.end(), e.begin(), e.end());
      }
      std::vector<Sig> distinct(sig);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (std::size_t v = 0; v < n_; ++v)
        classes_[v] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), sig[v]) - distinct.begin());
      if (distinct.size() == n_classes) break;
      n_classes = distinct.size();
    }
  }

  EntropyMode mode_;
  std::size_t n_;
  std::vector<double> f_;
  std::vector<double> in_flow_;
  std::vector<std::size_t> classes_;
  double vol_ = 0.0;
};

/// -p log2 p with 0 log 0 = 0.
inline double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

/// Shannon entropy (bits) of the stationary distribution.
inline double h1_directed(const StochasticGraph& sg) {
  double h = 0.0;
  for (double p : sg.pi) h += plogp(p);
  return h;
}

/// One-dimensional structural entropy of a symmetric graph.
inline double h1_undirected(const DirectedGraph& g) {
  if (!g.is_symmetric(1e-12))
    throw std::invalid_argument("h1_undirected requires a symmetric weight matrix");
  const double vol = g.total_weight();
  if (!(vol > 0.0)) throw Error("h1_undirected: zero-volume graph");
  double h = 0.0;
  for (std::size_t v = 0; v < g.size(); ++v) h += plogp(g.out_degree(v) / vol);
  return h;
}

using NodeId = std::size_t;

struct TreeNode {
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::vector<std::size_t> vertices;  // sorted
  double volume = 0.0;
  double cut = 0.0;
  bool alive = true;

  bool is_leaf() const noexcept { return children.empty(); }
};

enum class OpKind { merge, combine };

/// Rooted partition hierarchy over the vertices of a flow model. Nodes live
/// in an arena; removed nodes are tombstoned so ids stay stable.
class EncodingTree {
 public:
  explicit EncodingTree(std::shared_ptr<const FlowModel> model) : model_(std::move(model)) {
    const std::size_t n = model_->size();
    TreeNode root;
    root.vertices.resize(n);
    for (std::size_t v = 0; v < n; ++v) root.vertices[v] = v;
    nodes_.push_back(std::move(root));
    for (std::size_t v = 0; v < n; ++v) {
      TreeNode leaf;
      leaf.parent = root_;
      leaf.vertices = {v};
      nodes_[root_].children.push_back(nodes_.size());
      nodes_.push_back(std::move(leaf));
    }
    recompute();
  }

  const FlowModel& model() const noexcept { return *model_; }
  EntropyMode mode() const noexcept { return model_->mode(); }
  NodeId root() const noexcept { return root_; }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t vertex_count() const noexcept { return model_->size(); }

  std::vector<NodeId> live_nodes() const {
    std::vector<NodeId> out;
    for (NodeId id = 0; id < nodes_.size(); ++id)
      if (nodes_[id].alive) out.push_back(id);
    return out;
  }

  std::size_t depth(NodeId id) const {
    std::size_t d = 0;
    for (auto p = nodes_.at(id).parent; p; p = nodes_[*p].parent) ++d;
    return d;
  }

  /// Longest downward path from id to a leaf, in edges.
  std::size_t subtree_height(NodeId id) const {
    std::size_t h = 0;
    for (NodeId c : nodes_.at(id).children) h = std::max(h, 1 + subtree_height(c));
    return h;
  }

  std::size_t height() const { return subtree_height(root_); }

  NodeId leaf_of(std::size_t vertex) const {
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      const auto& nd = nodes_[id];
      if (nd.alive && nd.is_leaf() && nd.vertices.front() == vertex) return id;
    }
    throw std::out_of_range("no leaf holds vertex " + std::to_string(vertex));
  }

  /// -(g / vol) log2(V / V_parent); zero when g = 0.
  double node_entropy(NodeId id) const {
    const auto& nd = nodes_.at(id);
    if (!nd.parent) throw std::invalid_argument("node_entropy is undefined for the root");
    return term(nd.cut, nd.volume, nodes_[*nd.parent].volume);
  }

  double entropy() const {
    double h = 0.0;
    for (NodeId id = 0; id < nodes_.size(); ++id)
      if (nodes_[id].alive && id != root_) h += node_entropy(id);
    return h;
  }

  /// Sum of node entropies on the path from the root (exclusive) to id.
  double path_entropy(NodeId id) const {
    double h = 0.0;
    for (NodeId cur = id; nodes_.at(cur).parent; cur = *nodes_[cur].parent) h += node_entropy(cur);
    return h;
  }

  bool siblings(NodeId a, NodeId b) const {
    return a != b && a < nodes_.size() && b < nodes_.size() && nodes_[a].alive &&
           nodes_[b].alive && nodes_[a].parent && nodes_[a].parent == nodes_[b].parent;
  }

  /// Whether the operation keeps every leaf at depth <= max_height.
  bool fits(OpKind kind, NodeId a, NodeId b, std::size_t max_height) const {
    const std::size_t d = depth(a);
    if (kind == OpKind::merge) {
      const bool pushes_leaf = nodes_[a].is_leaf() || nodes_[b].is_leaf();
      return !pushes_leaf || d + 1 <= max_height;
    }
    return d + 1 + std::max(subtree_height(a), subtree_height(b)) <= max_height;
  }

  /// Entropy before minus entropy after applying the operation, evaluated
  /// from the nodes it touches; the tree is not modified.
  double delta(OpKind kind, NodeId a, NodeId b) const {
    require_siblings(a, b);
    const auto& na = nodes_[a];
    const auto& nb = nodes_[b];
    const double vp = nodes_[*na.parent].volume;
    const double vd = na.volume + nb.volume;
    const double gd = std::max(0.0, na.cut + nb.cut - model_->cross(na.vertices, nb.vertices) -
                                        model_->cross(nb.vertices, na.vertices));
    double before = term(na.cut, na.volume, vp) + term(nb.cut, nb.volume, vp);
    double after = term(gd, vd, vp);
    if (kind == OpKind::combine) {
      after += term(na.cut, na.volume, vd) + term(nb.cut, nb.volume, vd);
      return before - after;
    }
    for (const TreeNode* x : {&na, &nb}) {
      if (x->is_leaf()) {
        after += term(x->cut, x->volume, vd);
      } else {
        for (NodeId c : x->children) {
          before += term(nodes_[c].cut, nodes_[c].volume, x->volume);
          after += term(nodes_[c].cut, nodes_[c].volume, vd);
        }
      }
    }
    return before - after;
  }

  /// Merge siblings a and b into a new node whose children are the former
  /// contents of a and b (a leaf contributes itself, an internal node its
  /// children). Returns the new node.
  NodeId merge(NodeId a, NodeId b) {
    require_siblings(a, b);
    const NodeId d = make_joint(a, b);
    for (NodeId x : {a, b}) {
      if (nodes_[x].is_leaf()) {
        adopt(d, x);
      } else {
        for (NodeId c : nodes_[x].children) adopt(d, c);
        nodes_[x].children.clear();
        nodes_[x].alive = false;
        nodes_[x].parent.reset();
      }
    }
    sort_children(d);
    bump();
    return d;
  }

  /// Insert a new node between the common parent and the subtrees a, b.
  NodeId combine(NodeId a, NodeId b) {
    require_siblings(a, b);
    const NodeId d = make_joint(a, b);
    adopt(d, a);
    adopt(d, b);
    sort_children(d);
    bump();
    return d;
  }

  NodeId apply(OpKind kind, NodeId a, NodeId b) {
    return kind == OpKind::merge ? merge(a, b) : combine(a, b);
  }

  /// Recompute every volume and cut from the flow model.
  void recompute() {
    for (auto& nd : nodes_) {
      if (!nd.alive) continue;
      nd.volume = model_->volume_of(nd.vertices);
      nd.cut = nd.parent ? model_->cut_of(nd.vertices) : 0.0;
    }
    ops_since_recompute_ = 0;
  }

  /// Throws Error if the tree violates the encoding-tree axioms.
  void validate() const {
    const auto& root = nodes_.at(root_);
    if (root.parent || !root.alive) throw Error("root is detached or dead");
    std::vector<std::size_t> all(vertex_count());
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
    if (root.vertices != all) throw Error("root does not hold every vertex");
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      const auto& nd = nodes_[id];
      if (!nd.alive) continue;
      if (nd.is_leaf()) {
        if (nd.vertices.size() != 1) throw Error("leaf " + std::to_string(id) + " is not a singleton");
        continue;
      }
      std::vector<std::size_t> joined;
      for (NodeId c : nd.children) {
        const auto& ch = nodes_.at(c);
        if (!ch.alive || ch.parent != id) throw Error("broken parent link at " + std::to_string(c));
        joined.insert(joined.end(), ch.vertices.begin(), ch.vertices.end());
      }
      std::sort(joined.begin(), joined.end());
      if (joined != nd.vertices)
        throw Error("children of node " + std::to_string(id) + " do not partition it");
    }
  }

  /// Vertex sets of the nodes at the given depth; leaves above that depth
  /// are carried down as singletons.
  std::vector<std::vector<std::size_t>> level_partition(std::size_t level) const {
    std::vector<std::vector<std::size_t>> out;
    std::function<void(NodeId, std::size_t)> walk = [&](NodeId id, std::size_t d) {
      const auto& nd = nodes_[id];
      if (d == level || nd.is_leaf()) {
        out.push_back(nd.vertices);
        return;
      }
      for (NodeId c : nd.children) walk(c, d + 1);
    };
    walk(root_, 0);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::string to_text() const {
    std::ostringstream os;
    std::function<void(NodeId, std::size_t)> walk = [&](NodeId id, std::size_t d) {
      const auto& nd = nodes_[id];
      os << std::string(2 * d, ' ') << '{';
      for (std::size_t i = 0; i < nd.vertices.size(); ++i) os << (i ? "," : "") << nd.vertices[i];
      os << "} V=" << nd.volume << " g=" << nd.cut;
      if (nd.parent) os << " H=" << node_entropy(id);
      os << '\n';
      for (NodeId c : nd.children) walk(c, d + 1);
    };
    walk(root_, 0);
    return os.str();
  }

  nlohmann::json to_json() const {
    std::function<nlohmann::json(NodeId)> walk = [&](NodeId id) {
      const auto& nd = nodes_[id];
      nlohmann::json j;
      j["vertices"] = nd.vertices;
      j["volume"] = nd.volume;
      j["cut"] = nd.cut;
      j["entropy"] = nd.parent ? node_entropy(id) : 0.0;
      if (!nd.is_leaf()) {
        j["children"] = nlohmann::json::array();
        for (NodeId c : nd.children) j["children"].push_back(walk(c));
      }
      return j;
    };
    return walk(root_);
  }

  std::size_t ops_since_recompute() const noexcept { return ops_since_recompute_; }

 private:
  double term(double g, double v, double vp) const {
    if (g <= 0.0) return 0.0;
    return -(g / model_->vol()) * std::log2(v / vp);
  }

  void require_siblings(NodeId a, NodeId b) const {
    if (!siblings(a, b))
      throw std::invalid_argument("nodes " + std::to_string(a) + " and " + std::to_string(b) +
                                  " are not siblings");
  }

  NodeId make_joint(NodeId a, NodeId b) {
    const NodeId parent = *nodes_[a].parent;
    TreeNode d;
    d.parent = parent;
    std::merge(nodes_[a].vertices.begin(), nodes_[a].vertices.end(), nodes_[b].vertices.begin(),
               nodes_[b].vertices.end(), std::back_inserter(d.vertices));
    d.volume = nodes_[a].volume + nodes_[b].volume;
    d.cut = std::max(0.0, nodes_[a].cut + nodes_[b].cut -
                              model_->cross(nodes_[a].vertices, nodes_[b].vertices) -
                              model_->cross(nodes_[b].vertices, nodes_[a].vertices));
    const NodeId id = nodes_.size();
    nodes_.push_back(std::move(d));
    auto& pc = nodes_[parent].children;
    pc.erase(std::remove_if(pc.begin(), pc.end(), [&](NodeId c) { return c == a || c == b; }),
             pc.end());
    pc.push_back(id);
    sort_children(parent);
    return id;
  }

  void adopt(NodeId parent, NodeId child) {
    nodes_[child].parent = parent;
    nodes_[parent].children.push_back(child);
  }

  void sort_children(NodeId id) {
    auto& ch = nodes_[id].children;
    std::sort(ch.begin(), ch.end(),
              [&](NodeId x, NodeId y) { return nodes_[x].vertices.front() < nodes_[y].vertices.front(); });
  }

  void bump() {
    if (++ops_since_recompute_ >= kRecomputeEvery) recompute();
  }

  static constexpr std::size_t kRecomputeEvery = 64;

  std::shared_ptr<const FlowModel> model_;
  std::vector<TreeNode> nodes_;
  NodeId root_ = 0;
  std::size_t ops_since_recompute_ = 0;
};

/// Flat tree over the stationary flow of a directed graph.
inline EncodingTree init_flat_tree(const StochasticGraph& sg) {
  return EncodingTree(std::make_shared<const FlowModel>(FlowModel::directed(sg)));
}

/// Flat tree over a symmetric graph with degree-based volumes.
inline EncodingTree init_flat_tree(const DirectedGraph& undirected) {
  return EncodingTree(std::make_shared<const FlowModel>(FlowModel::undirected(undirected)));
}

inline double node_entropy(const EncodingTree& t, NodeId id) { return t.node_entropy(id); }
inline double tree_entropy(const EncodingTree& t) { return t.entropy(); }

inline EncodingTree merge_op(EncodingTree t, NodeId a, NodeId b) {
  t.merge(a, b);
  return t;
}

inline EncodingTree combine_op(EncodingTree t, NodeId a, NodeId b) {
  t.combine(a, b);
  return t;
}

inline double delta_sese(const EncodingTree& t, NodeId a, NodeId b, OpKind kind) {
  return t.delta(kind, a, b);
}

struct TreeStep {
  OpKind kind;
  NodeId a;
  NodeId b;
  double delta;
};

struct OptimizeOptions {
  std::size_t max_height = 2;
  double min_gain = 1e-12;
  double tie_tolerance = 1e-12;
  std::function<void(const EncodingTree&, const TreeStep&)> on_step;
};

namespace detail {

struct Candidate {
  NodeId a = 0, b = 0;
  double delta = -std::numeric_limits<double>::infinity();
  // Equal gains are broken first by the refinement classes of the two
  // nodes, then by their smallest vertices.
  std::vector<std::size_t> lo, hi;
  std::pair<std::size_t, std::size_t> reps{};
  bool valid = false;

  bool key_less(const Candidate& o) const { return std::tie(lo, hi, reps) < std::tie(o.lo, o.hi, o.reps); }
};

inline std::vector<std::size_t> class_profile(const EncodingTree& t, NodeId id) {
  const auto& cls = t.model().vertex_classes();
  std::vector<std::size_t> out;
  for (std::size_t v : t.node(id).vertices) out.push_back(cls[v]);
  std::sort(out.begin(), out.end());
  return out;
}

inline Candidate best_candidate(const EncodingTree& t, OpKind kind, const OptimizeOptions& opts) {
  Candidate best;
  for (NodeId parent : t.live_nodes()) {
    const auto& ch = t.node(parent).children;
    for (std::size_t x = 0; x < ch.size(); ++x) {
      for (std::size_t y = x + 1; y < ch.size(); ++y) {
        const NodeId a = ch[x], b = ch[y];
        if (!t.fits(kind, a, b, opts.max_height)) continue;
        const double d = t.delta(kind, a, b);
        if (best.valid && d < best.delta - opts.tie_tolerance) continue;
        Candidate c{a, b, d, class_profile(t, a), class_profile(t, b), {}, true};
        const std::size_t ra = t.node(a).vertices.front(), rb = t.node(b).vertices.front();
        if (c.hi < c.lo) std::swap(c.lo, c.hi);
        c.reps = {std::min(ra, rb), std::max(ra, rb)};
        if (!best.valid || d > best.delta + opts.tie_tolerance || c.key_less(best)) best = std::move(c);
      }
    }
  }
  return best;
}

}  // namespace detail

/// Greedy entropy minimisation. Each round applies the best merge if it
/// lowers the entropy, otherwise the best combine, otherwise stops.
/// Operations that would push a leaf below max_height are not considered.
inline EncodingTree optimize_tree(EncodingTree t, const OptimizeOptions& opts) {
  if (opts.max_height < 1) throw std::invalid_argument("optimize_tree: K must be >= 1");
  for (;;) {
    bool applied = false;
    for (OpKind kind : {OpKind::merge, OpKind::combine}) {
      const auto best = detail::best_candidate(t, kind, opts);
      if (!best.valid || !(best.delta > opts.min_gain)) continue;
      t.apply(kind, best.a, best.b);
      if (opts.on_step) opts.on_step(t, TreeStep{kind, best.a, best.b, best.delta});
      applied = true;
      break;
    }
    if (!applied) break;
  }
  t.recompute();
  return t;
}

inline EncodingTree optimize_tree(const StochasticGraph& sg, std::size_t k) {
  OptimizeOptions opts;
  opts.max_height = k;
  return optimize_tree(init_flat_tree(sg), opts);
}

inline EncodingTree optimize_tree(const DirectedGraph& undirected, std::size_t k) {
  OptimizeOptions opts;
  opts.max_height = k;
  return optimize_tree(init_flat_tree(undirected), opts);
}

}  // namespace sese
