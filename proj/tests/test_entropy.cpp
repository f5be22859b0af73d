#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

using sese::DirectedGraph;
using sese::EncodingTree;
using sese::OpKind;

namespace {

DirectedGraph complete(std::size_t n, double w = 1.0) {
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) g.at(i, j) = w;
  return g;
}

DirectedGraph star3() {
  DirectedGraph g(4);
  for (std::size_t v = 1; v < 4; ++v) g.at(0, v) = g.at(v, 0) = 1.0;
  return g;
}

sese::OptimizeOptions height(std::size_t k) {
  sese::OptimizeOptions o;
  o.max_height = k;
  return o;
}

/// Leaf id of vertex v in a flat tree built by the library (root is 0).
sese::NodeId flat_leaf(std::size_t v) { return v + 1; }

}  // namespace

TEST(H1Directed, UniformEightVertices) {
  const auto sg = sese::adjust(complete(8));
  EXPECT_NEAR(sese::h1_directed(sg), 3.0, 1e-12);
}

TEST(H1Directed, UniformCompleteGraphsAreLogN) {
  for (std::size_t n = 2; n <= 16; ++n) EXPECT_NEAR(sese::h1_directed(sese::adjust(complete(n))), std::log2(n), 1e-9);
}

TEST(H1Directed, DegenerateDistribution) {
  sese::StochasticGraph sg;
  sg.pi = {1.0, 0.0};
  EXPECT_EQ(sese::h1_directed(sg), 0.0);
}

TEST(H1Directed, TwoStateChain) {
  sese::StochasticGraph sg;
  sg.pi = {6.0 / 13.0, 7.0 / 13.0};
  // High-precision evaluation of -sum p log2 p.
  const long double p = 6.0L / 13.0L, q = 7.0L / 13.0L;
  const long double ref = -(p * std::log2(p) + q * std::log2(q));
  EXPECT_NEAR(sese::h1_directed(sg), static_cast<double>(ref), 1e-14);
  EXPECT_NEAR(sese::h1_directed(sg), 0.99573, 5e-6);
}

TEST(H1Undirected, Examples) {
  EXPECT_NEAR(sese::h1_undirected(complete(4)), 2.0, 1e-12);
  const long double s = 0.5L + 3.0L * (std::log2(6.0L) / 6.0L);
  EXPECT_NEAR(sese::h1_undirected(star3()), static_cast<double>(s), 1e-14);
  EXPECT_NEAR(sese::h1_undirected(star3()), 1.7925, 5e-5);
  EXPECT_NEAR(sese::h1_undirected(DirectedGraph::from_rows({{0, 5}, {5, 0}})), 1.0, 1e-12);
  EXPECT_THROW(sese::h1_undirected(DirectedGraph(3)), sese::Error);
  EXPECT_THROW(sese::h1_undirected(DirectedGraph::from_rows({{0, 1}, {2, 0}})), std::invalid_argument);
}

TEST(NodeEntropy, RootIsUndefined) {
  const auto t = sese::init_flat_tree(complete(3));
  EXPECT_THROW(sese::node_entropy(t, t.root()), std::invalid_argument);
}

TEST(NodeEntropy, StarHubLeaf) {
  const auto t = sese::init_flat_tree(star3());
  EXPECT_NEAR(sese::node_entropy(t, flat_leaf(0)), 0.5, 1e-12);
}

TEST(NodeEntropy, IsolatedCommunityIsZero) {
  // Two disconnected edges: each community has no cut.
  auto t = sese::init_flat_tree(DirectedGraph::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));
  const auto d = t.combine(flat_leaf(0), flat_leaf(1));
  EXPECT_EQ(t.node_entropy(d), 0.0);
}

TEST(NodeEntropy, DirectedLeafUnderRoot) {
  std::mt19937_64 rng(5);
  const auto sg = sese::adjust(oracle::random_digraph(rng, 7, 0.4));
  const auto t = sese::init_flat_tree(sg);
  const double vol = 2.0 * 7.0;
  for (std::size_t v = 0; v < 7; ++v) {
    EXPECT_NEAR(t.node_entropy(flat_leaf(v)), -(sg.pi[v] / vol) * std::log2(sg.pi[v]), 1e-12);
  }
}

TEST(TreeEntropy, FlatK4EqualsH1) {
  EXPECT_NEAR(sese::tree_entropy(sese::init_flat_tree(complete(4))), 2.0, 1e-12);
}

TEST(TreeEntropy, SingleVertexIsZero) {
  EXPECT_EQ(sese::tree_entropy(sese::init_flat_tree(sese::adjust(DirectedGraph(1)))), 0.0);
}

TEST(TreeEntropy, TwoLevelBeatsFlatOnRepairedTwoCliques) {
  const auto sg = sese::adjust(DirectedGraph::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));
  const auto best = oracle::best_two_level(oracle::directed_flow(sg));
  const double flat = sese::init_flat_tree(sg).entropy();
  EXPECT_LT(best.entropy, flat);
  EXPECT_EQ(best.blocks, (std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}}));
}

TEST(TreeEntropy, MatchesIndependentFlowComputation) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 8;
    const auto sg = sese::adjust(oracle::random_digraph(rng, n, 0.4));
    auto t = sese::optimize_tree(sese::init_flat_tree(sg), height(2));
    const auto fl = oracle::directed_flow(sg);
    const auto blocks = t.level_partition(1);
    EXPECT_NEAR(t.entropy(), oracle::two_level_entropy(fl, blocks), 1e-12);
  }
}

TEST(FlatTree, Structure) {
  const auto one = sese::init_flat_tree(sese::adjust(DirectedGraph(1)));
  EXPECT_EQ(one.live_nodes().size(), 2u);
  EXPECT_EQ(one.height(), 1u);
  const auto ten = sese::init_flat_tree(sese::adjust(complete(10)));
  EXPECT_EQ(ten.node(ten.root()).children.size(), 10u);
  EXPECT_EQ(ten.height(), 1u);
  EXPECT_NO_THROW(ten.validate());
  std::vector<std::size_t> leaves;
  for (auto id : ten.live_nodes())
    if (ten.node(id).is_leaf()) leaves.push_back(ten.node(id).vertices.front());
  std::sort(leaves.begin(), leaves.end());
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(leaves, all);
}

TEST(FlatTree, EqualsScaledShannonOnRandomGraphs) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 25;
    const auto sg = sese::adjust(oracle::random_digraph(rng, n, 0.3));
    double expect = 0.0;
    for (double p : sg.pi) expect += -(p / sg.volume) * std::log2(p);
    EXPECT_NEAR(sese::init_flat_tree(sg).entropy(), expect, 1e-10);
  }
}

TEST(MergeOp, FlatThreeVertices) {
  const auto t0 = sese::init_flat_tree(complete(3));
  const auto t = sese::merge_op(t0, flat_leaf(0), flat_leaf(1));
  EXPECT_NO_THROW(t.validate());
  const auto& root = t.node(t.root());
  ASSERT_EQ(root.children.size(), 2u);
  const auto& d = t.node(root.children[0]);
  EXPECT_EQ(d.vertices, (std::vector<std::size_t>{0, 1}));
  ASSERT_EQ(d.children.size(), 2u);
  EXPECT_TRUE(t.node(d.children[0]).is_leaf());
  EXPECT_EQ(t.node(root.children[1]).vertices, std::vector<std::size_t>{2});
  EXPECT_EQ(t.height(), 2u);
  // The input tree is untouched.
  EXPECT_EQ(t0.height(), 1u);
}

TEST(MergeOp, InternalNodesPoolTheirChildren) {
  auto t = sese::init_flat_tree(complete(4));
  const auto a = t.combine(flat_leaf(0), flat_leaf(1));
  const auto b = t.combine(flat_leaf(2), flat_leaf(3));
  const auto d = t.merge(a, b);
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.node(d).children.size(), 4u);
  EXPECT_EQ(t.height(), 2u);
}

TEST(MergeOp, NonSiblingsRejected) {
  auto t = sese::init_flat_tree(complete(4));
  const auto d = t.combine(flat_leaf(0), flat_leaf(1));
  EXPECT_THROW(t.merge(flat_leaf(0), flat_leaf(2)), std::invalid_argument);
  EXPECT_THROW(t.combine(d, flat_leaf(1)), std::invalid_argument);
  EXPECT_THROW(t.delta(OpKind::merge, flat_leaf(2), flat_leaf(2)), std::invalid_argument);
}

TEST(MergeOp, RedundantWrapperNeverSelected) {
  auto t = sese::init_flat_tree(complete(4));
  const auto a = t.combine(flat_leaf(0), flat_leaf(1));
  const auto b = t.combine(flat_leaf(2), flat_leaf(3));
  // a and b are the root's only children: combining them wraps everything.
  EXPECT_LE(t.delta(OpKind::combine, a, b), 1e-12);
  auto opts = height(4);
  bool wrapped = false;
  opts.on_step = [&](const EncodingTree& tree, const sese::TreeStep& s) {
    if (tree.node(tree.root()).children.size() == 1) wrapped = true;
    (void)s;
  };
  sese::optimize_tree(t, opts);
  EXPECT_FALSE(wrapped);
}

TEST(CombineOp, PreservesSubtrees) {
  auto t = sese::init_flat_tree(complete(5));
  const auto a = t.combine(flat_leaf(0), flat_leaf(1));
  const auto d = t.combine(a, flat_leaf(2));
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.node(d).vertices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(t.node(a).parent, d);
  EXPECT_EQ(t.node(a).children.size(), 2u);
  EXPECT_EQ(t.height(), 3u);
}

TEST(CombineOp, PositiveGainOnTwoCliques) {
  const auto t = sese::init_flat_tree(sese::adjust(oracle::two_cliques()));
  EXPECT_GT(t.delta(OpKind::combine, flat_leaf(0), flat_leaf(1)), 0.0);
  // Grouping across the bridge gains less than grouping inside a clique.
  EXPECT_LT(t.delta(OpKind::combine, flat_leaf(0), flat_leaf(4)), t.delta(OpKind::combine, flat_leaf(0), flat_leaf(1)));
}

TEST(Delta, SymmetricInArguments) {
  const auto t = sese::init_flat_tree(complete(4));
  for (auto kind : {OpKind::merge, OpKind::combine})
    EXPECT_DOUBLE_EQ(t.delta(kind, flat_leaf(0), flat_leaf(1)), t.delta(kind, flat_leaf(1), flat_leaf(0)));
}

TEST(Delta, MatchesRecomputationOnRandomTrees) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    const bool directed = trial % 2 == 0;
    const auto g = directed ? oracle::random_digraph(rng, n, 0.4) : oracle::random_symmetric(rng, n, 0.6);
    if (!directed && g.total_weight() == 0.0) continue;
    EncodingTree t = directed ? sese::init_flat_tree(sese::adjust(g)) : sese::init_flat_tree(g);
    for (int step = 0; step < 6; ++step) {
      // Random sibling pair.
      std::vector<std::pair<sese::NodeId, sese::NodeId>> pairs;
      for (auto p : t.live_nodes()) {
        const auto& ch = t.node(p).children;
        for (std::size_t x = 0; x < ch.size(); ++x)
          for (std::size_t y = x + 1; y < ch.size(); ++y) pairs.emplace_back(ch[x], ch[y]);
      }
      if (pairs.empty()) break;
      const auto [a, b] = pairs[rng() % pairs.size()];
      const auto kind = rng() % 2 ? OpKind::merge : OpKind::combine;
      const double before = t.entropy();
      const double predicted = t.delta(kind, a, b);
      t.apply(kind, a, b);
      t.validate();
      auto fresh = t;
      fresh.recompute();
      EXPECT_NEAR(before - fresh.entropy(), predicted, 1e-10);
    }
  }
}

TEST(Delta, RingBestPairMatchesBruteForce) {
  DirectedGraph ring(4);
  for (std::size_t i = 0; i < 4; ++i) ring.at(i, (i + 1) % 4) = ring.at((i + 1) % 4, i) = 1.0;
  for (bool directed : {false, true}) {
    const EncodingTree t = directed ? sese::init_flat_tree(sese::adjust(ring)) : sese::init_flat_tree(ring);
    double best = -1e300;
    std::pair<std::size_t, std::size_t> best_pair;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = a + 1; b < 4; ++b) {
        const double gain = t.entropy() - sese::merge_op(t, flat_leaf(a), flat_leaf(b)).entropy();
        if (gain > best + 1e-12) {
          best = gain;
          best_pair = {a, b};
        }
      }
    const auto c = sese::detail::best_candidate(t, OpKind::merge, height(2));
    ASSERT_TRUE(c.valid);
    EXPECT_NEAR(c.delta, best, 1e-12);
    EXPECT_EQ(c.reps, best_pair);
  }
}

TEST(Optimize, HeightOneIsFlat) {
  const auto sg = sese::adjust(oracle::two_cliques());
  const auto t = sese::optimize_tree(sg, 1);
  EXPECT_EQ(t.height(), 1u);
  EXPECT_NEAR(t.entropy(), sese::init_flat_tree(sg).entropy(), 1e-15);
}

TEST(Optimize, RejectsZeroHeight) {
  EXPECT_THROW(sese::optimize_tree(sese::init_flat_tree(complete(3)), height(0)), std::invalid_argument);
}

TEST(Optimize, TwoCliquesRecoveredAtHeightTwo) {
  std::ifstream in(std::string(SESE_FIXTURES) + "/two_cliques.json");
  ASSERT_TRUE(in);
  const auto j = nlohmann::json::parse(in);
  const auto g = DirectedGraph::from_rows(j["weights"].get<std::vector<std::vector<double>>>());
  EXPECT_EQ(g, oracle::two_cliques());
  const auto sg = sese::adjust(g);
  const auto t = sese::optimize_tree(sg, 2);
  const std::vector<std::vector<std::size_t>> cliques{{0, 1, 2}, {3, 4, 5}};
  EXPECT_EQ(t.level_partition(1), cliques);
  const auto best = oracle::best_two_level(oracle::directed_flow(sg));
  EXPECT_EQ(best.blocks, cliques);
  EXPECT_NEAR(t.entropy(), best.entropy, 1e-12);
}

TEST(Optimize, TwoVerticesTerminate) {
  const auto sg = sese::adjust(DirectedGraph::from_rows({{0, 1}, {1, 0}}));
  const auto t = sese::optimize_tree(sg, 3);
  EXPECT_LE(t.height(), 2u);
  for (auto kind : {OpKind::merge, OpKind::combine}) {
    const auto c = sese::detail::best_candidate(t, kind, height(3));
    EXPECT_TRUE(!c.valid || c.delta <= 1e-12);
  }
}

TEST(OptimizeProperty, ContractOnRandomGraphs) {
  std::mt19937_64 rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const std::size_t k = 1 + rng() % 4;
    const bool directed = trial % 3 != 0;
    auto g = directed ? oracle::random_digraph(rng, n, 0.35) : oracle::random_symmetric(rng, n, 0.5);
    if (!directed && g.total_weight() == 0.0) g = complete(n < 2 ? 2 : n);
    const EncodingTree flat = directed ? sese::init_flat_tree(sese::adjust(g)) : sese::init_flat_tree(g);
    double last = flat.entropy();
    std::size_t steps = 0;
    auto opts = height(k);
    opts.on_step = [&](const EncodingTree& t, const sese::TreeStep& s) {
      ++steps;
      EXPECT_NO_THROW(t.validate());
      EXPECT_LE(t.height(), k);
      const double h = t.entropy();
      EXPECT_LE(h, last + 1e-12);
      EXPECT_GT(s.delta, 1e-12);
      last = h;
    };
    const auto t = sese::optimize_tree(flat, opts);
    const double nn = static_cast<double>(flat.vertex_count());
    EXPECT_LE(static_cast<double>(steps), 10.0 * nn * nn);
    EXPECT_LE(t.height(), k);
    EXPECT_LE(t.entropy(), flat.entropy() + 1e-12);
    if (HasFailure()) FAIL() << "trial " << trial;
  }
}

TEST(OptimizeProperty, GreedyAgainstExhaustiveTwoLevel) {
  std::mt19937_64 rng(2718);
  int optimal = 0, total = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    const auto sg = sese::adjust(oracle::random_digraph(rng, n, 0.5));
    const auto t = sese::optimize_tree(sg, 2);
    const auto best = oracle::best_two_level(oracle::directed_flow(sg));
    EXPECT_LE(t.entropy(), sese::init_flat_tree(sg).entropy() + 1e-12);
    EXPECT_GE(t.entropy(), best.entropy - 1e-12);
    const double gap = t.entropy() - best.entropy;
    worst_gap = std::max(worst_gap, gap);
    optimal += gap <= 1e-9;
    ++total;
  }
  RecordProperty("greedy_optimal", optimal);
  RecordProperty("cases", total);
  std::cout << "greedy matched the exhaustive optimum on " << optimal << "/" << total
            << " graphs; worst gap " << worst_gap << " bits\n";
}

TEST(Optimize, DeterministicTieBreaking) {
  // Every pair of K6 is tied; the first merge must involve vertices 0 and 1.
  const auto sg = sese::adjust(complete(6));
  std::vector<sese::TreeStep> steps;
  auto opts = height(2);
  opts.on_step = [&](const EncodingTree&, const sese::TreeStep& s) { steps.push_back(s); };
  const auto t = sese::optimize_tree(sese::init_flat_tree(sg), opts);
  if (!steps.empty()) {
    EXPECT_EQ(steps.front().a, flat_leaf(0));
    EXPECT_EQ(steps.front().b, flat_leaf(1));
  }
  EXPECT_EQ(sese::optimize_tree(sese::init_flat_tree(sg), height(2)).to_text(), t.to_text());
}

TEST(Undirected, LevelPartitionAndJson) {
  auto g = oracle::two_cliques(1e-3);
  const auto t = sese::optimize_tree(g, 2);
  EXPECT_EQ(t.level_partition(1), (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4, 5}}));
  const auto j = t.to_json();
  EXPECT_EQ(j["vertices"].size(), 6u);
  EXPECT_EQ(j["children"].size(), 2u);
}

TEST(FlowModel, RefinementClasses) {
  const auto m = sese::FlowModel::undirected(oracle::two_cliques());
  const auto& c = m.vertex_classes();
  EXPECT_EQ(c[0], c[1]);
  EXPECT_EQ(c[0], c[4]);
  EXPECT_EQ(c[0], c[5]);
  EXPECT_EQ(c[2], c[3]);
  EXPECT_NE(c[0], c[2]);
  // Path 0-1-2-3: ends and middles split, and relabeling does not move classes.
  DirectedGraph path(4);
  for (std::size_t i = 0; i + 1 < 4; ++i) path.at(i, i + 1) = path.at(i + 1, i) = 1.0;
  const auto pc = sese::FlowModel::undirected(path).vertex_classes();
  EXPECT_EQ(pc[0], pc[3]);
  EXPECT_EQ(pc[1], pc[2]);
  EXPECT_NE(pc[0], pc[1]);
  const std::vector<std::size_t> p{2, 0, 3, 1};
  const auto qc = sese::FlowModel::undirected(oracle::permute(path, p)).vertex_classes();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(qc[i], pc[p[i]]);
}
