#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using sese::DirectedGraph;

namespace {

void expect_stochastic_invariants(const sese::StochasticGraph& sg) {
  const std::size_t n = sg.size();
  ASSERT_EQ(sese::tarjan_scc(sg.graph).size(), 1u);
  ASSERT_TRUE(oracle::strongly_connected(sg.graph));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(sg.graph.out_degree(i), 1.0, 1e-12);
    EXPECT_GT(sg.pi[i], 0.0);
    total += sg.pi[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
  EXPECT_NEAR(sg.volume, 2.0 * static_cast<double>(n), 1e-9);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sg.pi[i] * sg.graph(i, j);
    EXPECT_LE(std::abs(s - sg.pi[j]), 1e-8);
  }
}

}  // namespace

TEST(DirectedGraph, RejectsInvalidWeights) {
  EXPECT_THROW(DirectedGraph::from_rows({{0, -1}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(DirectedGraph::from_rows({{0, std::nan("")}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(DirectedGraph::from_rows({{1, 0}, {1, 0}}), std::invalid_argument);
  EXPECT_THROW(DirectedGraph::from_rows({{0, 1}, {1}}), std::invalid_argument);
  EXPECT_NO_THROW(DirectedGraph::from_rows({{0, 2}, {0, 0}}));
}

TEST(DirectedGraph, Degrees) {
  const auto g = DirectedGraph::from_rows({{0, 2, 1}, {0, 0, 3}, {4, 0, 0}});
  EXPECT_DOUBLE_EQ(g.out_degree(0), 3.0);
  EXPECT_DOUBLE_EQ(g.in_degree(2), 4.0);
  EXPECT_DOUBLE_EQ(g.total_weight(), 10.0);
  EXPECT_FALSE(g.is_symmetric());
}

TEST(TarjanScc, Singleton) {
  const auto c = sese::tarjan_scc(DirectedGraph(1));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], std::vector<std::size_t>{0});
}

TEST(TarjanScc, TwoCycle) {
  const auto c = sese::tarjan_scc(DirectedGraph::from_rows({{0, 1}, {1, 0}}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (std::vector<std::size_t>{0, 1}));
}

TEST(TarjanScc, ReverseTopologicalOrder) {
  const auto c = sese::tarjan_scc(DirectedGraph::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 0, 0}}));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], std::vector<std::size_t>{2});
  EXPECT_EQ(c[1], (std::vector<std::size_t>{0, 1}));
}

TEST(TarjanScc, AgreesWithReachabilityOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const auto g = oracle::random_digraph(rng, n, 0.15);
    const auto comps = sese::tarjan_scc(g);
    const auto reach = oracle::reachability(g);
    std::vector<std::size_t> comp_of(n, n);
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (std::size_t v : comps[c]) {
        ASSERT_EQ(comp_of[v], n) << "vertex in two components";
        comp_of[v] = c;
      }
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_LT(comp_of[i], n) << "vertex missing";
      for (std::size_t j = 0; j < n; ++j) {
        const bool same = reach[i][j] && reach[j][i];
        EXPECT_EQ(same, comp_of[i] == comp_of[j]);
        // Reverse topological: edges between components point to earlier ones.
        if (reach[i][j] && !same) {
          EXPECT_GT(comp_of[i], comp_of[j]);
        }
      }
    }
  }
}

TEST(Adjust, TwoCycle) {
  const auto sg = sese::adjust(DirectedGraph::from_rows({{0, 2}, {2, 0}}));
  EXPECT_TRUE(sg.added_edges.empty());
  EXPECT_DOUBLE_EQ(sg.graph(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(sg.graph(1, 0), 1.0);
  EXPECT_NEAR(sg.pi[0], 0.5, 1e-12);
  EXPECT_NEAR(sg.pi[1], 0.5, 1e-12);
}

TEST(Adjust, ChainGetsOneRepairEdge) {
  const auto sg = sese::adjust(DirectedGraph::from_rows({{0, 1}, {0, 0}}));
  ASSERT_EQ(sg.added_edges.size(), 1u);
  EXPECT_EQ(sg.added_edges[0].from, 1u);
  EXPECT_EQ(sg.added_edges[0].to, 0u);
  EXPECT_DOUBLE_EQ(sg.graph(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(sg.graph(1, 0), 1.0);
  EXPECT_NEAR(sg.pi[0], 0.5, 1e-12);
  EXPECT_NEAR(sg.pi[1], 0.5, 1e-12);
}

TEST(Adjust, StochasticRingIsUnchanged) {
  DirectedGraph ring(4);
  for (std::size_t i = 0; i < 4; ++i) ring.at(i, (i + 1) % 4) = 1.0;
  const auto sg = sese::adjust(ring);
  EXPECT_TRUE(sg.added_edges.empty());
  EXPECT_EQ(sg.graph, ring);
  for (double p : sg.pi) EXPECT_NEAR(p, 0.25, 1e-12);
}

TEST(Adjust, SinkToSourceRepairUsesSmallestWeight) {
  // Two 2-cycles joined one way: {0,1} -> {2,3}. Sink {2,3}, source {0,1}.
  const auto g = DirectedGraph::from_rows({{0, 4, 0, 0}, {4, 0, 2, 0}, {0, 0, 0, 3}, {0, 0, 3, 0}});
  const auto sg = sese::adjust(g);
  const std::vector<sese::RepairEdge> expect{{2, 0, 2.0}, {2, 1, 2.0}, {3, 0, 2.0}, {3, 1, 2.0}};
  EXPECT_EQ(sg.added_edges, expect);
  expect_stochastic_invariants(sg);
  // Original proportions within row 1 survive normalisation.
  EXPECT_NEAR(sg.graph(1, 0) / sg.graph(1, 2), 2.0, 1e-12);
}

TEST(Adjust, FixedEpsilonPolicy) {
  const auto g = DirectedGraph::from_rows({{0, 4, 0, 0}, {4, 0, 2, 0}, {0, 0, 0, 3}, {0, 0, 3, 0}});
  const auto sg = sese::adjust(g, sese::EpsPolicy::fixed(1e-3));
  ASSERT_EQ(sg.added_edges.size(), 4u);
  for (const auto& e : sg.added_edges) EXPECT_DOUBLE_EQ(e.weight, 1e-3);
  EXPECT_NEAR(sg.graph(2, 0), 1e-3 / 3.002, 1e-15);
  expect_stochastic_invariants(sg);
}

TEST(Adjust, EverySinkLinksToEverySource) {
  // Sources {0}, {3}; sinks {1,2} (a 2-cycle) and {4,5} (a 2-cycle).
  const auto g = DirectedGraph::from_rows({{0, 1, 0, 0, 0, 0},
                                           {0, 0, 1, 0, 0, 0},
                                           {0, 1, 0, 0, 0, 0},
                                           {0, 0, 0, 0, 1, 0},
                                           {0, 0, 0, 0, 0, 1},
                                           {0, 0, 0, 0, 1, 0}});
  const auto sg = sese::adjust(g);
  const std::vector<sese::RepairEdge> expect{{1, 0, 1.0}, {1, 3, 1.0}, {2, 0, 1.0}, {2, 3, 1.0},
                                             {4, 0, 1.0}, {4, 3, 1.0}, {5, 0, 1.0}, {5, 3, 1.0}};
  EXPECT_EQ(sg.added_edges, expect);
  expect_stochastic_invariants(sg);
}

TEST(AdjustProperty, RelabelingPermutesPiOnDisconnectedGraphs) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const auto g = oracle::random_digraph(rng, n, 0.12);
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    const auto a = sese::adjust(g);
    const auto b = sese::adjust(oracle::permute(g, p));
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(b.pi[i], a.pi[p[i]], 1e-10) << "trial " << trial;
  }
}

TEST(Adjust, ZeroOutDegreeRowBecomesUniform) {
  const auto sg = sese::adjust(DirectedGraph::from_rows({{0, 1, 1}, {1, 0, 1}, {0, 0, 0}}));
  EXPECT_DOUBLE_EQ(sg.graph(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(sg.graph(2, 1), 0.5);
  expect_stochastic_invariants(sg);
}

TEST(Adjust, EdgelessGraph) {
  const auto sg = sese::adjust(DirectedGraph(5));
  expect_stochastic_invariants(sg);
  for (double p : sg.pi) EXPECT_NEAR(p, 0.2, 1e-12);
}

TEST(Adjust, SingleVertex) {
  const auto sg = sese::adjust(DirectedGraph(1));
  EXPECT_EQ(sg.pi, std::vector<double>{1.0});
  const auto again = sese::adjust(sg.graph);
  EXPECT_EQ(again.graph, sg.graph);
  EXPECT_TRUE(again.added_edges.empty());
}

TEST(Adjust, RejectsNegativeAndNan) {
  DirectedGraph g(2);
  g.at(0, 1) = -1.0;
  EXPECT_THROW(sese::adjust(g), std::invalid_argument);
  g.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sese::adjust(g), std::invalid_argument);
}

TEST(AdjustProperty, InvariantsAndIdempotenceOnRandomDigraphs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dens(0.0, 0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const auto g = oracle::random_digraph(rng, n, dens(rng));
    const auto sg = sese::adjust(g);
    expect_stochastic_invariants(sg);
    const auto again = sese::adjust(sg.graph);
    EXPECT_TRUE(again.added_edges.empty()) << "trial " << trial;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(again.graph(i, j), sg.graph(i, j), 1e-12);
    if (HasFailure()) FAIL() << "trial " << trial;
  }
}

TEST(AdjustProperty, PermutationEquivariance) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    // Strongly connected input, so no representative choice is involved.
    const auto g = oracle::random_strongly_connected_stochastic(rng, n);
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    const auto a = sese::adjust(g);
    const auto b = sese::adjust(oracle::permute(g, p));
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(b.pi[i], a.pi[p[i]], 1e-10);
  }
}

TEST(Stationary, UniformComplete) {
  DirectedGraph g(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) g.at(i, j) = 1.0 / 3.0;
  for (double p : sese::stationary_distribution(g)) EXPECT_NEAR(p, 0.25, 1e-12);
}

TEST(Stationary, TwoStateClosedForm) {
  DirectedGraph g(2);
  g.at(0, 0) = 0.3;  // self-loops are legal for a raw transition matrix here
  g.at(0, 1) = 0.7;
  g.at(1, 0) = 0.6;
  g.at(1, 1) = 0.4;
  const auto pi = sese::stationary_distribution(g);
  // pi0 = b / (a + b) with a = 0.7, b = 0.6.
  EXPECT_NEAR(pi[0], 6.0 / 13.0, 1e-12);
  EXPECT_NEAR(pi[1], 7.0 / 13.0, 1e-12);
}

TEST(Stationary, PeriodicThreeCycle) {
  const auto g = DirectedGraph::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  const auto pi = sese::stationary_distribution(g);
  const auto ref = oracle::stationary(g);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(pi[i], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(pi[i], ref[i], 1e-12);
  }
}

TEST(Stationary, RejectsNonStochastic) {
  EXPECT_THROW(sese::stationary_distribution(DirectedGraph::from_rows({{0, 2}, {1, 0}})), std::invalid_argument);
}

TEST(Stationary, ReportsResidualWhenNotConverged) {
  // A long slow ring needs many squarings; allow only one.
  const std::size_t n = 40;
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i) g.at(i, (i + 1) % n) = 1.0;
  sese::StationaryOptions opts;
  opts.max_squarings = 1;
  try {
    sese::stationary_distribution(g, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const sese::ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(StationaryProperty, AgreesWithDenseSolveOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    const auto g = oracle::random_strongly_connected_stochastic(rng, n);
    const auto pi = sese::stationary_distribution(g);
    const auto ref = oracle::stationary(g);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(pi[i], ref[i], 1e-8) << "trial " << trial;
  }
}

TEST(StationaryProperty, LazyChainHasSamePi) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 15;
    const auto g = oracle::random_strongly_connected_stochastic(rng, n);
    DirectedGraph lazy(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) lazy.at(i, j) = 0.5 * g(i, j) + (i == j ? 0.5 : 0.0);
    const auto a = sese::stationary_distribution(g);
    const auto b = oracle::stationary(lazy);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  }
}
