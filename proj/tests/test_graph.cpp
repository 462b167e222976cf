#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "matan/corpus.hpp"
#include "matan/error.hpp"
#include "matan/graph.hpp"
#include "support/tempdir.hpp"

namespace matan {
namespace {

using testing::TempDir;

Corpus abc_corpus() {
  return build_corpus({{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "x"}}, 1);
}

TEST(LoadEdges, ReverseDuplicateCollapses) {
  TempDir dir;
  const Corpus c = abc_corpus();
  EdgeLoadStats stats;
  const Graph g = load_edges(dir.write("e.tsv", "a\tb\nb\ta\n"), c, &stats);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.edges()[0], Edge(c.node("a"), c.node("b")));
  EXPECT_EQ(stats.duplicates, 1u);
  EXPECT_EQ(g.n_nodes(), 4u);
}

TEST(LoadEdges, SelfLoopOnlyIsAnError) {
  TempDir dir;
  EXPECT_THROW(load_edges(dir.write("e.tsv", "a\ta\n"), abc_corpus()), InputError);
}

TEST(LoadEdges, UnknownIdsSkippedAndCounted) {
  TempDir dir;
  EdgeLoadStats stats;
  const Graph g = load_edges(dir.write("e.tsv", "a\tzz\nc\td\nq\tb\n"), abc_corpus(), &stats);
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(stats.unknown_ids, 2u);
  EXPECT_EQ(stats.lines, 3u);
}

TEST(LoadEdges, MissingTabIsParseError) {
  TempDir dir;
  try {
    load_edges(dir.write("e.tsv", "a\tb\nc d\n"), abc_corpus());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(NormalizedAdjacency, Examples) {
  // Row [0,1,1,0] and an isolated node.
  const Graph g = Graph::from_edges(4, {{0, 1}, {0, 2}});
  const SparseMatrix& m = g.norm_adjacency();
  EXPECT_EQ(m.at(0, 0), 0.0);
  EXPECT_EQ(m.at(0, 1), 0.5);
  EXPECT_EQ(m.at(0, 2), 0.5);
  EXPECT_EQ(m.at(0, 3), 0.0);
  for (NodeId c = 0; c < 4; ++c) EXPECT_EQ(m.at(3, c), 0.0);

  const Graph tri = Graph::from_edges(3, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_EQ(tri.norm_adjacency().nnz(), 6u);
  for (double x : tri.norm_adjacency().val) EXPECT_EQ(x, 0.5);
}

TEST(Graph, RandomGraphInvariants) {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 5 + rng() % 40;
    std::vector<Edge> edges;
    for (int i = 0; i < 80; ++i) edges.emplace_back(rng() % n, rng() % n);
    const Graph g = Graph::from_edges(n, edges);
    const SparseMatrix& a = g.adjacency();
    const SparseMatrix& m = g.norm_adjacency();
    for (NodeId r = 0; r < n; ++r) {
      EXPECT_EQ(a.at(r, r), 0.0);
      double sum = 0.0;
      for (NodeId c = 0; c < n; ++c) {
        ASSERT_EQ(a.at(r, c), a.at(c, r));
        const double expect = g.degree(r) ? a.at(r, c) / static_cast<double>(g.degree(r)) : 0.0;
        ASSERT_NEAR(m.at(r, c), expect, 1e-12);
        sum += m.at(r, c);
      }
      if (g.degree(r) > 0) EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    // Unique canonical edges.
    std::set<Edge> seen;
    for (const Edge& e : g.edges()) {
      EXPECT_LT(e.first, e.second);
      EXPECT_TRUE(seen.insert(e).second);
    }
    EXPECT_EQ(a.nnz(), 2 * g.edges().size());
  }
}

TEST(Graph, MemberSubset) {
  const Graph g = Graph::from_edges(5, {{0, 2}}, {0, 2, 4});
  EXPECT_TRUE(g.contains(4));
  EXPECT_FALSE(g.contains(1));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 4));
  EXPECT_THROW(Graph::from_edges(5, {{0, 1}}, {0, 2}), InputError);
}

}  // namespace
}  // namespace matan
