#include <sstream>

#include <random>

#include <gtest/gtest.h>

#include "chaoscope/graph_core.hpp"
#include "support.hpp"

using namespace chaoscope;
using namespace chaoscope::graph;

namespace {

GraphPtr make(std::size_t n, std::vector<Edge> edges)
{
  return std::make_shared<const MaterializedGraph>(n, std::move(edges));
}

// Two loops through vertex 0: 0->1->0 and 0->2->3->0.
GraphPtr two_loops() { return make(4, {{0, 1}, {1, 0}, {0, 2}, {2, 3}, {3, 0}}); }

} // namespace

TEST(MaterializedGraph, SortsAndDeduplicatesEdges)
{
  MaterializedGraph g(3, {{2, 0}, {0, 1}, {0, 1}, {1, 2}});
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(1, 0));
  EXPECT_EQ(g.out_degree(0), 1u);
  EXPECT_EQ(g.in_degree(0), 1u);
  ASSERT_EQ(g.predecessors(2).size(), 1u);
  EXPECT_EQ(g.predecessors(2)[0], 1u);
}

TEST(MaterializedGraph, RejectsOutOfRangeIds)
{
  EXPECT_THROW(MaterializedGraph(2, {{0, 2}}), GraphError);
  EXPECT_THROW(MaterializedGraph(0, {{0, 0}}), GraphError);
}

TEST(EdgeSurjective, SingleLoopPasses)
{
  EXPECT_TRUE(validate_edge_surjective(MaterializedGraph(1, {{0, 0}})).empty());
}

TEST(EdgeSurjective, OneEdgeReportsBothEnds)
{
  const auto v = validate_edge_surjective(MaterializedGraph(2, {{0, 1}}));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::MissingIncoming);
  EXPECT_EQ(v[0].vertex, 0u);
  EXPECT_EQ(v[1].kind, Violation::Kind::MissingOutgoing);
  EXPECT_EQ(v[1].vertex, 1u);
}

TEST(EdgeSurjective, IsolatedVertexGetsTwoViolations)
{
  EXPECT_EQ(validate_edge_surjective(MaterializedGraph(2, {{0, 0}})).size(), 2u);
}

TEST(EdgeSurjective, MaterializedLevelTwoPasses)
{
  EXPECT_TRUE(validate_edge_surjective(*testing_support::level(2).graph).empty());
}

TEST(Homomorphism, IdentityIsHomomorphismButNotDirectional)
{
  const auto g = two_loops();
  const auto id = identity_cover(g);
  EXPECT_TRUE(validate_homomorphism(id).empty());
  // vertex 0 branches to 1 and 2, identity keeps them apart
  const auto v = validate_bidirectional(id);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::SuccessorImagesDiffer);
  EXPECT_EQ(v[1].kind, Violation::Kind::PredecessorImagesDiffer);
}

TEST(Homomorphism, NonAdjacentImageIsReported)
{
  const auto g = two_loops();
  // 2 -> 3 sent to 1 -> 3, which is not an edge
  CoverMap c(g, g, {0, 1, 1, 3});
  const auto v = validate_homomorphism(c);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, Violation::Kind::EdgeNotPreserved);
}

TEST(Homomorphism, MaterializedPhiOnePasses)
{
  EXPECT_TRUE(validate_homomorphism(*testing_support::level(2).cover_down).empty());
}

TEST(CoverMap, StructuralErrors)
{
  const auto g = two_loops();
  EXPECT_THROW(CoverMap(g, g, {0, 1, 2}), GraphError);
  EXPECT_THROW(CoverMap(g, g, {0, 1, 2, 7}), GraphError);
  EXPECT_THROW(CoverMap(nullptr, g, {}), GraphError);
}

TEST(Bidirectional, BaseSuccessorsWithDistinctImagesFail)
{
  const auto src = two_loops();
  const auto dst = make(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {0, 0}});
  // successors of 0 are 1 and 2; send them to different vertices
  CoverMap c(src, dst, {0, 1, 2, 0});
  const auto v = validate_bidirectional(c);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].kind, Violation::Kind::SuccessorImagesDiffer);
  EXPECT_EQ(v[0].vertex, 0u);
}

TEST(Bidirectional, PredecessorConflictIsReported)
{
  // 1 -> 0 <- 2, with 1 and 2 sent to different vertices
  const auto src = make(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
  const auto dst = make(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
  const auto v = validate_bidirectional(CoverMap(src, dst, {0, 1, 2}));
  bool pred = false;
  for (const auto& x : v)
    pred = pred || x.kind == Violation::Kind::PredecessorImagesDiffer;
  EXPECT_TRUE(pred);
}

TEST(Bidirectional, MaterializedCoversPass)
{
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto& c = *testing_support::level(n).cover_down;
    EXPECT_TRUE(validate_homomorphism(c).empty()) << n;
    EXPECT_TRUE(validate_bidirectional(c).empty()) << n;
    EXPECT_TRUE(validate_edge_surjective(c.source()).empty()) << n;
  }
}

TEST(Bidirectional, InducedSuccessorMapIsSingleValued)
{
  const auto& c = *testing_support::level(2).cover_down;
  const auto& g = c.source();
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    const auto succ = g.out_edges(u);
    for (const auto& e : succ)
      ASSERT_EQ(c(e.to), c(succ[0].to)) << u;
  }
}

TEST(Paths, EmptyPathMapsToSingleVertex)
{
  const auto& c = *testing_support::level(2).cover_down;
  const VertexPath p{{5}};
  const auto img = apply_cover_to_path(c, p);
  ASSERT_EQ(img.vertices.size(), 1u);
  EXPECT_EQ(img.vertices[0], c(5));
  EXPECT_EQ(img.edge_count(), 0u);
}

TEST(Paths, CycleOfLevelOneMapsToTenLoops)
{
  const auto& c = *testing_support::level(1).cover_down;
  VertexPath p{{0}};
  for (VertexId v = 1; v < 10; ++v)
    p.vertices.push_back(v);
  p.vertices.push_back(0);
  ASSERT_TRUE(is_path(c.source(), p));
  const auto img = apply_cover_to_path(c, p);
  EXPECT_EQ(img.edge_count(), 10u);
  for (auto v : img.vertices)
    EXPECT_EQ(v, 0u);
}

TEST(Paths, SecondCycleOfLevelTwoMapsToNinetyBaseLoops)
{
  const auto& lvl = testing_support::level(2);
  VertexPath p{{0}};
  for (std::uint64_t pos = 1; pos < 90; ++pos)
    p.vertices.push_back(lvl.layout.id_of(2, pos));
  p.vertices.push_back(0);
  const auto img = apply_cover_to_path(*lvl.cover_down, p);
  EXPECT_EQ(img.edge_count(), 90u);
  EXPECT_EQ(img.vertices, std::vector<VertexId>(91, 0));
}

TEST(Paths, NotAPathThrows)
{
  const auto& c = *testing_support::level(2).cover_down;
  EXPECT_THROW(apply_cover_to_path(c, VertexPath{{1, 3}}), GraphError);
  EXPECT_FALSE(is_path(c.source(), VertexPath{{}}));
}

TEST(Paths, LengthPreservedOnRandomWalks)
{
  const auto& c = *testing_support::level(3).cover_down;
  const auto& g = c.source();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    VertexPath p{{0}};
    const std::size_t steps = 1 + rng() % 5000;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto out = g.out_edges(p.vertices.back());
      p.vertices.push_back(out[rng() % out.size()].to);
    }
    const auto img = apply_cover_to_path(c, p);
    EXPECT_EQ(img.edge_count(), p.edge_count());
    EXPECT_TRUE(is_path(c.target(), img));
  }
}

TEST(Compose, ToLevelZeroCollapsesEverything)
{
  const auto composite = compose_covers(*testing_support::level(1).cover_down, *testing_support::level(2).cover_down);
  for (auto v : composite.vertex_map())
    EXPECT_EQ(v, 0u);
  EXPECT_TRUE(validate_homomorphism(composite).empty());
}

TEST(Compose, IdentityIsNeutral)
{
  const auto& c = *testing_support::level(2).cover_down;
  const auto left = compose_covers(identity_cover(c.target_ptr()), c);
  const auto right = compose_covers(c, identity_cover(c.source_ptr()));
  EXPECT_TRUE(std::ranges::equal(left.vertex_map(), c.vertex_map()));
  EXPECT_TRUE(std::ranges::equal(right.vertex_map(), c.vertex_map()));
}

TEST(Compose, FirstVertexOfThirdLevelSecondCycleProjectsToBase)
{
  const auto& l3 = testing_support::level(3);
  const auto composite = compose_covers(*testing_support::level(2).cover_down, *l3.cover_down);
  EXPECT_EQ(composite(l3.layout.id_of(2, 1)), 0u);
  EXPECT_TRUE(validate_homomorphism(composite).empty());
  EXPECT_TRUE(validate_bidirectional(composite).empty());
}

TEST(Compose, MismatchedGraphsThrow)
{
  const auto& c1 = *testing_support::level(1).cover_down;
  const auto& c3 = *testing_support::level(3).cover_down;
  EXPECT_THROW(compose_covers(c1, c3), GraphError);
}

TEST(Export, DotLabelsBase)
{
  std::ostringstream os;
  write_dot(os, MaterializedGraph(2, {{0, 1}, {1, 0}}), "G1");
  EXPECT_EQ(os.str(), "digraph G1 {\n  0 [label=\"v0\"];\n  0 -> 1;\n  1 -> 0;\n}\n");
}

TEST(Export, StatsJson)
{
  const auto& l = testing_support::level(2);
  const auto j = stats_json(2, *l.graph, l.cycle_lengths);
  EXPECT_EQ(j["vertex_count"], 784);
  EXPECT_EQ(j["edge_count"], 786);
  EXPECT_EQ(j["cycle_lengths"], nlohmann::json({"695", "90"}));
}
