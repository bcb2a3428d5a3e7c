#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "rdl/errors.hpp"
#include "rdl/lattice.hpp"

using namespace rdl;
using namespace rdl::lattice;

TEST(Geometry, SquareSizes) {
  EXPECT_EQ(geometry(16).height, 4);
  EXPECT_EQ(geometry(16).length, 7);
  EXPECT_EQ(geometry(4).height, 2);
  EXPECT_EQ(geometry(4).length, 3);
  EXPECT_EQ(geometry(25).height, 5);
  EXPECT_EQ(geometry(25).length, 9);
  EXPECT_THROW(geometry(1), ConfigError);
  EXPECT_THROW(geometry(12), ConfigError);
  EXPECT_THROW(geometry(0), ConfigError);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(3, 2, 4), UnitRole::Absent);
  EXPECT_EQ(classify(2, 6, 4), UnitRole::RightTriangle);
  EXPECT_EQ(classify(1, 1, 4), UnitRole::LeftTriangle);
  EXPECT_EQ(classify(1, 1, 9), UnitRole::LeftTriangle);
  EXPECT_EQ(classify(3, 6, 4), UnitRole::Absent);
}

TEST(Classify, UnitCountAndTrianglePattern) {
  for (int H = 2; H <= 10; ++H) {
    const int L = 2 * H - 1;
    int total = 0;
    for (int l = 1; l <= L; ++l) {
      int at_length = 0;
      for (int h = 1; h <= H + 2; ++h) at_length += classify(h, l, H) != UnitRole::Absent;
      EXPECT_EQ(at_length, l <= H ? l : 2 * H - l) << "H=" << H << " l=" << l;
      total += at_length;
    }
    EXPECT_EQ(total, H * H);
  }
}

TEST(DenseInput, SpecExamples) {
  EXPECT_EQ(dense_input_sources(1, 1, 4), std::vector<NodeRef>{NodeRef::block_input()});
  EXPECT_EQ(dense_input_sources(4, 4, 4),
            (std::vector<NodeRef>{NodeRef::output_of(3, 3), NodeRef::output_of(2, 3), NodeRef::output_of(1, 3)}));
  EXPECT_EQ(dense_input_sources(1, 7, 4), (std::vector<NodeRef>{NodeRef::output_of(1, 6), NodeRef::output_of(2, 6)}));
  EXPECT_THROW(dense_input_sources(3, 2, 4), ConfigError);
}

TEST(DenseInput, MatchesRecursiveWalk) {
  for (int n : {4, 9, 16, 25, 36, 49, 64}) {
    const int H = geometry(n).height;
    for (int l = 1; l <= 2 * H - 1; ++l) {
      for (int h = 1; h <= H; ++h) {
        if (classify(h, l, H) == UnitRole::Absent) continue;
        EXPECT_EQ(dense_input_sources(h, l, H), oracle::walk_dense_input(h, l, H)) << "N=" << n << " " << h << "," << l;
      }
    }
  }
}

TEST(DenseInput, SourcesSitAtPreviousLength) {
  const int H = 6;
  for (int l = 2; l <= 2 * H - 1; ++l) {
    for (int h = 1; h <= H; ++h) {
      if (classify(h, l, H) == UnitRole::Absent) continue;
      for (const auto& s : dense_input_sources(h, l, H)) {
        EXPECT_EQ(s.kind, NodeRef::Kind::UnitOutput);
        EXPECT_EQ(s.unit.l, l - 1);
        EXPECT_NE(classify(s.unit.h, s.unit.l, H), UnitRole::Absent);
      }
    }
  }
}

TEST(Residual, Examples) {
  EXPECT_FALSE(residual_source(1, 1, 4).has_value());
  EXPECT_FALSE(residual_source(3, 3, 4).has_value());
  EXPECT_EQ(residual_source(1, 2, 4).value(), (UnitCoord{1, 1}));
  EXPECT_EQ(residual_source(2, 6, 4).value(), (UnitCoord{2, 5}));
}

TEST(UnitHyper, Examples) {
  EXPECT_EQ(unit_hyper(4, 4, 64, 4).dilation, 8);
  std::vector<int> widths;
  for (int h = 1; h <= 4; ++h) widths.push_back(unit_hyper(h, 4, 64, 4).out_channels);
  EXPECT_EQ(widths, (std::vector<int>{64, 32, 16, 8}));
  EXPECT_EQ(unit_hyper(3, 3, 64, 4).kernel, 5);
  EXPECT_EQ(unit_hyper(3, 4, 64, 4).kernel, 1);
  EXPECT_EQ(unit_hyper(1, 1, 64, 4).kernel, 1);
  EXPECT_EQ(unit_hyper(1, 2, 64, 4).kernel, 1);
  EXPECT_THROW(unit_hyper(1, 1, 60, 4), ConfigError);
  EXPECT_THROW(unit_hyper(1, 1, 4, 4), ConfigError);
}

TEST(BlockGraph, SixteenUnits) {
  const BlockGraph g = build_block_graph({16, 64, 257, true});
  EXPECT_EQ(g.units.size(), 16u);
  EXPECT_EQ(g.geom.length, 7);
  EXPECT_EQ(g.output(), (UnitCoord{1, 7}));
  EXPECT_EQ(g.unit({4, 4}).in_channels, 112);
  EXPECT_EQ(g.unit({1, 7}).in_channels, 96);
  EXPECT_EQ(g.unit({1, 1}).in_channels, 257);
}

TEST(BlockGraph, WidthsMatchRecursiveWalk) {
  for (int n : {4, 16, 36}) {
    for (int input : {257, 64}) {
      const BlockGraph g = build_block_graph({n, 64, input, true});
      for (const auto& u : g.units) {
        EXPECT_EQ(u.in_channels, oracle::walk_width(u.coord.h, u.coord.l, g.geom.height, 64, input));
      }
    }
  }
}

TEST(BlockGraph, FourUnitLattice) {
  const BlockGraph g = build_block_graph({4, 8, 257, true});
  std::vector<UnitCoord> coords;
  for (const auto& u : g.units) coords.push_back(u.coord);
  const std::vector<UnitCoord> expected = {{1, 1}, {1, 2}, {2, 2}, {1, 3}};
  EXPECT_EQ(std::set<UnitCoord>(coords.begin(), coords.end()), std::set<UnitCoord>(expected.begin(), expected.end()));
  EXPECT_EQ(g.residual_edge_count(), 2u);
  EXPECT_TRUE(g.unit({1, 2}).residual.has_value());
  EXPECT_TRUE(g.unit({1, 2}).residual->projected);
  EXPECT_TRUE(g.unit({1, 3}).residual.has_value());
  EXPECT_FALSE(g.unit({2, 2}).residual.has_value());
  EXPECT_EQ(g.unit({1, 2}).residual->channels, 257);
}

TEST(BlockGraph, ProjectionOnlyWhenWidthsDiffer) {
  const BlockGraph same = build_block_graph({4, 8, 8, true});
  EXPECT_FALSE(same.unit({1, 2}).residual->projected);
  const BlockGraph g = build_block_graph({16, 64, 257, true});
  for (const auto& u : g.units) {
    if (u.residual) EXPECT_EQ(u.residual->projected, u.residual->channels != u.hyper.out_channels);
  }
}

TEST(BlockGraph, WithoutResidualKeepsDenseEdges) {
  const BlockGraph with = build_block_graph({16, 64, 257, true});
  const BlockGraph without = build_block_graph({16, 64, 257, false});
  EXPECT_EQ(without.residual_edge_count(), 0u);
  ASSERT_EQ(with.units.size(), without.units.size());
  for (std::size_t i = 0; i < with.units.size(); ++i) EXPECT_EQ(with.units[i].sources, without.units[i].sources);
}

TEST(BlockGraph, InteriorWidthBound) {
  for (int n : {4, 16, 36, 64}) {
    const int H = geometry(n).height;
    const int m1 = 1 << (H + 2);
    const BlockGraph g = build_block_graph({n, m1, 257, true});
    int sum = 0;
    for (int h = 1; h <= H; ++h) sum += m1 >> (h - 1);
    int interior = 0;
    for (const auto& u : g.units)
      if (u.coord.l > 1) interior = std::max(interior, u.in_channels);
    // Reached at (1,H+1), which aggregates every height at length H.
    EXPECT_EQ(interior, sum) << "N=" << n;
    EXPECT_LT(interior, 2 * m1);
  }
}

TEST(BlockGraph, EvaluationOrderRespectsDependencies) {
  const BlockGraph g = build_block_graph({36, 64, 257, true});
  std::set<UnitCoord> done;
  for (const auto& u : g.units) {
    for (const auto& s : u.sources)
      if (s.kind == NodeRef::Kind::UnitOutput) EXPECT_TRUE(done.count(s.unit));
    if (u.residual) EXPECT_TRUE(done.count(u.residual->from));
    done.insert(u.coord);
  }
}

TEST(BlockGraph, Deterministic) {
  EXPECT_EQ(build_block_graph({16, 64, 257, true}).describe(), build_block_graph({16, 64, 257, true}).describe());
}
