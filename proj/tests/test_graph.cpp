#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "gmrf/graph.hpp"
#include "gmrf/rng.hpp"

using namespace gmrf;

namespace {

std::vector<std::size_t> to_vec(std::span<const std::size_t> s) { return {s.begin(), s.end()}; }

MarkovGraph erdos_renyi(std::size_t n, double p, RngStream& s) {
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (s.uniform() < p) edges.push_back({i, j, 1.0});
        }
    }
    return from_edge_list(n, edges);
}

// Exhaustive search for a proper coloring with k colors.
bool colorable(const MarkovGraph& g, int k, std::vector<int>& color, std::size_t v) {
    if (v == g.size()) return true;
    for (int c = 1; c <= k; ++c) {
        bool ok = true;
        for (std::size_t u : g.neighbors(v)) {
            if (u < v && color[u] == c) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        color[v] = c;
        if (colorable(g, k, color, v + 1)) return true;
    }
    color[v] = 0;
    return false;
}

}  // namespace

TEST(Lattice, TwoByTwoKingIsClique) {
    const auto g = build_lattice(2, 2, Neighborhood::king8);
    EXPECT_EQ(g.size(), 4u);
    EXPECT_EQ(g.num_edges(), 6u);
}

TEST(Lattice, OneByThreeRookIsPath) {
    const auto g = build_lattice(1, 3, Neighborhood::rook4);
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_EQ(to_vec(g.neighbors(0)), (std::vector<std::size_t>{1}));
    EXPECT_EQ(to_vec(g.neighbors(1)), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(to_vec(g.neighbors(2)), (std::vector<std::size_t>{1}));
}

TEST(Lattice, KingDegreesCenterAndCorner) {
    const auto g = build_lattice(3, 3, Neighborhood::king8);
    EXPECT_EQ(g.degree(4), 8u);
    EXPECT_EQ(g.degree(0), 3u);
}

TEST(Lattice, KingDegreeBoundsOnLargerGrid) {
    const std::size_t r = 7, c = 9;
    const auto g = build_lattice(r, c, Neighborhood::king8);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const bool row_edge = i == 0 || i == r - 1;
            const bool col_edge = j == 0 || j == c - 1;
            const std::size_t expected = row_edge && col_edge ? 3 : (row_edge || col_edge ? 5 : 8);
            EXPECT_EQ(g.degree(i * c + j), expected) << i << "," << j;
        }
    }
}

TEST(Lattice, ZeroDimensionRejected) {
    EXPECT_THROW(build_lattice(0, 3, Neighborhood::rook4), std::invalid_argument);
    EXPECT_THROW(build_lattice(3, 0, Neighborhood::king8), std::invalid_argument);
}

TEST(EdgeList, DedupAndSymmetrize) {
    const auto g = from_edge_list(3, {{0, 1}, {1, 0}, {1, 2}});
    EXPECT_EQ(to_vec(g.neighbors(0)), (std::vector<std::size_t>{1}));
    EXPECT_EQ(to_vec(g.neighbors(1)), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(to_vec(g.neighbors(2)), (std::vector<std::size_t>{1}));
}

TEST(EdgeList, EmptyEdgeSet) {
    const auto g = from_edge_list(2, std::span<const WeightedEdge>{});
    EXPECT_EQ(g.size(), 2u);
    EXPECT_EQ(g.num_edges(), 0u);
    EXPECT_EQ(g.connected_components(), 2u);
}

TEST(EdgeList, DuplicatesCollapse) {
    const auto g = from_edge_list(4, {{0, 3}, {3, 0}, {1, 2}});
    EXPECT_EQ(g.num_edges(), 2u);
}

TEST(EdgeList, Errors) {
    EXPECT_THROW(from_edge_list(3, {{0, 3}}), std::invalid_argument);
    EXPECT_THROW(from_edge_list(3, {{1, 1}}), std::invalid_argument);
    const std::vector<WeightedEdge> conflicting{{0, 1, 1.0}, {1, 0, 2.0}};
    EXPECT_THROW(from_edge_list(2, conflicting), std::invalid_argument);
}

TEST(EdgeList, WeightMatrixIsSymmetric) {
    RngStream s(7, 0);
    std::vector<WeightedEdge> edges;
    for (int t = 0; t < 200; ++t) {
        const auto i = static_cast<std::size_t>(s.next_u64() % 30);
        const auto j = static_cast<std::size_t>(s.next_u64() % 30);
        if (i != j) edges.push_back({i, j, 1.0});
    }
    const auto g = from_edge_list(30, edges);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j : g.neighbors(i)) EXPECT_TRUE(g.adjacent(j, i));
    }
}

TEST(Greedy, PathNeedsTwoColors) {
    const auto g = build_lattice(1, 3, Neighborhood::rook4);
    const auto c = greedy_color(g);
    EXPECT_EQ(c.k, 2);
    EXPECT_TRUE(validate_coloring(g, c));
}

TEST(Greedy, CliqueNeedsFourColorsInAnyOrder) {
    const auto g = build_lattice(2, 2, Neighborhood::king8);
    std::vector<std::size_t> order{0, 1, 2, 3};
    do {
        EXPECT_EQ(greedy_color(g, order).k, 4);
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST(Greedy, KingLatticeFourByFourPattern) {
    const auto g = build_lattice(4, 4, Neighborhood::king8);
    const auto c = greedy_color(g);
    EXPECT_EQ(c.k, 4);
    const std::vector<int> expected{1, 2, 1, 2, 3, 4, 3, 4, 1, 2, 1, 2, 3, 4, 3, 4};
    EXPECT_EQ(c.assignment, expected);

    std::vector<int> color(g.size(), 0);
    EXPECT_FALSE(colorable(g, 3, color, 0)) << "a 3-coloring would contradict chromatic number 4";
}

TEST(Greedy, KingLatticeAlwaysFour) {
    for (std::size_t side : {2u, 3u, 5u, 16u, 50u}) {
        EXPECT_EQ(greedy_color(build_lattice(side, side, Neighborhood::king8)).k, 4) << side;
    }
}

TEST(Greedy, RejectsNonPermutation) {
    const auto g = build_lattice(1, 3, Neighborhood::rook4);
    const std::vector<std::size_t> bad{0, 0, 2};
    EXPECT_THROW(greedy_color(g, bad), std::invalid_argument);
    const std::vector<std::size_t> short_order{0, 1};
    EXPECT_THROW(greedy_color(g, short_order), std::invalid_argument);
}

TEST(Greedy, IsolatedNodesGetColorOne) {
    const auto g = from_edge_list(4, {{0, 1}});
    const auto c = greedy_color(g);
    EXPECT_EQ(c.assignment[2], 1);
    EXPECT_EQ(c.assignment[3], 1);
}

TEST(Greedy, PropertyProperAndBoundedOnRandomGraphs) {
    RngStream s(2024, 1);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = erdos_renyi(60, 0.1, s);
        for (const char* spec : {"natural", "degree-desc", "random:5"}) {
            const auto c = greedy_color(g, make_color_order(g, ColorOrder::parse(spec)));
            ASSERT_TRUE(validate_coloring(g, c));
            EXPECT_LE(static_cast<std::size_t>(c.k), g.max_degree() + 1);
        }
    }
}

TEST(Validate, Examples) {
    const auto path = build_lattice(1, 3, Neighborhood::rook4);
    EXPECT_TRUE(validate_coloring(path, Coloring::from_assignment({1, 2, 1})));
    EXPECT_FALSE(validate_coloring(path, Coloring::from_assignment({1, 1, 2})));
    const auto clique = build_lattice(2, 2, Neighborhood::king8);
    EXPECT_TRUE(validate_coloring(clique, Coloring::from_assignment({1, 2, 3, 4})));
    EXPECT_THROW(validate_coloring(path, Coloring::from_assignment({1, 2})), std::invalid_argument);
}

TEST(ColorOrderParse, ParsesAndRejects) {
    EXPECT_EQ(ColorOrder::parse("natural").kind, ColorOrderKind::natural);
    EXPECT_EQ(ColorOrder::parse("degree-desc").kind, ColorOrderKind::degree_desc);
    const auto r = ColorOrder::parse("random:17");
    EXPECT_EQ(r.kind, ColorOrderKind::random);
    EXPECT_EQ(r.seed, 17u);
    EXPECT_THROW(ColorOrder::parse("random:"), std::invalid_argument);
    EXPECT_THROW(ColorOrder::parse("dsatur"), std::invalid_argument);
}

TEST(ColorOrderParse, RandomOrderIsPermutation) {
    const auto g = build_lattice(5, 5, Neighborhood::king8);
    const auto order = make_color_order(g, ColorOrder::parse("random:3"));
    EXPECT_TRUE(is_permutation_of_nodes(order, g.size()));
    EXPECT_EQ(order, make_color_order(g, ColorOrder::parse("random:3")));
}

TEST(Knn, MinimumDegreeAndConnectivityShape) {
    RngStream s(11, 0);
    const auto g = random_knn_graph(100, 4, s);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_GE(g.degree(i), 4u);
}

TEST(Components, CountsLatticeAndPieces) {
    EXPECT_EQ(build_lattice(4, 4, Neighborhood::rook4).connected_components(), 1u);
    EXPECT_EQ(from_edge_list(5, {{0, 1}, {2, 3}}).connected_components(), 3u);
}
