#include "lexgraph/community.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

namespace {

using namespace lexgraph;

// Exhaustive modularity maximum over all set partitions, enumerated as
// restricted growth strings (rgs[0] = 0, rgs[i] <= max(prefix) + 1). Only
// viable for small n (Bell(8) = 4140).
double brute_force_best_modularity(const WeightedGraph& g, double resolution = 1.0) {
    const std::size_t n = g.node_count();
    if (n == 0) return 0.0;
    std::vector<int> rgs(n, 0);
    double best = modularity(g, rgs, resolution);
    for (;;) {
        bool advanced = false;
        for (std::size_t i = n - 1; i >= 1; --i) {
            int prefix_max = 0;
            for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
            if (rgs[i] <= prefix_max) {
                ++rgs[i];
                for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
                advanced = true;
                break;
            }
            if (i == 1) break;
        }
        if (!advanced) break;
        best = std::max(best, modularity(g, rgs, resolution));
    }
    return best;
}

bool communities_connected(const WeightedGraph& g, const std::vector<int>& assignment) {
    const std::size_t n = g.node_count();
    std::vector<bool> seen(n, false);
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        // BFS within the community of `start`.
        std::vector<std::size_t> frontier{start};
        seen[start] = true;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const std::size_t v = frontier.back();
            frontier.pop_back();
            for (const auto& [u, w] : g.neighbors(v)) {
                if (w <= 0.0) continue;
                if (!seen[u] && assignment[u] == assignment[start]) {
                    seen[u] = true;
                    ++reached;
                    frontier.push_back(u);
                }
            }
        }
        std::size_t community_size = 0;
        for (std::size_t v = 0; v < n; ++v)
            if (assignment[v] == assignment[start]) ++community_size;
        if (reached != community_size) return false;
    }
    return true;
}

WeightedGraph two_triangles() {
    WeightedGraph g(6);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    g.add_edge(3, 4);
    g.add_edge(4, 5);
    g.add_edge(3, 5);
    return g;
}

TEST(Modularity, HandComputedTwoTriangles) {
    const WeightedGraph g = two_triangles();
    // True split: Q = 0.5. Everything in one community: Q = 0.
    EXPECT_NEAR(modularity(g, {0, 0, 0, 1, 1, 1}), 0.5, 1e-12);
    EXPECT_NEAR(modularity(g, {0, 0, 0, 0, 0, 0}), 0.0, 1e-12);
}

TEST(Modularity, SingletonsOnEdgelessGraphIsZero) {
    WeightedGraph g(4);
    EXPECT_DOUBLE_EQ(modularity(g, {0, 1, 2, 3}), 0.0);
}

TEST(Modularity, IncompleteAssignmentIsAnError) {
    const WeightedGraph g = two_triangles();
    EXPECT_THROW(modularity(g, {0, 0, 0}), ValidationError);
    EXPECT_THROW(modularity(g, {0, 0, 0, 0, 0, -1}), ValidationError);
}

TEST(WeightedGraphTest, RejectsSelfLoopsAndNegativeWeights) {
    WeightedGraph g(3);
    EXPECT_THROW(g.add_edge(1, 1), ValidationError);
    EXPECT_THROW(g.add_edge(0, 1, -0.5), ValidationError);
}

TEST(Leiden, EmptyGraph) {
    const Partition p = leiden(WeightedGraph{});
    EXPECT_TRUE(p.assignment.empty());
    EXPECT_DOUBLE_EQ(p.modularity, 0.0);
}

TEST(Leiden, TwoTrianglesSplitAtOptimum) {
    const WeightedGraph g = two_triangles();
    const Partition p = leiden(g);
    EXPECT_EQ(p.community_count(), 2);
    EXPECT_EQ(p.assignment[0], p.assignment[1]);
    EXPECT_EQ(p.assignment[1], p.assignment[2]);
    EXPECT_EQ(p.assignment[3], p.assignment[4]);
    EXPECT_EQ(p.assignment[4], p.assignment[5]);
    EXPECT_NE(p.assignment[0], p.assignment[3]);
    EXPECT_NEAR(p.modularity, brute_force_best_modularity(g), 1e-12);
}

TEST(Leiden, CompleteGraphStaysTogether) {
    WeightedGraph g(5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) g.add_edge(i, j);
    const Partition p = leiden(g);
    EXPECT_EQ(p.community_count(), 1);
    EXPECT_NEAR(p.modularity, brute_force_best_modularity(g), 1e-12);
}

TEST(Leiden, SingletonGraph) {
    WeightedGraph g(1);
    const Partition p = leiden(g);
    ASSERT_EQ(p.assignment.size(), 1u);
    EXPECT_EQ(p.assignment[0], 0);
}

TEST(Leiden, DeterministicForFixedSeed) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng() % 8;
        WeightedGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 3 == 0) g.add_edge(i, j, 1.0 + (rng() % 4));
        LeidenConfig config;
        config.rng_seed = 123;
        const Partition a = leiden(g, config);
        const Partition b = leiden(g, config);
        EXPECT_EQ(a.assignment, b.assignment);
        EXPECT_DOUBLE_EQ(a.modularity, b.modularity);
    }
}

TEST(Leiden, PerPassModularityMonotone) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 4 + rng() % 10;
        WeightedGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 3 != 0) g.add_edge(i, j);
        LeidenConfig config;
        config.rng_seed = trial;
        LeidenTrace trace;
        leiden(g, config, &trace);
        for (std::size_t i = 1; i < trace.pass_modularity.size(); ++i)
            EXPECT_GE(trace.pass_modularity[i], trace.pass_modularity[i - 1] - 1e-12);
    }
}

// Randomized small graphs: near-optimal quality, connectivity, and a sane
// partition. The acceptance suite re-runs this at 200 trials.
TEST(Leiden, PropertyNearOptimalOnSmallGraphs) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng() % 7;  // up to 8 nodes
        WeightedGraph g(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng() % 2 == 0) g.add_edge(i, j, 1.0 + static_cast<double>(rng() % 3));
        LeidenConfig config;
        config.rng_seed = trial;
        const Partition p = leiden(g, config);

        ASSERT_EQ(p.assignment.size(), n);
        const double best = brute_force_best_modularity(g);
        if (best > 0.0) {
            EXPECT_GE(p.modularity, 0.95 * best)
                << "trial " << trial << ": got " << p.modularity << " vs optimum " << best;
        }
        EXPECT_TRUE(communities_connected(g, p.assignment)) << "trial " << trial;
        // Output at least matches the all-singletons baseline.
        std::vector<int> singletons(n);
        for (std::size_t i = 0; i < n; ++i) singletons[i] = static_cast<int>(i);
        EXPECT_GE(p.modularity, modularity(g, singletons) - 1e-12);
        // Recomputable from scratch.
        EXPECT_NEAR(p.modularity, modularity(g, p.assignment), 1e-12);
    }
}

TEST(Leiden, MinCommunitySizeMergesSmallParts) {
    // Two triangles plus a pendant node attached to the first.
    WeightedGraph g(7);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    g.add_edge(3, 4);
    g.add_edge(4, 5);
    g.add_edge(3, 5);
    g.add_edge(2, 6, 0.1);
    LeidenConfig config;
    config.min_community_size = 2;
    const Partition p = leiden(g, config);
    std::map<int, int> sizes;
    for (int c : p.assignment) sizes[c]++;
    for (const auto& [_, size] : sizes) EXPECT_GE(size, 2);
}

}  // namespace
