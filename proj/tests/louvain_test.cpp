#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "svqvae/louvain.hpp"

using namespace svqvae;

namespace {

// brute-force maximum modularity by enumerating every partition (restricted
// growth strings); usable up to ~10 nodes
double brute_force_best_q(const UndirectedGraph& graph) {
    const std::size_t n = graph.n;
    std::vector<int> assignment(n, 0);
    double best = -1.0;
    // enumerate assignments where assignment[i] <= 1 + max(assignment[0..i-1])
    const auto recurse = [&](auto&& self, std::size_t i, int max_used) -> void {
        if (i == n) {
            best = std::max(best, modularity(graph, assignment));
            return;
        }
        for (int c = 0; c <= max_used + 1; ++c) {
            assignment[i] = c;
            self(self, i + 1, std::max(max_used, c));
        }
    };
    recurse(recurse, 0, -1);
    return best;
}

// independent Q recomputation straight from the definition
double q_oracle(const UndirectedGraph& graph, const std::vector<int>& comm) {
    const double m = double(graph.edge_count());
    if (m == 0.0) return 0.0;
    std::set<int> ids(comm.begin(), comm.end());
    double q = 0.0;
    for (int c : ids) {
        double e_c = 0.0, a_c = 0.0;
        for (std::size_t i = 0; i < graph.n; ++i) {
            if (comm[i] != c) continue;
            a_c += double(graph.adj[i].size());
            for (int j : graph.adj[i]) {
                if (comm[std::size_t(j)] == c && j > int(i)) e_c += 1.0;
            }
        }
        q += e_c / m - (a_c / (2.0 * m)) * (a_c / (2.0 * m));
    }
    return q;
}

UndirectedGraph two_cliques(std::size_t p, std::size_t q, bool bridge = false) {
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) edges.emplace_back(int(i), int(j));
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = i + 1; j < q; ++j) edges.emplace_back(int(p + i), int(p + j));
    if (bridge) edges.emplace_back(0, int(p));
    return UndirectedGraph::from_edges(p + q, edges);
}

}  // namespace

TEST_CASE("graph construction symmetrizes, dedups and drops self edges") {
    const UndirectedGraph g =
        UndirectedGraph::from_edges(4, {{0, 1}, {1, 0}, {2, 2}, {1, 2}, {1, 2}});
    CHECK(g.edge_count() == 2);
    CHECK(g.adj[0] == std::vector<int>{1});
    CHECK(g.adj[1] == std::vector<int>{0, 2});
    CHECK(g.adj[2] == std::vector<int>{1});
    CHECK(g.adj[3].empty());
    CHECK_THROWS_AS(UndirectedGraph::from_edges(2, {{0, 5}}), std::invalid_argument);
}

TEST_CASE("modularity of hand partitions on a single edge") {
    const UndirectedGraph g = UndirectedGraph::from_edges(2, {{0, 1}});
    CHECK(modularity(g, {0, 0}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(modularity(g, {0, 1}) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(brute_force_best_q(g) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two disjoint triangles are split into their components") {
    const UndirectedGraph g = two_cliques(3, 3);
    Rng rng(5);
    const CommunityPartition part = louvain(g, rng);
    CHECK(part.communities[0] == part.communities[1]);
    CHECK(part.communities[1] == part.communities[2]);
    CHECK(part.communities[3] == part.communities[4]);
    CHECK(part.communities[4] == part.communities[5]);
    CHECK(part.communities[0] != part.communities[3]);
    // each triangle: e_c/m = 3/6, (a_c/2m)^2 = (6/12)^2 -> Q = 2(1/2 - 1/4)
    CHECK(part.modularity == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("louvain matches brute force on every two-clique graph up to 8 nodes") {
    for (std::size_t p = 2; p <= 6; ++p) {
        for (std::size_t q = p; p + q <= 8; ++q) {
            for (bool bridge : {false, true}) {
                const UndirectedGraph g = two_cliques(p, q, bridge);
                Rng rng(11);
                const CommunityPartition part = louvain(g, rng);
                const double best = brute_force_best_q(g);
                CAPTURE(p);
                CAPTURE(q);
                CAPTURE(bridge);
                CHECK(std::fabs(part.modularity - best) <= 1e-12);
                CHECK(std::fabs(part.modularity - q_oracle(g, part.communities)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("reported Q equals an independent recomputation on random graphs") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.next_below(12);
        std::vector<std::pair<int, int>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng.next_double() < 0.3) edges.emplace_back(int(i), int(j));
            }
        }
        const UndirectedGraph g = UndirectedGraph::from_edges(n, edges);
        Rng lrng(trial);
        const CommunityPartition part = louvain(g, lrng);
        CHECK(std::fabs(part.modularity - q_oracle(g, part.communities)) <= 1e-12);
        CHECK(part.modularity >= -0.5 - 1e-12);
        CHECK(part.modularity <= 1.0 + 1e-12);
        for (std::size_t i = 0; i < n; ++i) CHECK(part.communities[i] >= 0);
    }
}

TEST_CASE("louvain Q is at least the median partition Q on small graphs") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 5 + rng.next_below(3);
        std::vector<std::pair<int, int>> edges;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (rng.next_double() < 0.5) edges.emplace_back(int(i), int(j));
            }
        }
        const UndirectedGraph g = UndirectedGraph::from_edges(n, edges);
        if (g.edge_count() == 0) continue;

        // collect Q over all partitions
        std::vector<double> all_q;
        std::vector<int> assignment(n, 0);
        const auto recurse = [&](auto&& self, std::size_t i, int max_used) -> void {
            if (i == n) {
                all_q.push_back(modularity(g, assignment));
                return;
            }
            for (int c = 0; c <= max_used + 1; ++c) {
                assignment[i] = c;
                self(self, i + 1, std::max(max_used, c));
            }
        };
        recurse(recurse, 0, -1);
        std::sort(all_q.begin(), all_q.end());
        const double median = all_q[all_q.size() / 2];

        Rng lrng(trial + 100);
        const CommunityPartition part = louvain(g, lrng);
        CHECK(part.modularity >= median - 1e-12);
    }
}

TEST_CASE("louvain is deterministic under a fixed seed") {
    const UndirectedGraph g = two_cliques(4, 4, true);
    Rng a(7), b(7);
    const CommunityPartition p1 = louvain(g, a);
    const CommunityPartition p2 = louvain(g, b);
    CHECK(p1.communities == p2.communities);
    CHECK(p1.modularity == p2.modularity);
}

TEST_CASE("edgeless and trivial graphs") {
    const UndirectedGraph empty_edges = UndirectedGraph::from_edges(3, {});
    Rng rng(1);
    const CommunityPartition part = louvain(empty_edges, rng);
    CHECK(part.modularity == 0.0);
    CHECK(part.communities.size() == 3);
    CHECK_THROWS_AS(louvain(UndirectedGraph{}, rng), std::invalid_argument);
}
