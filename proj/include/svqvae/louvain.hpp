#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "svqvae/rng.hpp"

namespace svqvae {

// Undirected unit-weight graph. Directed input edges are symmetrized;
// duplicate and self edges collapse.
struct UndirectedGraph {
    std::size_t n = 0;
    std::vector<std::vector<int>> adj;

    static UndirectedGraph from_edges(std::size_t n, const std::vector<std::pair<int, int>>& edges);

    std::size_t edge_count() const;
};

// Newman modularity Q = sum_c (e_c/m - (a_c/2m)^2) of a node->community map.
double modularity(const UndirectedGraph& graph, const std::vector<int>& communities);

struct CommunityPartition {
    std::vector<int> communities;  // node -> community id, ids compacted
    double modularity = 0.0;
};

// Two-phase Louvain: local moving until no gain, then aggregation, repeated.
// Node visitation order is shuffled with rng; fixed seed, fixed result.
CommunityPartition louvain(const UndirectedGraph& graph, Rng& rng);

}  // namespace svqvae
