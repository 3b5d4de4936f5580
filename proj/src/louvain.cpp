#include "svqvae/louvain.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace svqvae {

UndirectedGraph UndirectedGraph::from_edges(std::size_t n,
                                            const std::vector<std::pair<int, int>>& edges) {
    UndirectedGraph g;
    g.n = n;
    g.adj.resize(n);
    std::vector<std::pair<int, int>> canon;
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n ||
            static_cast<std::size_t>(b) >= n) {
            throw std::invalid_argument("graph edge (" + std::to_string(a) + "," +
                                        std::to_string(b) + ") outside 0.." + std::to_string(n - 1));
        }
        if (a == b) continue;
        canon.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(canon.begin(), canon.end());
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    for (auto [a, b] : canon) {
        g.adj[static_cast<std::size_t>(a)].push_back(b);
        g.adj[static_cast<std::size_t>(b)].push_back(a);
    }
    return g;
}

std::size_t UndirectedGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adj) twice += nbrs.size();
    return twice / 2;
}

double modularity(const UndirectedGraph& graph, const std::vector<int>& communities) {
    if (communities.size() != graph.n) {
        throw std::invalid_argument("modularity: partition size " +
                                    std::to_string(communities.size()) + " for graph of " +
                                    std::to_string(graph.n) + " nodes");
    }
    const double m = static_cast<double>(graph.edge_count());
    if (m == 0.0) return 0.0;
    std::map<int, double> intra, degree_sum;
    for (std::size_t i = 0; i < graph.n; ++i) {
        degree_sum[communities[i]] += static_cast<double>(graph.adj[i].size());
        for (int j : graph.adj[i]) {
            if (communities[static_cast<std::size_t>(j)] == communities[i]) {
                intra[communities[i]] += 0.5;  // each intra edge seen from both ends
            }
        }
    }
    double q = 0.0;
    for (const auto& [c, deg] : degree_sum) {
        const double e_c = intra.count(c) ? intra[c] : 0.0;
        const double a_c = deg;
        q += e_c / m - (a_c / (2.0 * m)) * (a_c / (2.0 * m));
    }
    return q;
}

namespace {

// weighted graph used across aggregation levels; a self-loop is stored once
// with twice its weight so that degree(i) is a plain sum over adj[i]
struct LevelGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> degree;  // weighted, self-loops counted twice
    double m2 = 0.0;             // sum of degrees = 2m

    void finalize() {
        degree.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& [j, w] : adj[i]) degree[i] += w;
        }
        m2 = std::accumulate(degree.begin(), degree.end(), 0.0);
    }
};

// one local-moving phase; returns the node->community map (compacted) and
// whether any node moved
bool local_moving(const LevelGraph& g, Rng& rng, std::vector<int>& node_comm) {
    node_comm.resize(g.n);
    std::iota(node_comm.begin(), node_comm.end(), 0);
    std::vector<double> comm_tot = g.degree;  // total degree per community

    bool any_move = false;
    bool improved = true;
    int passes = 0;
    while (improved && passes < 128) {
        improved = false;
        ++passes;
        const std::vector<std::size_t> order = rng.permutation(g.n);
        for (std::size_t oi = 0; oi < g.n; ++oi) {
            const std::size_t i = order[oi];
            const int cur = node_comm[i];

            // weights from i to each neighboring community (self-loops excluded:
            // they follow the node wherever it goes)
            std::map<int, double> links;
            links[cur] += 0.0;
            for (const auto& [j, w] : g.adj[i]) {
                if (static_cast<std::size_t>(j) == i) continue;
                links[node_comm[static_cast<std::size_t>(j)]] += w;
            }

            comm_tot[static_cast<std::size_t>(cur)] -= g.degree[i];
            // gain of joining community c, up to a constant: w(i->c) - k_i*tot_c/m2
            double best_gain = links[cur] - g.degree[i] * comm_tot[static_cast<std::size_t>(cur)] / g.m2;
            int best_comm = cur;
            for (const auto& [c, w] : links) {
                if (c == cur) continue;
                const double gain = w - g.degree[i] * comm_tot[static_cast<std::size_t>(c)] / g.m2;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_comm = c;
                }
            }
            comm_tot[static_cast<std::size_t>(best_comm)] += g.degree[i];
            if (best_comm != cur) {
                node_comm[i] = best_comm;
                improved = true;
                any_move = true;
            }
        }
    }

    // compact community ids
    std::map<int, int> remap;
    for (int& c : node_comm) {
        auto [it, inserted] = remap.try_emplace(c, static_cast<int>(remap.size()));
        c = it->second;
    }
    return any_move;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& node_comm,
                     std::size_t num_comms) {
    LevelGraph next;
    next.n = num_comms;
    next.adj.resize(num_comms);
    std::vector<std::map<int, double>> acc(num_comms);
    for (std::size_t i = 0; i < g.n; ++i) {
        const int ci = node_comm[i];
        for (const auto& [j, w] : g.adj[i]) {
            const int cj = node_comm[static_cast<std::size_t>(j)];
            if (static_cast<std::size_t>(j) == i) {
                acc[static_cast<std::size_t>(ci)][ci] += w;  // self-loop, already doubled
            } else if (ci == cj) {
                acc[static_cast<std::size_t>(ci)][ci] += w;  // both directions sum to 2w
            } else {
                acc[static_cast<std::size_t>(ci)][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < num_comms; ++c) {
        for (const auto& [d, w] : acc[c]) next.adj[c].emplace_back(d, w);
    }
    next.finalize();
    return next;
}

}  // namespace

CommunityPartition louvain(const UndirectedGraph& graph, Rng& rng) {
    if (graph.n == 0) throw std::invalid_argument("louvain: empty graph");

    CommunityPartition result;
    result.communities.resize(graph.n);
    std::iota(result.communities.begin(), result.communities.end(), 0);
    if (graph.edge_count() == 0) {
        result.modularity = 0.0;
        return result;
    }

    LevelGraph level;
    level.n = graph.n;
    level.adj.resize(graph.n);
    for (std::size_t i = 0; i < graph.n; ++i) {
        for (int j : graph.adj[i]) level.adj[i].emplace_back(j, 1.0);
    }
    level.finalize();

    // node -> community on the original graph, refined level by level
    std::vector<int> full = result.communities;
    for (;;) {
        std::vector<int> node_comm;
        const bool moved = local_moving(level, rng, node_comm);
        if (!moved) break;
        for (std::size_t i = 0; i < graph.n; ++i) {
            full[i] = node_comm[static_cast<std::size_t>(full[i])];
        }
        const std::size_t num_comms =
            static_cast<std::size_t>(*std::max_element(node_comm.begin(), node_comm.end())) + 1;
        if (num_comms == level.n) break;
        level = aggregate(level, node_comm, num_comms);
    }

    // compact ids on the original nodes
    std::map<int, int> remap;
    for (int& c : full) {
        auto [it, inserted] = remap.try_emplace(c, static_cast<int>(remap.size()));
        c = it->second;
    }
    result.communities = full;
    result.modularity = modularity(graph, result.communities);
    return result;
}

}  // namespace svqvae
