#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "cdnr/error.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/rng.hpp"

namespace cdnr::synth {

struct LabeledGraph {
    Graph graph;
    std::vector<std::vector<std::uint32_t>> labels;  // per node index
};

// Preferential attachment: starts from the complete graph on m + 1 nodes, then
// every new node attaches to m distinct existing nodes chosen proportionally
// to degree.
inline Graph scale_free(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m < 1) throw ValueError("scale_free: m must be >= 1");
    if (n <= m) throw ValueError("scale_free: n must exceed m");
    Rng rng(seed);
    std::vector<WeightedEdge> edges;
    // Every endpoint occurrence; uniform draws from it are degree-proportional.
    std::vector<NodeId> endpoints;
    for (NodeId u = 0; u <= m; ++u)
        for (NodeId v = u + 1; v <= m; ++v) {
            edges.push_back({u, v, 1.0});
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    std::vector<NodeId> targets;
    for (auto t = static_cast<NodeId>(m + 1); t < n; ++t) {
        targets.clear();
        std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
        while (targets.size() < m) {
            NodeId cand = endpoints[pick(rng)];
            if (std::find(targets.begin(), targets.end(), cand) == targets.end()) targets.push_back(cand);
        }
        for (NodeId v : targets) {
            edges.push_back({v, t, 1.0});
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    return Graph::from_edges(n, std::move(edges), false);
}

// Stochastic block model with equal-sized communities; community index is the
// node's single label. Communities are contiguous index blocks.
inline LabeledGraph planted_partition(std::size_t n, std::size_t communities, double p_in, double p_out,
                                      std::uint64_t seed) {
    if (communities < 2) throw ValueError("planted_partition: need at least 2 communities");
    if (n % communities != 0) throw ValueError("planted_partition: n must be divisible by communities");
    if (!(0.0 <= p_out && p_out < p_in && p_in <= 1.0))
        throw ValueError("planted_partition: require 0 <= p_out < p_in <= 1");
    const std::size_t block = n / communities;
    Rng rng(seed);
    std::vector<WeightedEdge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) {
            double p = (u / block == v / block) ? p_in : p_out;
            if (uniform01(rng) < p) edges.push_back({u, v, 1.0});
        }
    LabeledGraph out;
    out.graph = Graph::from_edges(n, std::move(edges), false);
    out.labels.resize(n);
    for (std::size_t v = 0; v < n; ++v) out.labels[v] = {static_cast<std::uint32_t>(v / block)};
    return out;
}

// Keeps round(keep_fraction * |E|) edges sampled uniformly without
// replacement. Node set and ids are untouched.
inline Graph degrade(const Graph& g, double keep_fraction, std::uint64_t seed) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ValueError("degrade: keep_fraction must be in (0, 1]");
    auto edges = g.edges();
    auto keep = static_cast<std::size_t>(std::llround(keep_fraction * static_cast<double>(edges.size())));
    keep = std::min(keep, edges.size());
    std::vector<std::size_t> idx(edges.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<WeightedEdge> kept;
    kept.reserve(keep);
    for (auto i : idx) kept.push_back(edges[i]);
    return Graph::from_edges(g.node_count(), std::move(kept), g.directed(), g.ids());
}

// Uniform simple undirected graph with exactly m edges.
inline Graph random_gnm(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n < 2 || m > n * (n - 1) / 2) throw ValueError("random_gnm: too many edges for n");
    Rng rng(seed);
    std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(m * 2);
    std::vector<WeightedEdge> edges;
    edges.reserve(m);
    while (edges.size() < m) {
        NodeId u = pick(rng), v = pick(rng);
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) edges.push_back({u, v, 1.0});
    }
    return Graph::from_edges(n, std::move(edges), false);
}

}  // namespace cdnr::synth
