#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdnr/balance.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/walker.hpp"

namespace cdnr {

// Weighted undirected graph over super nodes. Self-loop mass is kept apart
// from the adjacency used for path search.
class SuperGraph {
public:
    SuperGraph() = default;
    explicit SuperGraph(std::size_t super_count) : adj_(super_count), self_loop_(super_count, 0.0) {}

    std::size_t size() const noexcept { return adj_.size(); }

    // Adds w to the undirected edge {a, b}. Only used while building.
    void add(std::size_t a, std::size_t b, double w) {
        if (a == b) {
            self_loop_[a] += w;
            return;
        }
        add_arc(a, b, w);
        add_arc(b, a, w);
    }

    double weight(std::size_t a, std::size_t b) const {
        if (a == b) return self_loop_[a];
        const auto& nb = adj_[a];
        auto it = std::lower_bound(nb.begin(), nb.end(), b, [](const auto& e, std::size_t x) { return e.first < x; });
        return (it != nb.end() && it->first == b) ? it->second : 0.0;
    }

    double self_loop(std::size_t a) const { return self_loop_[a]; }
    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t a) const { return adj_[a]; }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (std::size_t a = 0; a < adj_.size(); ++a) {
            for (const auto& e : adj_[a])
                if (a < e.first) ++n;
            if (self_loop_[a] > 0) ++n;
        }
        return n;
    }

    std::size_t skipped_occurrences = 0;  // walk positions on unclustered nodes

private:
    void add_arc(std::size_t a, std::size_t b, double w) {
        auto& nb = adj_[a];
        auto it = std::lower_bound(nb.begin(), nb.end(), b, [](const auto& e, std::size_t x) { return e.first < x; });
        if (it != nb.end() && it->first == b)
            it->second += w;
        else
            nb.insert(it, {b, w});
    }

    std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
    std::vector<double> self_loop_;
};

struct SuperGraphOptions {
    // Only position pairs at most this far apart contribute; unset = whole walk.
    std::optional<std::size_t> pair_distance_cap;
};

// For each walk and each position pair i < j holding distinct nodes, adds
// 1 / (j - i) to the super edge between their super nodes (a self-loop when
// both fall in the same super node).
inline SuperGraph build_super_graph(const WalkSet& walks, const SuperNodeSet& supers,
                                    const SuperGraphOptions& opts = {}) {
    const std::size_t S = supers.size();
    const auto membership = supers.membership();
    const std::size_t cap = opts.pair_distance_cap.value_or(std::numeric_limits<std::size_t>::max());

    // Dense upper-triangular accumulator for small super sets, hash map otherwise.
    const bool dense = S <= 2048;
    std::vector<double> acc(dense ? S * S : 0, 0.0);
    std::unordered_map<std::uint64_t, double> sparse;
    std::size_t skipped = 0;

    // Positions are kept so that distances stay walk distances when
    // unclustered nodes are skipped.
    std::vector<std::size_t> sid, pos;
    std::vector<NodeId> node;
    for (const auto& w : walks.walks) {
        sid.clear();
        node.clear();
        pos.clear();
        for (std::size_t i = 0; i < w.size(); ++i) {
            std::size_t s = w[i] < membership.size() ? membership[w[i]] : npos;
            if (s == npos) {
                ++skipped;
                continue;
            }
            sid.push_back(s);
            node.push_back(w[i]);
            pos.push_back(i);
        }
        for (std::size_t a = 0; a < sid.size(); ++a) {
            for (std::size_t b = a + 1; b < sid.size(); ++b) {
                std::size_t dist = pos[b] - pos[a];
                if (dist > cap) break;
                if (node[a] == node[b]) continue;
                std::size_t lo = std::min(sid[a], sid[b]), hi = std::max(sid[a], sid[b]);
                double inc = 1.0 / static_cast<double>(dist);
                if (dense)
                    acc[lo * S + hi] += inc;
                else
                    sparse[(static_cast<std::uint64_t>(lo) << 32) | hi] += inc;
            }
        }
    }

    SuperGraph g(S);
    g.skipped_occurrences = skipped;
    if (dense) {
        for (std::size_t a = 0; a < S; ++a)
            for (std::size_t b = a; b < S; ++b)
                if (acc[a * S + b] > 0) g.add(a, b, acc[a * S + b]);
    } else {
        std::vector<std::pair<std::uint64_t, double>> items(sparse.begin(), sparse.end());
        std::sort(items.begin(), items.end());
        for (auto [key, w] : items) g.add(static_cast<std::size_t>(key >> 32), static_cast<std::size_t>(key & 0xffffffffu), w);
    }
    return g;
}

struct PathScore {
    std::vector<std::size_t> path;
    std::size_t length = 0;  // edges
    double score = 0.0;      // mean super-edge weight along the path
};

namespace detail {

// BFS tree from `src` with ascending-neighbor order; every node's parent chain
// is its lexicographically smallest shortest path from `src`.
inline std::vector<std::size_t> bfs_parents(const SuperGraph& g, std::size_t src) {
    std::vector<std::size_t> parent(g.size(), npos);
    parent[src] = src;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (const auto& [v, w] : g.neighbors(u)) {
            if (parent[v] != npos) continue;
            parent[v] = u;
            queue.push_back(v);
        }
    }
    return parent;
}

inline std::optional<PathScore> path_from_parents(const SuperGraph& g, const std::vector<std::size_t>& parent,
                                                  std::size_t src, std::size_t dst) {
    if (parent[dst] == npos) return std::nullopt;
    PathScore ps;
    for (std::size_t v = dst; v != src; v = parent[v]) ps.path.push_back(v);
    ps.path.push_back(src);
    std::reverse(ps.path.begin(), ps.path.end());
    ps.length = ps.path.size() - 1;
    double sum = 0;
    for (std::size_t i = 0; i + 1 < ps.path.size(); ++i) sum += g.weight(ps.path[i], ps.path[i + 1]);
    ps.score = sum / static_cast<double>(ps.length);
    return ps;
}

}  // namespace detail

// Hop-count shortest path between two super nodes. The search always runs
// from the smaller index so the chosen path (and its score) is symmetric in
// the endpoints. Equal endpoints score their self-loop weight.
inline std::optional<PathScore> shortest_path(const SuperGraph& g, std::size_t a, std::size_t b) {
    if (a == b) return PathScore{{a}, 0, g.self_loop(a)};
    std::size_t lo = std::min(a, b), hi = std::max(a, b);
    auto ps = detail::path_from_parents(g, detail::bfs_parents(g, lo), lo, hi);
    if (ps && a > b) std::reverse(ps->path.begin(), ps->path.end());
    return ps;
}

// Path scores memoized per search root: one BFS per distinct smaller endpoint.
class PathScoreCache {
public:
    explicit PathScoreCache(const SuperGraph& g) : g_(g) {}

    // nullopt when unreachable
    std::optional<double> score(std::size_t a, std::size_t b) {
        if (a == b) return g_.self_loop(a);
        std::size_t lo = std::min(a, b), hi = std::max(a, b);
        auto it = rows_.find(lo);
        if (it == rows_.end()) {
            auto parent = detail::bfs_parents(g_, lo);
            std::vector<double> row(g_.size(), -1.0);
            for (std::size_t t = lo + 1; t < g_.size(); ++t)
                if (auto ps = detail::path_from_parents(g_, parent, lo, t)) row[t] = ps->score;
            it = rows_.emplace(lo, std::move(row)).first;
        }
        double s = it->second[hi];
        if (s < 0) return std::nullopt;
        return s;
    }

private:
    const SuperGraph& g_;
    std::unordered_map<std::size_t, std::vector<double>> rows_;
};

struct TransferEntry {
    NodeId u;
    NodeId v;
    double w0;  // original weight, 0 for a non-edge
    double wt;  // transferred weight
    double z;   // normalizer: sum of link-weight products
    bool evolved() const noexcept { return w0 == 0.0 && wt > 0.0; }
};

struct TransferResult {
    std::vector<TransferEntry> entries;

    std::size_t evolved_count() const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const TransferEntry& e) { return e.evolved(); }));
    }
};

// Existing edges plus every non-adjacent pair within hop_limit hops; u < v.
inline std::vector<std::pair<NodeId, NodeId>> candidate_pairs(const Graph& g, std::size_t hop_limit = 2) {
    if (hop_limit < 1) throw ValueError("candidate_pairs: hop_limit must be >= 1");
    const std::size_t n = g.node_count();
    std::vector<std::pair<NodeId, NodeId>> out;
    std::vector<std::size_t> stamp(n, npos);
    std::vector<NodeId> frontier, next;
    for (NodeId u = 0; u < n; ++u) {
        stamp[u] = u;
        frontier.assign(1, u);
        std::vector<NodeId> found;
        for (std::size_t hop = 0; hop < hop_limit && !frontier.empty(); ++hop) {
            next.clear();
            for (NodeId x : frontier)
                for (const auto& nb : g.neighbors(x))
                    if (stamp[nb.index] != u) {
                        stamp[nb.index] = u;
                        next.push_back(nb.index);
                        if (nb.index > u) found.push_back(nb.index);
                    }
            std::swap(frontier, next);
        }
        std::sort(found.begin(), found.end());
        for (NodeId v : found) out.emplace_back(u, v);
    }
    return out;
}

// w_t = w0 + (1/Z) * sum_{i,j} w*(u,i) w*(v,j) score(i,j) with
// Z = sum_{i,j} w*(u,i) w*(v,j); unreachable super pairs score 0.
inline TransferResult transfer_weights(const Graph& target, const SuperGraph& sg, const CrossLinks& cross,
                                       const std::vector<std::pair<NodeId, NodeId>>& candidates) {
    PathScoreCache cache(sg);
    TransferResult res;
    res.entries.reserve(candidates.size());
    for (auto [u, v] : candidates) {
        double w0 = target.weight(u, v);
        double num = 0.0, z = 0.0;
        for (const auto& lu : cross.links_of(u))
            for (const auto& lv : cross.links_of(v)) {
                double prod = lu.weight * lv.weight;
                z += prod;
                if (auto s = cache.score(lu.super_id, lv.super_id)) num += prod * *s;
            }
        double wt = (z > 0.0) ? w0 + num / z : w0;
        res.entries.push_back({u, v, w0, wt, z});
    }
    return res;
}

// Reweights original edges to w_t and inserts every evolved pair.
inline Graph evolve_edges(const Graph& target, const TransferResult& result) {
    std::unordered_map<std::uint64_t, double> updated;
    updated.reserve(result.entries.size());
    auto key = [](NodeId a, NodeId b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    for (const auto& e : result.entries) updated[key(e.u, e.v)] = e.wt;

    std::vector<WeightedEdge> edges;
    for (const auto& e : target.edges()) {
        auto it = updated.find(key(e.u, e.v));
        double w = it != updated.end() ? std::max(e.weight, it->second) : e.weight;
        edges.push_back({e.u, e.v, w});
    }
    for (const auto& e : result.entries)
        if (e.evolved()) edges.push_back({e.u, e.v, e.wt});
    return Graph::from_edges(target.node_count(), std::move(edges), false, target.ids());
}

// "super_i<TAB>super_j<TAB>w_prime", i <= j
inline std::string write_super_graph(const SuperGraph& g) {
    std::string out;
    for (std::size_t a = 0; a < g.size(); ++a) {
        if (g.self_loop(a) > 0) {
            out += std::to_string(a) + '\t' + std::to_string(a) + '\t';
            append_double(out, g.self_loop(a));
            out += '\n';
        }
        for (const auto& [b, w] : g.neighbors(a)) {
            if (b < a) continue;
            out += std::to_string(a) + '\t' + std::to_string(b) + '\t';
            append_double(out, w);
            out += '\n';
        }
    }
    return out;
}

// "u<TAB>v<TAB>w0<TAB>w_t<TAB>evolved_flag"
inline std::string write_transfer(const TransferResult& r) {
    std::string out;
    for (const auto& e : r.entries) {
        out += std::to_string(e.u) + '\t' + std::to_string(e.v) + '\t';
        append_double(out, e.w0);
        out += '\t';
        append_double(out, e.wt);
        out += '\t';
        out += e.evolved() ? "1\n" : "0\n";
    }
    return out;
}

}  // namespace cdnr
