#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdnr/error.hpp"
#include "cdnr/text.hpp"

namespace cdnr {

using NodeId = std::uint32_t;

struct Neighbor {
    NodeId index;
    double weight;
};

struct WeightedEdge {
    NodeId u;
    NodeId v;
    double weight = 1.0;
};

// Bidirectional external-id <-> dense-index map.
class IdMap {
public:
    IdMap() = default;

    static IdMap identity(std::size_t n) {
        IdMap m;
        m.names_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) m.add(std::to_string(i));
        return m;
    }

    // Returns the existing index when `name` is already present.
    NodeId add(std::string_view name) {
        auto it = index_.find(std::string(name));
        if (it != index_.end()) return it->second;
        auto id = static_cast<NodeId>(names_.size());
        names_.emplace_back(name);
        index_.emplace(names_.back(), id);
        return id;
    }

    std::optional<NodeId> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& name(NodeId i) const { return names_.at(i); }
    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> index_;
};

// Immutable CSR adjacency. Undirected graphs store every edge in both
// endpoint lists with equal weight; neighbor lists are sorted by index.
class Graph {
public:
    Graph() = default;

    // Duplicate edges are summed. Self-loops and non-positive weights are
    // rejected.
    static Graph from_edges(std::size_t node_count, std::vector<WeightedEdge> edges, bool directed,
                            IdMap ids = {}) {
        if (ids.size() == 0) ids = IdMap::identity(node_count);
        if (ids.size() != node_count) throw ValueError("id map size does not match node count");
        for (auto& e : edges) {
            if (e.u >= node_count || e.v >= node_count) throw ValueError("edge endpoint out of range");
            if (e.u == e.v) throw ValueError("self-loop on node " + ids.name(e.u));
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw ValueError("edge weight must be positive and finite");
            if (!directed && e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
            return a.u != b.u ? a.u < b.u : a.v < b.v;
        });
        std::vector<WeightedEdge> merged;
        merged.reserve(edges.size());
        for (const auto& e : edges) {
            if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
                merged.back().weight += e.weight;
            else
                merged.push_back(e);
        }

        Graph g;
        g.directed_ = directed;
        g.ids_ = std::move(ids);
        g.edge_count_ = merged.size();
        g.offsets_.assign(node_count + 1, 0);
        for (const auto& e : merged) {
            ++g.offsets_[e.u + 1];
            if (!directed) ++g.offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.adj_.resize(g.offsets_.back());
        std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& e : merged) {
            g.adj_[fill[e.u]++] = {e.v, e.weight};
            if (!directed) g.adj_[fill[e.v]++] = {e.u, e.weight};
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            std::sort(g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                      g.adj_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]),
                      [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
        }
        if (directed) {
            g.in_degree_.assign(node_count, 0);
            for (const auto& e : merged) ++g.in_degree_[e.v];
        }
        return g;
    }

    std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    // Undirected edges are counted once; directed graphs count arcs.
    std::size_t edge_count() const noexcept { return edge_count_; }
    bool directed() const noexcept { return directed_; }
    const IdMap& ids() const noexcept { return ids_; }

    std::span<const Neighbor> neighbors(NodeId v) const {
        return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    std::size_t out_degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    // Incident edge count: out + in for directed graphs.
    std::size_t degree(NodeId v) const {
        return directed_ ? out_degree(v) + in_degree_[v] : out_degree(v);
    }

    // Weight of the arc u -> v, 0 when absent.
    double weight(NodeId u, NodeId v) const {
        auto nb = neighbors(u);
        auto it = std::lower_bound(nb.begin(), nb.end(), v,
                                   [](const Neighbor& n, NodeId x) { return n.index < x; });
        return (it != nb.end() && it->index == v) ? it->weight : 0.0;
    }

    bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0.0; }

    // Canonical edge list: u < v for undirected graphs, every arc otherwise.
    std::vector<WeightedEdge> edges() const {
        std::vector<WeightedEdge> out;
        out.reserve(edge_count_);
        for (NodeId u = 0; u < node_count(); ++u)
            for (const auto& n : neighbors(u))
                if (directed_ || u < n.index) out.push_back({u, n.index, n.weight});
        return out;
    }

    // Undirected view; opposite arcs collapse by summing their weights.
    Graph symmetrized() const {
        if (!directed_) return *this;
        return from_edges(node_count(), edges(), false, ids_);
    }

    // Copy with isolated nodes appended for every id not already present.
    Graph with_extra_nodes(std::span<const std::string> names) const {
        IdMap ids = ids_;
        for (const auto& name : names) ids.add(name);
        const std::size_t n = ids.size();
        if (n == node_count()) return *this;
        return from_edges(n, edges(), directed_, std::move(ids));
    }

private:
    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> adj_;
    std::vector<std::size_t> in_degree_;
    std::size_t edge_count_ = 0;
    bool directed_ = false;
    IdMap ids_;
};

// Parses "u v" / "u v w" lines. '#' starts a comment line. Dense indices are
// assigned in order of first appearance.
inline Graph load_edge_list(std::string_view text, bool directed = false, double default_weight = 1.0) {
    IdMap ids;
    std::vector<WeightedEdge> edges;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty() || body.front() == '#') return;
        auto tok = split_tokens(body);
        if (tok.size() != 2 && tok.size() != 3)
            throw ParseError(line_no, "expected 2 or 3 fields, got " + std::to_string(tok.size()));
        double w = default_weight;
        if (tok.size() == 3) {
            auto parsed = parse_double(tok[2]);
            if (!parsed) throw ParseError(line_no, "non-numeric weight '" + std::string(tok[2]) + "'");
            w = *parsed;
        }
        if (!(w > 0.0) || !std::isfinite(w))
            throw ValueError("line " + std::to_string(line_no) + ": weight must be positive");
        if (tok[0] == tok[1])
            throw ValueError("line " + std::to_string(line_no) + ": self-loop on '" + std::string(tok[0]) + "'");
        NodeId u = ids.add(tok[0]);
        NodeId v = ids.add(tok[1]);
        edges.push_back({u, v, w});
    });
    std::size_t n = ids.size();
    return Graph::from_edges(n, std::move(edges), directed, std::move(ids));
}

inline std::string write_edge_list(const Graph& g) {
    std::string out;
    for (const auto& e : g.edges()) {
        out += g.ids().name(e.u);
        out += ' ';
        out += g.ids().name(e.v);
        out += ' ';
        append_double(out, e.weight);
        out += '\n';
    }
    return out;
}

inline std::string write_id_map(const IdMap& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += ids.name(static_cast<NodeId>(i));
        out += '\t';
        out += std::to_string(i);
        out += '\n';
    }
    return out;
}

struct DegreeStats {
    std::vector<std::size_t> degree_sequence;
    std::vector<std::size_t> distinct_degrees;  // strictly decreasing
    double average_degree = 0.0;
    std::map<std::size_t, std::size_t> histogram;

    std::size_t n_deg() const noexcept { return distinct_degrees.size(); }
    std::size_t node_count() const noexcept { return degree_sequence.size(); }
};

inline DegreeStats degree_stats_from_sequence(std::vector<std::size_t> degrees) {
    DegreeStats s;
    s.degree_sequence = std::move(degrees);
    std::size_t total = 0;
    for (auto d : s.degree_sequence) {
        ++s.histogram[d];
        total += d;
    }
    for (auto it = s.histogram.rbegin(); it != s.histogram.rend(); ++it) s.distinct_degrees.push_back(it->first);
    if (!s.degree_sequence.empty())
        s.average_degree = static_cast<double>(total) / static_cast<double>(s.degree_sequence.size());
    return s;
}

inline DegreeStats degree_stats(const Graph& g) {
    std::vector<std::size_t> deg(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) deg[v] = g.degree(v);
    return degree_stats_from_sequence(std::move(deg));
}

// "degree,count" rows in increasing degree order.
inline std::string degree_csv(const DegreeStats& s) {
    std::string out = "degree,count\n";
    for (const auto& [d, c] : s.histogram) out += std::to_string(d) + "," + std::to_string(c) + "\n";
    return out;
}

// Log-log distribution rows "x,log_x,p,log_p" for values x > 0.
inline std::string loglog_csv(const std::map<std::size_t, std::size_t>& histogram, std::size_t total) {
    std::string out = "x,log_x,p,log_p\n";
    for (const auto& [x, c] : histogram) {
        if (x == 0 || c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        out += std::to_string(x) + ",";
        append_double(out, std::log(static_cast<double>(x)));
        out += ",";
        append_double(out, p);
        out += ",";
        append_double(out, std::log(p));
        out += "\n";
    }
    return out;
}

struct PowerLawFit {
    double slope_a = 0.0;  // P(x) ~ x^(-slope_a)
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points_used = 0;
};

// Least-squares line through (log x, log P(x)) for every x >= min_x with a
// nonzero count, P(x) = count / total. No binning.
inline PowerLawFit fit_power_law(const std::map<std::size_t, std::size_t>& histogram, std::size_t total,
                                 std::size_t min_x = 1) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, c] : histogram) {
        if (x == 0 || x < min_x || c == 0) continue;
        pts.emplace_back(std::log(static_cast<double>(x)),
                         std::log(static_cast<double>(c) / static_cast<double>(total)));
    }
    if (pts.size() < 2) throw FitError("power-law fit needs at least 2 distinct nonzero values");

    const double n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    PowerLawFit fit;
    double slope = sxy / sxx;
    fit.slope_a = -slope;
    fit.intercept = my - slope * mx;
    fit.points_used = pts.size();
    double ss_res = 0;
    for (auto [x, y] : pts) {
        double r = y - (fit.intercept + slope * x);
        ss_res += r * r;
    }
    // A flat distribution is fitted exactly by a horizontal line.
    fit.r_squared = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

inline PowerLawFit fit_power_law(const DegreeStats& stats, std::size_t min_degree = 1) {
    return fit_power_law(stats.histogram, stats.node_count(), min_degree);
}

}  // namespace cdnr
