#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cdnr/error.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/rng.hpp"
#include "cdnr/text.hpp"

namespace cdnr {

struct WalkConfig {
    std::size_t walks_per_node = 10;  // k
    std::size_t walk_length = 80;     // l, nodes per walk including the root
    double p = 1.0;                   // return parameter
    double q = 1.0;                   // in-out parameter
    bool use_edge_weights = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (walks_per_node < 1) throw ValueError("walks_per_node must be >= 1");
        if (walk_length < 1) throw ValueError("walk_length must be >= 1");
        if (!(p > 0.0) || !(q > 0.0)) throw ValueError("p and q must be positive");
    }
};

enum class GraphTag { source, target };

struct WalkSet {
    std::vector<std::vector<NodeId>> walks;
    WalkConfig config;
    GraphTag graph_tag = GraphTag::source;

    std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto& w : walks) n += w.size();
        return n;
    }
};

struct TransitionDistribution {
    std::vector<NodeId> candidates;
    std::vector<double> probabilities;

    bool empty() const noexcept { return candidates.empty(); }
};

namespace detail {

// Unnormalized second-order scores for every out-neighbor of `curr`. Returns
// the total. The previous node's distance to a candidate is 0 (candidate is
// prev), 1 (adjacent to prev) or 2 (otherwise).
inline double transition_scores(const Graph& g, std::optional<NodeId> prev, NodeId curr, const WalkConfig& cfg,
                                std::vector<double>& scores) {
    auto nb = g.neighbors(curr);
    scores.resize(nb.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        double alpha = 1.0;
        if (prev) {
            NodeId x = nb[i].index;
            if (x == *prev)
                alpha = 1.0 / cfg.p;
            else if (!g.has_edge(*prev, x))
                alpha = 1.0 / cfg.q;
        }
        double s = cfg.use_edge_weights ? alpha * nb[i].weight : alpha;
        scores[i] = s;
        total += s;
    }
    return total;
}

inline std::size_t sample_index(const std::vector<double>& scores, double total, Rng& rng) {
    double r = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        acc += scores[i];
        if (r < acc) return i;
    }
    return scores.size() - 1;
}

inline void walk_from(const Graph& g, NodeId root, const WalkConfig& cfg, Rng& rng, std::vector<double>& scores,
                      std::vector<NodeId>& out) {
    out.clear();
    out.push_back(root);
    std::optional<NodeId> prev;
    NodeId curr = root;
    while (out.size() < cfg.walk_length) {
        if (g.out_degree(curr) == 0) break;
        double total = transition_scores(g, prev, curr, cfg, scores);
        NodeId next = g.neighbors(curr)[sample_index(scores, total, rng)].index;
        out.push_back(next);
        prev = curr;
        curr = next;
    }
}

}  // namespace detail

// P(x | prev, curr) over the neighbors of `curr`. Empty when `curr` has no
// neighbors.
inline TransitionDistribution transition(const Graph& g, std::optional<NodeId> prev, NodeId curr,
                                         const WalkConfig& cfg) {
    TransitionDistribution dist;
    if (g.out_degree(curr) == 0) return dist;
    std::vector<double> scores;
    double total = detail::transition_scores(g, prev, curr, cfg, scores);
    auto nb = g.neighbors(curr);
    for (std::size_t i = 0; i < nb.size(); ++i) {
        dist.candidates.push_back(nb[i].index);
        dist.probabilities.push_back(scores[i] / total);
    }
    return dist;
}

// k walks per node with neighbors, one singleton walk per isolated node.
// Walks are stored in (root, repeat) order and walk (r, i) draws from its
// own stream derive_seed(seed, r, i), so the result does not depend on the
// number of workers.
inline WalkSet generate_walks(const Graph& g, const WalkConfig& cfg, GraphTag tag = GraphTag::source,
                              unsigned workers = 1) {
    cfg.validate();
    const std::size_t n = g.node_count();
    std::vector<std::size_t> offset(n + 1, 0);
    for (NodeId v = 0; v < n; ++v) offset[v + 1] = offset[v] + (g.out_degree(v) > 0 ? cfg.walks_per_node : 1);

    WalkSet ws;
    ws.config = cfg;
    ws.graph_tag = tag;
    ws.walks.resize(offset[n]);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::vector<double> scores;
        for (std::size_t v = begin; v < end; ++v) {
            auto root = static_cast<NodeId>(v);
            for (std::size_t i = 0; i < offset[v + 1] - offset[v]; ++i) {
                Rng rng(derive_seed(cfg.seed, root, i));
                detail::walk_from(g, root, cfg, rng, scores, ws.walks[offset[v] + i]);
            }
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1 || n < 2 * workers) {
        run_range(0, n);
    } else {
        std::vector<std::jthread> pool;
        std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::size_t b = w * chunk, e = std::min(n, b + chunk);
            if (b < e) pool.emplace_back(run_range, b, e);
        }
    }
    return ws;
}

inline std::vector<std::size_t> visit_counts(const WalkSet& ws, std::size_t node_count) {
    std::vector<std::size_t> counts(node_count, 0);
    for (const auto& w : ws.walks)
        for (NodeId v : w) ++counts[v];
    return counts;
}

// Visit counts rescaled into degree units (total visits mapped onto the
// graph's total degree) and rounded, as a value -> node-count histogram. For
// p = q = 1 on an undirected graph the expected rescaled count of a node is
// its degree.
inline std::map<std::size_t, std::size_t> visit_frequency_histogram(const WalkSet& ws, const Graph& g) {
    auto counts = visit_counts(ws, g.node_count());
    double total_visits = 0, total_degree = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        total_visits += static_cast<double>(counts[v]);
        total_degree += static_cast<double>(g.degree(v));
    }
    std::map<std::size_t, std::size_t> hist;
    if (total_visits == 0) return hist;
    double scale = total_degree / total_visits;
    for (auto c : counts) ++hist[static_cast<std::size_t>(std::llround(static_cast<double>(c) * scale))];
    return hist;
}

// Power-law fit of the visit-frequency histogram over the graph's degree
// support (x >= smallest positive degree), so it is comparable with the
// degree fit. Rescaled counts of minimum-degree nodes that fall below the
// floor would otherwise bend the head of the curve.
inline PowerLawFit fit_visit_power_law(const WalkSet& ws, const Graph& g) {
    std::size_t min_deg = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        auto d = g.degree(v);
        if (d > 0 && (min_deg == 0 || d < min_deg)) min_deg = d;
    }
    return fit_power_law(visit_frequency_histogram(ws, g), g.node_count(), std::max<std::size_t>(1, min_deg));
}

inline std::string write_walks(const WalkSet& ws) {
    std::string out = "#walks k=" + std::to_string(ws.config.walks_per_node) +
                      " l=" + std::to_string(ws.config.walk_length) + " p=" + format_double(ws.config.p) +
                      " q=" + format_double(ws.config.q) + "\n";
    for (const auto& w : ws.walks) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(w[i]);
        }
        out += '\n';
    }
    return out;
}

inline WalkSet read_walks(std::string_view text) {
    WalkSet ws;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty()) return;
        if (body.front() == '#') {
            if (body.starts_with("#walks")) {
                for (auto tok : split_tokens(body.substr(6))) {
                    auto eq = tok.find('=');
                    if (eq == std::string_view::npos) continue;
                    auto key = tok.substr(0, eq);
                    auto val = tok.substr(eq + 1);
                    if (key == "k") ws.config.walks_per_node = parse_int<std::size_t>(val).value_or(0);
                    else if (key == "l") ws.config.walk_length = parse_int<std::size_t>(val).value_or(0);
                    else if (key == "p") ws.config.p = parse_double(val).value_or(0.0);
                    else if (key == "q") ws.config.q = parse_double(val).value_or(0.0);
                }
            }
            return;
        }
        std::vector<NodeId> walk;
        for (auto tok : split_tokens(body)) {
            auto v = parse_int<NodeId>(tok);
            if (!v) throw ParseError(line_no, "bad node index '" + std::string(tok) + "'");
            walk.push_back(*v);
        }
        ws.walks.push_back(std::move(walk));
    });
    return ws;
}

}  // namespace cdnr
