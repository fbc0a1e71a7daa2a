// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,5,9] [--known-failure 9 ...]
//
// Exit status is nonzero when a criterion fails, unless it was named with
// --known-failure; such a criterion still prints FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "cdnr/balance.hpp"
#include "cdnr/embed.hpp"
#include "cdnr/eval.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/pipeline.hpp"
#include "cdnr/synth.hpp"
#include "cdnr/transfer.hpp"
#include "cdnr/walker.hpp"

namespace fs = std::filesystem;
using namespace cdnr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;
int known_failures = 0;
std::set<int> only, known;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    if (!only.empty() && !only.count(id)) return;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = limit_s <= 0 || secs < limit_s;
    bool ok = o.pass && in_time;
    if (!ok) ++(known.count(id) ? known_failures : failures);
    const char* note = known.count(id) ? (ok ? " (listed as known failure but passed)" : " (known failure)") : "";
    std::printf("criterion %2d: %s  %-28s %s  [%.2fs%s]%s\n", id, ok ? "PASS" : "FAIL", name, o.detail.c_str(), secs,
                in_time ? "" : " over time limit", note);
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path scratch_dir() {
    static fs::path dir = fs::temp_directory_path() / ("cdnr_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

void write_planted(const synth::LabeledGraph& lg, const fs::path& edges, const fs::path& labels) {
    write_file_atomic(edges, write_edge_list(lg.graph));
    write_file_atomic(labels, write_labels(lg.labels, lg.graph.ids()));
}

// ---- 1 ---------------------------------------------------------------------

Outcome degree_bookkeeping(double& load_seconds) {
    const std::size_t n = 10312, m = 333983;
    auto text = write_edge_list(synth::random_gnm(n, m, 11));
    auto t0 = std::chrono::steady_clock::now();
    auto g = load_edge_list(text);
    auto stats = degree_stats(g);
    load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double expected = 2.0 * static_cast<double>(m) / static_cast<double>(n);
    bool ok = g.node_count() == n && g.edge_count() == m && std::abs(stats.average_degree - 64.776) <= 0.001 &&
              std::abs(stats.average_degree - expected) < 1e-9 && load_seconds < 5.0;
    return {ok, fmt("n=%zu m=%zu avg=%.4f load=%.2fs", g.node_count(), g.edge_count(), stats.average_degree,
                    load_seconds)};
}

// ---- 2 ---------------------------------------------------------------------

Outcome power_law_carryover() {
    int good = 0;
    std::string per;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto g = synth::scale_free(2000, 3, seed);
        WalkConfig wc;
        wc.seed = seed;
        auto ws = generate_walks(g, wc);
        auto deg = fit_power_law(degree_stats(g));
        auto vis = fit_visit_power_law(ws, g);
        bool ok = std::abs(vis.slope_a - deg.slope_a) <= 0.5 && vis.r_squared >= 0.7;
        good += ok;
        per += fmt(" %.2f/%.2f", deg.slope_a, vis.slope_a);
    }
    return {good >= 4, fmt("%d/5 seeds (deg/visit slopes:%s)", good, per.c_str())};
}

// ---- 3 ---------------------------------------------------------------------

std::vector<std::size_t> random_degrees(Rng& rng, std::size_t n, std::size_t max_deg) {
    std::vector<std::size_t> d(n);
    for (auto& x : d) {
        double u = uniform01(rng);
        if (u < 0.05) {
            x = 0;
            continue;
        }
        // heavy-tailed: inverse transform of a Pareto with exponent ~1.5
        double p = std::pow(1.0 - uniform01(rng), -1.0 / 1.5);
        x = std::min<std::size_t>(max_deg, static_cast<std::size_t>(p));
    }
    d[0] = std::max<std::size_t>(d[0], 1);
    return d;
}

Outcome balance_correctness() {
    Rng rng(2024);
    int bad = 0;
    std::size_t merges = 0, splits = 0;
    std::string first_issue;
    for (int inst = 0; inst < 200; ++inst) {
        std::size_t ns = 5 + rng() % 300, nt = 3 + rng() % 200;
        auto sd = random_degrees(rng, ns, 5 + rng() % 80);
        auto td = random_degrees(rng, nt, 5 + rng() % 80);
        auto source = degree_stats_from_sequence(sd);
        auto target = degree_stats_from_sequence(td);
        auto res = balance(source, target, BalanceParams{});
        merges += res.merges;
        splits += res.splits;
        std::string issue;
        if (res.iterations > res.max_iterations) issue = "iteration guard exceeded";
        for (NodeId t = 0; t < nt && issue.empty(); ++t) {
            auto links = res.cross.links_of(t);
            if (td[t] > 0 && links.empty()) issue = "target node without link";
            for (const auto& l : links) {
                double rep = res.supers[l.super_id].representative_degree;
                double lo = std::min<double>(static_cast<double>(td[t]), rep);
                double hi = std::max<double>(static_cast<double>(td[t]), rep);
                double expect = lo / hi;
                if (!(l.weight > 0.0) || l.weight > 1.0 || std::abs(l.weight - expect) > 1e-12)
                    issue = "link/weight mismatch";
            }
        }
        std::vector<NodeId> members;
        for (const auto& s : res.supers.supers()) members.insert(members.end(), s.members.begin(), s.members.end());
        std::sort(members.begin(), members.end());
        std::vector<NodeId> expected;
        for (NodeId v = 0; v < ns; ++v)
            if (sd[v] > 0) expected.push_back(v);
        if (members != expected) issue = "member conservation";
        if (!issue.empty()) {
            ++bad;
            if (first_issue.empty()) first_issue = fmt("instance %d: %s", inst, issue.c_str());
        }
    }
    return {bad == 0, bad == 0 ? fmt("200 instances, %zu merges, %zu null inserts", merges, splits)
                               : fmt("%d bad; %s", bad, first_issue.c_str())};
}

// ---- 4 ---------------------------------------------------------------------

Outcome hand_simulation() {
    auto res = balance(degree_stats_from_sequence({4, 3, 1}), degree_stats_from_sequence({3, 1}), BalanceParams{});
    auto links = res.cross.links();
    std::string got;
    for (const auto& l : links)
        got += fmt("(%.0f<->rep%g,w=%g)", static_cast<double>(l.target == 0 ? 3 : 1),
                   res.supers[l.super_id].representative_degree, l.weight);
    bool ok = links.size() == 2;
    for (const auto& l : links) {
        double rep = res.supers[l.super_id].representative_degree;
        if (l.target == 0) ok = ok && rep == 4.0 && l.weight == 0.75;
        if (l.target == 1) ok = ok && rep == 2.0 && l.weight == 0.5;
    }
    return {ok, got};
}

// ---- 5 and 6 ---------------------------------------------------------------

struct OracleInstance {
    SuperNodeSet supers;
    WalkSet walks;
    Graph target;
    CrossLinks cross;
};

OracleInstance random_instance(Rng& rng) {
    OracleInstance in;
    std::size_t S = 2 + rng() % 7;
    std::size_t N = S + rng() % 7;
    std::vector<SuperNode> sn(S);
    std::vector<std::size_t> degrees(N);
    for (NodeId v = 0; v < N; ++v) {
        degrees[v] = 1 + rng() % 10;
        sn[v < S ? v : rng() % S].members.push_back(v);
    }
    in.supers = SuperNodeSet(std::move(sn), degrees);

    std::size_t W = 1 + rng() % 6;
    for (std::size_t w = 0; w < W; ++w) {
        std::vector<NodeId> walk(2 + rng() % 9);
        for (auto& x : walk) x = static_cast<NodeId>(rng() % N);
        in.walks.walks.push_back(walk);
    }

    std::size_t nt = 2 + rng() % 11;
    std::vector<WeightedEdge> edges;
    for (NodeId u = 0; u < nt; ++u)
        for (NodeId v = u + 1; v < nt; ++v)
            if (uniform01(rng) < 0.3) edges.push_back({u, v, 1.0});
    if (edges.empty()) edges.push_back({0, 1, 1.0});
    in.target = Graph::from_edges(nt, edges, false);

    std::vector<CrossLink> links;
    for (NodeId t = 0; t < nt; ++t) {
        std::size_t k = 1 + rng() % 3;
        std::set<std::size_t> chosen;
        while (chosen.size() < std::min(k, S)) chosen.insert(rng() % S);
        for (auto s : chosen) links.push_back({t, s, 0.05 + 0.95 * uniform01(rng)});
    }
    in.cross = CrossLinks::from_links(nt, links);
    return in;
}

// Direct double sum over every walk position pair.
std::vector<std::vector<double>> oracle_super_weights(const OracleInstance& in) {
    const std::size_t S = in.supers.size();
    std::vector<std::size_t> owner(in.supers.source_degrees().size(), npos);
    for (std::size_t s = 0; s < S; ++s)
        for (NodeId v : in.supers[s].members) owner[v] = s;
    std::vector<std::vector<double>> w(S, std::vector<double>(S, 0.0));
    for (const auto& walk : in.walks.walks)
        for (std::size_t i = 0; i < walk.size(); ++i)
            for (std::size_t j = i + 1; j < walk.size(); ++j) {
                if (walk[i] == walk[j]) continue;
                auto a = owner[walk[i]], b = owner[walk[j]];
                double inc = 1.0 / static_cast<double>(j - i);
                w[a][b] += inc;
                if (a != b) w[b][a] += inc;
            }
    return w;
}

// Exhaustive simple-path enumeration; among the fewest-hop paths from the
// smaller endpoint, the lexicographically smallest one is scored.
std::optional<double> oracle_path_score(const std::vector<std::vector<double>>& w, std::size_t a, std::size_t b) {
    if (a == b) return w[a][a];
    std::size_t lo = std::min(a, b), hi = std::max(a, b);
    std::optional<std::vector<std::size_t>> best;
    std::vector<std::size_t> path{lo};
    std::vector<bool> on(w.size(), false);
    on[lo] = true;
    std::function<void(std::size_t)> dfs = [&](std::size_t u) {
        if (u == hi) {
            if (!best || path.size() < best->size() || (path.size() == best->size() && path < *best)) best = path;
            return;
        }
        for (std::size_t v = 0; v < w.size(); ++v) {
            if (v == u || on[v] || !(w[u][v] > 0.0)) continue;
            on[v] = true;
            path.push_back(v);
            dfs(v);
            path.pop_back();
            on[v] = false;
        }
    };
    dfs(lo);
    if (!best) return std::nullopt;
    double sum = 0;
    for (std::size_t i = 0; i + 1 < best->size(); ++i) sum += w[(*best)[i]][(*best)[i + 1]];
    return sum / static_cast<double>(best->size() - 1);
}

std::vector<std::pair<NodeId, NodeId>> oracle_candidates(const Graph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::pair<NodeId, NodeId>> out;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) {
            bool near = g.has_edge(u, v);
            for (NodeId x = 0; x < n && !near; ++x) near = g.has_edge(u, x) && g.has_edge(x, v);
            if (near) out.emplace_back(u, v);
        }
    return out;
}

Outcome transfer_oracle() {
    Rng rng(77);
    double worst = 0.0;
    std::size_t compared = 0;
    std::string issue;
    for (int inst = 0; inst < 50; ++inst) {
        auto in = random_instance(rng);
        auto sg = build_super_graph(in.walks, in.supers);
        auto ow = oracle_super_weights(in);
        for (std::size_t a = 0; a < ow.size(); ++a)
            for (std::size_t b = a; b < ow.size(); ++b) {
                double got = a == b ? sg.self_loop(a) : sg.weight(a, b);
                worst = std::max(worst, std::abs(got - ow[a][b]));
            }
        auto cand = candidate_pairs(in.target, 2);
        if (cand != oracle_candidates(in.target) && issue.empty()) issue = fmt("candidate set differs (instance %d)", inst);
        auto tr = transfer_weights(in.target, sg, in.cross, cand);
        for (const auto& e : tr.entries) {
            double num = 0, z = 0;
            for (const auto& lu : in.cross.links_of(e.u))
                for (const auto& lv : in.cross.links_of(e.v)) {
                    double prod = lu.weight * lv.weight;
                    z += prod;
                    if (auto s = oracle_path_score(ow, lu.super_id, lv.super_id)) num += prod * *s;
                }
            double w0 = in.target.has_edge(e.u, e.v) ? 1.0 : 0.0;
            double expect = z > 0 ? w0 + num / z : w0;
            worst = std::max(worst, std::abs(e.wt - expect));
            ++compared;
        }
    }
    return {issue.empty() && worst < 1e-9, issue.empty() ? fmt("%zu pairs, max |diff| %.2e", compared, worst) : issue};
}

std::string check_monotone(const Graph& target, const TransferResult& tr) {
    for (const auto& e : tr.entries)
        if (e.wt < e.w0) return fmt("w_t < w_t(0) on (%u,%u)", e.u, e.v);
    auto evolved = evolve_edges(target, tr);
    std::set<std::pair<NodeId, NodeId>> flagged;
    for (const auto& e : tr.entries)
        if (e.w0 == 0.0 && e.wt > 0.0) flagged.insert({e.u, e.v});
    std::size_t added = 0;
    for (const auto& e : evolved.edges()) {
        if (target.has_edge(e.u, e.v)) continue;
        ++added;
        if (!flagged.count({std::min(e.u, e.v), std::max(e.u, e.v)})) return fmt("unexpected new edge (%u,%u)", e.u, e.v);
    }
    if (added != flagged.size()) return "evolved pair missing from graph";
    for (const auto& e : target.edges())
        if (evolved.weight(e.u, e.v) < e.weight) return "original edge weight decreased";
    return {};
}

Outcome monotonicity() {
    Rng rng(91);
    std::size_t runs = 0, pairs = 0, evolved = 0;
    for (int inst = 0; inst < 200; ++inst, ++runs) {
        auto in = random_instance(rng);
        auto tr = transfer_weights(in.target, build_super_graph(in.walks, in.supers), in.cross,
                                   candidate_pairs(in.target, 2));
        pairs += tr.entries.size();
        evolved += tr.evolved_count();
        if (auto issue = check_monotone(in.target, tr); !issue.empty()) return {false, fmt("instance %d: %s", inst, issue.c_str())};
    }
    for (std::uint64_t seed = 1; seed <= 3; ++seed, ++runs) {
        auto source = synth::planted_partition(210, 3, 0.1, 0.01, seed).graph;
        auto target = synth::degrade(synth::planted_partition(120, 3, 0.08, 0.01, seed + 50).graph, 0.3, seed);
        WalkConfig wc;
        wc.seed = seed;
        wc.walks_per_node = 3;
        wc.walk_length = 20;
        auto bal = balance(source, target, BalanceParams{});
        auto tr = transfer_weights(target, build_super_graph(generate_walks(source, wc), bal.supers), bal.cross,
                                   candidate_pairs(target, 2));
        pairs += tr.entries.size();
        evolved += tr.evolved_count();
        if (auto issue = check_monotone(target, tr); !issue.empty()) return {false, fmt("graph seed %llu: %s", (unsigned long long)seed, issue.c_str())};
    }
    return {true, fmt("%zu runs, %zu pairs, %zu evolved", runs, pairs, evolved)};
}

// ---- 7 ---------------------------------------------------------------------

Outcome gradient_check() {
    Rng rng(5);
    const std::size_t d = 8, rows = 12;
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        Embedding emb;
        emb.rows = rows;
        emb.dim = d;
        emb.input.resize(rows * d);
        emb.context.resize(rows * d);
        for (auto& x : emb.input) x = uniform01(rng) - 0.5;
        for (auto& x : emb.context) x = uniform01(rng) - 0.5;
        SkipGramSample s{static_cast<NodeId>(rng() % rows), static_cast<NodeId>(rng() % rows), {}};
        for (int k = 0; k < 5; ++k) s.negatives.push_back(static_cast<NodeId>(rng() % rows));
        auto lg = loss_and_gradient(s, emb);

        const double h = 1e-5;
        std::vector<double> analytic, numeric;
        auto probe = [&](double& x, double g) {
            double keep = x;
            x = keep + h;
            double up = loss_and_gradient(s, emb).loss;
            x = keep - h;
            double down = loss_and_gradient(s, emb).loss;
            x = keep;
            analytic.push_back(g);
            numeric.push_back((up - down) / (2 * h));
        };
        for (std::size_t k = 0; k < d; ++k) probe(emb.input[s.center * d + k], lg.center_grad[k]);
        for (const auto& [row, g] : lg.context_grads)
            for (std::size_t k = 0; k < d; ++k) probe(emb.context[row * d + k], g[k]);
        double diff = 0, na = 0, nn = 0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            na += analytic[i] * analytic[i];
            nn += numeric[i] * numeric[i];
        }
        double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
        worst = std::max(worst, rel);
    }
    return {worst < 1e-4, fmt("100 instances, max relative error %.2e", worst)};
}

// ---- 8 and 9 ---------------------------------------------------------------

PipelineConfig base_config(const fs::path& target, const fs::path& labels, const fs::path& out, std::uint64_t seed) {
    PipelineConfig c;
    c.target_graph = target;
    c.labels = labels;
    c.output_dir = out;
    c.seed = seed;
    c.embed.dimension = 32;
    c.fractions = {0.5};
    c.repetitions = 10;
    return c;
}

double mean_micro(const RunManifest& m) {
    auto xs = m.report->micro_scores(0.5);
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Outcome quality_floor() {
    double total = 0;
    std::string per;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto dir = scratch_dir() / fmt("floor_%llu", (unsigned long long)seed);
        fs::create_directories(dir);
        write_planted(synth::planted_partition(300, 3, 0.1, 0.01, seed), dir / "g.edges", dir / "g.labels");
        auto cfg = base_config(dir / "g.edges", dir / "g.labels", dir / "out", seed);
        cfg.transfer_enabled = false;
        double f = mean_micro(run_pipeline(cfg));
        total += f;
        per += fmt(" %.3f", f);
    }
    double avg = total / 5;
    return {avg >= 0.85, fmt("mean Micro-F1 %.4f (per seed:%s)", avg, per.c_str())};
}

Outcome transfer_benefit() {
    double sum_cdnr = 0, sum_base = 0;
    int wins = 0;
    std::string per;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto dir = scratch_dir() / fmt("benefit_%llu", (unsigned long long)seed);
        fs::create_directories(dir);
        write_planted(synth::planted_partition(600, 3, 0.1, 0.01, 1000 + seed), dir / "src.edges", dir / "src.labels");
        auto full = synth::planted_partition(300, 3, 0.08, 0.01, 2000 + seed);
        synth::LabeledGraph degraded{synth::degrade(full.graph, 0.3, 3000 + seed), full.labels};
        write_planted(degraded, dir / "tgt.edges", dir / "tgt.labels");

        auto cfg = base_config(dir / "tgt.edges", dir / "tgt.labels", dir / "cdnr", seed);
        cfg.source_graph = dir / "src.edges";
        double f_cdnr = mean_micro(run_pipeline(cfg));
        cfg.transfer_enabled = false;
        cfg.output_dir = dir / "base";
        double f_base = mean_micro(run_pipeline(cfg));
        sum_cdnr += f_cdnr;
        sum_base += f_base;
        wins += f_cdnr > f_base;
        per += fmt(" %.3f/%.3f", f_cdnr, f_base);
    }
    double mc = sum_cdnr / 10, mb = sum_base / 10;
    bool ok = mc >= mb - 0.02 && wins >= 6;
    return {ok, fmt("mean CDNR %.4f vs baseline %.4f, wins %d/10 (cdnr/base:%s)", mc, mb, wins, per.c_str())};
}

// ---- 10 --------------------------------------------------------------------

Outcome f1_exactness() {
    Rng rng(10);
    int mismatches = 0;
    for (int inst = 0; inst < 20; ++inst) {
        std::size_t n = 5 + rng() % 16, m = 2 + rng() % 4;
        std::vector<std::vector<LabelId>> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (LabelId l = 0; l < m; ++l) {
                if (uniform01(rng) < 0.4) truth[i].push_back(l);
                if (uniform01(rng) < 0.4) pred[i].push_back(l);
            }
            if (truth[i].empty()) truth[i].push_back(static_cast<LabelId>(rng() % m));
        }
        // binary decision matrix, counted cell by cell
        std::vector<long> tp(m, 0), fp(m, 0), fn(m, 0);
        for (std::size_t i = 0; i < n; ++i)
            for (LabelId l = 0; l < m; ++l) {
                bool t = std::count(truth[i].begin(), truth[i].end(), l) > 0;
                bool p = std::count(pred[i].begin(), pred[i].end(), l) > 0;
                tp[l] += t && p;
                fp[l] += !t && p;
                fn[l] += t && !p;
            }
        auto div = [](double a, double b) { return b > 0 ? a / b : 0.0; };
        auto f1h = [](double r, double p) { return r + p > 0 ? 2 * r * p / (r + p) : 0.0; };
        double TP = 0, FP = 0, FN = 0, rs = 0, ps = 0;
        for (std::size_t l = 0; l < m; ++l) {
            TP += static_cast<double>(tp[l]);
            FP += static_cast<double>(fp[l]);
            FN += static_cast<double>(fn[l]);
            rs += div(static_cast<double>(tp[l]), static_cast<double>(tp[l] + fn[l]));
            ps += div(static_cast<double>(tp[l]), static_cast<double>(tp[l] + fp[l]));
        }
        double micro = f1h(div(TP, TP + FN), div(TP, TP + FP));
        double macro = f1h(rs / static_cast<double>(m), ps / static_cast<double>(m));
        auto got = micro_macro_f1(pred, truth, m);
        mismatches += got.micro != micro || got.macro != macro;
    }
    // differences with sample sd 1 shifted so that t = 2.262 at df = 9
    std::vector<double> z{-1.5, -1.0, -0.6, -0.3, 0.0, 0.1, 0.4, 0.7, 1.0, 1.2};
    double mean = std::accumulate(z.begin(), z.end(), 0.0) / 10;
    double ss = 0;
    for (double x : z) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / 9);
    std::vector<double> a(10), b(10, 0.0);
    for (int i = 0; i < 10; ++i) a[i] = (z[i] - mean) / sd + 2.262 / std::sqrt(10.0);
    double p = paired_t_test(a, b);
    bool ok = mismatches == 0 && std::abs(p - 0.05) < 1e-3;
    return {ok, fmt("%d/20 F1 mismatches, p(t=2.262, df=9) = %.5f", mismatches, p)};
}

// ---- 11 --------------------------------------------------------------------

Outcome determinism() {
    auto dir = scratch_dir() / "determinism";
    fs::create_directories(dir);
    write_planted(synth::planted_partition(210, 3, 0.1, 0.01, 5), dir / "src.edges", dir / "src.labels");
    auto full = synth::planted_partition(120, 3, 0.08, 0.01, 6);
    write_planted({synth::degrade(full.graph, 0.5, 7), full.labels}, dir / "tgt.edges", dir / "tgt.labels");
    std::string files[2];
    for (int r = 0; r < 2; ++r) {
        auto cfg = base_config(dir / "tgt.edges", dir / "tgt.labels", dir / fmt("run%d", r), 42);
        cfg.source_graph = dir / "src.edges";
        cfg.eval_enabled = false;
        cfg.embed.epochs = 2;
        run_pipeline(cfg);
        files[r] = read_file(cfg.output_dir / "embedding.txt");
    }
    bool ok = !files[0].empty() && files[0] == files[1];
    return {ok, fmt("embedding files %zu bytes, %s", files[0].size(), ok ? "byte-identical" : "DIFFER")};
}

std::set<int> parse_ids(const char* text) {
    std::set<int> out;
    for (auto tok : split_tokens(text, true))
        if (auto v = parse_int<int>(tok)) out.insert(*v);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        auto ids = parse_ids(argv[i + 1]);
        if (flag == "--only")
            only.insert(ids.begin(), ids.end());
        else if (flag == "--known-failure")
            known.insert(ids.begin(), ids.end());
        else {
            std::fprintf(stderr, "usage: acceptance [--only ids] [--known-failure ids]\n");
            return 2;
        }
    }
    double load_s = 0;
    report(1, "degree bookkeeping", 0, [&] { return degree_bookkeeping(load_s); });
    report(2, "power-law carryover", 30, power_law_carryover);
    report(3, "balance correctness", 10, balance_correctness);
    report(4, "hand-simulation oracle", 0, hand_simulation);
    report(5, "transfer oracle equivalence", 10, transfer_oracle);
    report(6, "monotonicity sweep", 0, monotonicity);
    report(7, "gradient check", 5, gradient_check);
    report(8, "embedding quality floor", 60, quality_floor);
    report(9, "desk-scale transfer benefit", 300, transfer_benefit);
    report(10, "F1 / t-test exactness", 0, f1_exactness);
    report(11, "determinism", 0, determinism);
    if (only.empty() || only.count(12))
        std::printf("criterion 12: SKIP  full-corpus reproduction     needs the public dblp/M10 datasets\n");
    std::error_code ec;
    fs::remove_all(scratch_dir(), ec);
    std::printf("%d unexpected failure(s), %d known failure(s)\n", failures, known_failures);
    return failures == 0 ? 0 : 1;
}
