// cdnr command-line front end: stage-wise subcommands plus the full pipeline.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

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

Graph load_graph(const fs::path& p, bool directed) { return load_edge_list(read_file(p), directed); }

void print_fit(const char* what, const std::map<std::size_t, std::size_t>& hist, std::size_t total) {
    try {
        auto f = fit_power_law(hist, total);
        std::printf("%s_slope %.6f\n%s_r_squared %.6f\n%s_points %zu\n", what, f.slope_a, what, f.r_squared, what,
                    f.points_used);
    } catch (const FitError& e) {
        std::printf("%s_slope nan\n", what);
        std::fprintf(stderr, "warning: %s\n", e.what());
    }
}

struct StatsOpts {
    std::string graph, out, loglog, walks, visit_out;
    bool directed = false;
};

int cmd_stats(const StatsOpts& o) {
    Graph g = load_graph(o.graph, o.directed);
    auto s = degree_stats(g);
    std::printf("nodes %zu\nedges %zu\naverage_degree %.6f\ndistinct_degrees %zu\n", g.node_count(), g.edge_count(),
                s.average_degree, s.n_deg());
    print_fit("degree", s.histogram, s.node_count());
    if (!o.out.empty()) write_file_atomic(o.out, degree_csv(s));
    if (!o.loglog.empty()) write_file_atomic(o.loglog, loglog_csv(s.histogram, s.node_count()));
    if (!o.walks.empty()) {
        auto ws = read_walks(read_file(o.walks));
        auto hist = visit_frequency_histogram(ws, g);
        try {
            auto f = fit_visit_power_law(ws, g);
            std::printf("visit_slope %.6f\nvisit_r_squared %.6f\nvisit_points %zu\n", f.slope_a, f.r_squared, f.points_used);
        } catch (const FitError& e) {
            std::fprintf(stderr, "warning: %s\n", e.what());
        }
        if (!o.visit_out.empty()) write_file_atomic(o.visit_out, loglog_csv(hist, g.node_count()));
    }
    return 0;
}

struct WalkOpts {
    std::string graph, out;
    bool directed = false;
    WalkConfig cfg;
    unsigned workers = 1;
};

int cmd_walk(const WalkOpts& o) {
    Graph g = load_graph(o.graph, o.directed);
    auto ws = generate_walks(g, o.cfg, GraphTag::source, o.workers);
    write_file_atomic(o.out, write_walks(ws));
    std::printf("walks %zu\ntokens %zu\n", ws.walks.size(), ws.token_count());
    return 0;
}

struct BalanceOpts {
    std::string source, target, out_dir;
    bool directed = false;
    BalanceParams params;
};

int cmd_balance(const BalanceOpts& o) {
    auto res = balance(load_graph(o.source, o.directed), load_graph(o.target, o.directed), o.params);
    fs::path dir(o.out_dir);
    write_file_atomic(dir / "supernodes.tsv", write_super_nodes(res.supers));
    write_file_atomic(dir / "crosslinks.tsv", write_cross_links(res.cross));
    const char* status = res.status == BalanceStatus::converged      ? "converged"
                         : res.status == BalanceStatus::epsilon_stop ? "epsilon_stop"
                                                                     : "max_iterations";
    std::printf("status %s\niterations %zu\nmerges %zu\nsplits %zu\nsuper_nodes %zu\nlinks %zu\na_plus %.6f\n", status,
                res.iterations, res.merges, res.splits, res.supers.size(), res.cross.link_count(), res.a_plus);
    return 0;
}

struct TransferOpts {
    std::string source, source_walks, target, supernodes, crosslinks, out_dir;
    bool directed = false;
    std::size_t hop_limit = 2;
    std::optional<std::size_t> cap;
};

int cmd_transfer(const TransferOpts& o) {
    Graph source = load_graph(o.source, o.directed);
    Graph target = load_graph(o.target, o.directed);
    auto supers = read_super_nodes(read_file(o.supernodes), degree_stats(source).degree_sequence);
    auto cross = read_cross_links(read_file(o.crosslinks), target.node_count());
    auto walks = read_walks(read_file(o.source_walks));
    auto sg = build_super_graph(walks, supers, {o.cap});
    auto tr = transfer_weights(target, sg, cross, candidate_pairs(target, o.hop_limit));
    fs::path dir(o.out_dir);
    write_file_atomic(dir / "supergraph.tsv", write_super_graph(sg));
    write_file_atomic(dir / "transfer.tsv", write_transfer(tr));
    write_file_atomic(dir / "evolved.edges", write_edge_list(evolve_edges(target, tr)));
    std::printf("super_edges %zu\ncandidates %zu\nevolved %zu\n", sg.edge_count(), tr.entries.size(),
                tr.evolved_count());
    return 0;
}

struct EmbedOpts {
    std::string walks, graph, labels, out, binary_out;
    bool directed = false;
    bool parallel = false;
    TrainConfig cfg{.dimension = 128};
};

int cmd_embed(EmbedOpts o) {
    auto ws = read_walks(read_file(o.walks));
    std::optional<Graph> g;
    if (!o.graph.empty()) {
        g = load_graph(o.graph, o.directed);
        // same node order as the pipeline, which appends labeled isolated nodes
        if (!o.labels.empty()) g = g->with_extra_nodes(label_node_names(read_file(o.labels)));
    }
    for (const auto& w : ws.walks)
        for (NodeId v : w)
            if (g && v >= g->node_count())
                throw ValueError("walk visits node index " + std::to_string(v) + " but the graph has " +
                                 std::to_string(g->node_count()) + " nodes (walks from 'run' also need --labels)");
    o.cfg.deterministic = !o.parallel;
    auto emb = train(ws, o.cfg, g ? g->node_count() : 0);
    IdMap ids = g ? g->ids() : IdMap::identity(emb.rows);
    write_file_atomic(o.out, export_embedding(emb, ids));
    if (!o.binary_out.empty()) write_file_atomic(o.binary_out, export_embedding_binary(emb));
    for (std::size_t e = 0; e < emb.epoch_losses.size(); ++e) std::printf("epoch %zu loss %.6f\n", e + 1, emb.epoch_losses[e]);
    return 0;
}

struct EvalOpts {
    std::string embeddings, baseline, labels, fractions = "0.1..0.9", out, ttest_out;
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
};

EvalReport eval_file(const std::string& path, const std::string& labels_path, const EvalConfig& ec) {
    auto imp = import_embedding(read_file(path));
    auto labels = read_labels(read_file(labels_path), imp.ids);
    return evaluate(imp.embedding, labels, ec);
}

int cmd_evaluate(const EvalOpts& o) {
    EvalConfig ec;
    ec.fractions = parse_fractions(o.fractions);
    ec.repetitions = o.repetitions;
    ec.seed = o.seed;
    auto rep = eval_file(o.embeddings, o.labels, ec);
    auto text = write_eval_report(rep);
    if (o.out.empty())
        std::cout << text;
    else
        write_file_atomic(o.out, text);
    if (rep.flagged_labels) std::fprintf(stderr, "warning: %zu label/run pairs had no positive training example\n", rep.flagged_labels);
    if (!o.baseline.empty()) {
        auto base = eval_file(o.baseline, o.labels, ec);
        auto tt = write_t_tests("embedding_vs_baseline", rep, base);
        if (o.ttest_out.empty())
            std::cout << '\n' << tt;
        else
            write_file_atomic(o.ttest_out, tt);
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& extras) {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = parse_config(read_file(config_path));
    // --key value or --key=value, keys as in the config file
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string tok = extras[i];
        if (!tok.starts_with("--")) throw ValueError("unexpected argument '" + tok + "'");
        tok = tok.substr(2);
        if (auto eq = tok.find('='); eq != std::string::npos) {
            set_config_value(cfg, tok.substr(0, eq), tok.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size()) throw ValueError("missing value for --" + tok);
            set_config_value(cfg, tok, extras[++i]);
        }
    }
    if (const char* env = std::getenv("CDNR_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    auto man = run_pipeline(cfg);
    for (const auto& s : man.stages) std::printf("%-13s %8.3fs\n", s.name.c_str(), s.seconds);
    if (man.report)
        for (const auto& s : man.report->summary())
            std::printf("fraction %.2f micro_f1 %.4f macro_f1 %.4f\n", s.fraction, s.micro_mean, s.macro_mean);
    std::printf("manifest %s\n", (cfg.output_dir / "manifest.json").string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-domain network representation toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    StatsOpts so;
    auto* stats = app.add_subcommand("stats", "degree statistics and power-law fit");
    stats->add_option("--graph", so.graph, "edge list")->required()->check(CLI::ExistingFile);
    stats->add_flag("--directed", so.directed);
    stats->add_option("--out", so.out, "degree histogram CSV");
    stats->add_option("--loglog", so.loglog, "log-log degree distribution CSV");
    stats->add_option("--walks", so.walks, "walk file for a visit-frequency fit")->check(CLI::ExistingFile);
    stats->add_option("--visit-out", so.visit_out, "log-log visit-frequency CSV");
    stats->callback([&] { rc = cmd_stats(so); });

    WalkOpts wo;
    auto* walk = app.add_subcommand("walk", "second-order random walks");
    walk->add_option("--graph", wo.graph)->required()->check(CLI::ExistingFile);
    walk->add_option("--out", wo.out)->required();
    walk->add_flag("--directed", wo.directed);
    walk->add_option("--k", wo.cfg.walks_per_node, "walks per node")->capture_default_str();
    walk->add_option("--l", wo.cfg.walk_length, "walk length")->capture_default_str();
    walk->add_option("--p", wo.cfg.p)->capture_default_str();
    walk->add_option("--q", wo.cfg.q)->capture_default_str();
    walk->add_option("--seed", wo.cfg.seed);
    walk->add_flag("--weighted", wo.cfg.use_edge_weights, "scale transitions by edge weight");
    walk->add_option("--workers", wo.workers);
    walk->callback([&] { rc = cmd_walk(wo); });

    BalanceOpts bo;
    auto* bal = app.add_subcommand("balance", "super nodes and cross-domain links");
    bal->add_option("--source", bo.source)->required()->check(CLI::ExistingFile);
    bal->add_option("--target", bo.target)->required()->check(CLI::ExistingFile);
    bal->add_option("--out-dir", bo.out_dir)->required();
    bal->add_flag("--directed", bo.directed);
    bal->add_option("--gamma", bo.params.gamma)->capture_default_str();
    bal->add_option("--lambda", bo.params.lambda)->capture_default_str();
    bal->add_option("--epsilon", bo.params.epsilon)->capture_default_str();
    bal->add_option("--max-iterations", bo.params.max_iterations);
    bal->callback([&] { rc = cmd_balance(bo); });

    TransferOpts to;
    auto* tr = app.add_subcommand("transfer", "super graph and transferred target weights");
    tr->add_option("--source", to.source)->required()->check(CLI::ExistingFile);
    tr->add_option("--source-walks", to.source_walks)->required()->check(CLI::ExistingFile);
    tr->add_option("--target", to.target)->required()->check(CLI::ExistingFile);
    tr->add_option("--supernodes", to.supernodes)->required()->check(CLI::ExistingFile);
    tr->add_option("--crosslinks", to.crosslinks)->required()->check(CLI::ExistingFile);
    tr->add_option("--out-dir", to.out_dir)->required();
    tr->add_flag("--directed", to.directed);
    tr->add_option("--hop-limit", to.hop_limit)->capture_default_str();
    tr->add_option("--pair-distance-cap", to.cap);
    tr->callback([&] { rc = cmd_transfer(to); });

    EmbedOpts eo;
    auto* emb = app.add_subcommand("embed", "skip-gram training over a walk file");
    emb->add_option("--walks", eo.walks)->required()->check(CLI::ExistingFile);
    emb->add_option("--graph", eo.graph, "graph supplying external ids and isolated nodes")->check(CLI::ExistingFile);
    emb->add_option("--labels", eo.labels, "label file whose unseen nodes extend --graph")->check(CLI::ExistingFile);
    emb->add_option("--out", eo.out)->required();
    emb->add_option("--binary-out", eo.binary_out);
    emb->add_flag("--directed", eo.directed);
    emb->add_option("--d", eo.cfg.dimension)->capture_default_str();
    emb->add_option("--window", eo.cfg.window)->capture_default_str();
    emb->add_option("--negatives", eo.cfg.negatives)->capture_default_str();
    emb->add_option("--lr", eo.cfg.initial_learning_rate)->capture_default_str();
    emb->add_option("--epochs", eo.cfg.epochs)->capture_default_str();
    emb->add_option("--seed", eo.cfg.seed);
    emb->add_flag("--parallel", eo.parallel, "unsynchronized multi-worker training");
    emb->add_option("--workers", eo.cfg.workers);
    emb->callback([&] { rc = cmd_embed(eo); });

    EvalOpts vo;
    auto* ev = app.add_subcommand("evaluate", "one-vs-rest classification F1 over repeated splits");
    ev->add_option("--embeddings", vo.embeddings)->required()->check(CLI::ExistingFile);
    ev->add_option("--labels", vo.labels)->required()->check(CLI::ExistingFile);
    ev->add_option("--fractions", vo.fractions, "list or range, e.g. 0.1..0.9")->capture_default_str();
    ev->add_option("--repetitions", vo.repetitions)->capture_default_str();
    ev->add_option("--seed", vo.seed);
    ev->add_option("--out", vo.out, "report CSV (stdout if omitted)");
    ev->add_option("--baseline", vo.baseline, "second embedding for paired t-tests")->check(CLI::ExistingFile);
    ev->add_option("--ttest-out", vo.ttest_out);
    ev->callback([&] { rc = cmd_evaluate(vo); });

    auto* synth = app.add_subcommand("synth", "synthetic graphs");
    synth->require_subcommand(1);
    std::size_t n = 1000, m = 3, k = 3;
    double p_in = 0.1, p_out = 0.01, keep = 0.3;
    std::uint64_t seed = 0;
    std::string out, labels_out, graph_in;
    auto* sf = synth->add_subcommand("scale-free", "preferential attachment");
    sf->add_option("--n", n)->capture_default_str();
    sf->add_option("--m", m)->capture_default_str();
    sf->add_option("--seed", seed);
    sf->add_option("--out", out)->required();
    sf->callback([&] { write_file_atomic(out, write_edge_list(synth::scale_free(n, m, seed))); });
    auto* pp = synth->add_subcommand("planted", "planted partition with labels");
    pp->add_option("--n", n)->capture_default_str();
    pp->add_option("--k", k)->capture_default_str();
    pp->add_option("--p-in", p_in)->capture_default_str();
    pp->add_option("--p-out", p_out)->capture_default_str();
    pp->add_option("--seed", seed);
    pp->add_option("--out", out, "edge list")->default_val("planted.edges");
    pp->add_option("--labels-out", labels_out)->default_val("planted.labels");
    pp->callback([&] {
        auto lg = synth::planted_partition(n, k, p_in, p_out, seed);
        write_file_atomic(out, write_edge_list(lg.graph));
        write_file_atomic(labels_out, write_labels(lg.labels, lg.graph.ids()));
    });
    auto* dg = synth->add_subcommand("degrade", "keep a random fraction of edges");
    dg->add_option("--graph", graph_in)->required()->check(CLI::ExistingFile);
    dg->add_option("--keep", keep)->capture_default_str();
    dg->add_option("--seed", seed);
    dg->add_option("--out", out)->required();
    dg->callback([&] { write_file_atomic(out, write_edge_list(synth::degrade(load_graph(graph_in, false), keep, seed))); });

    std::string config_path;
    auto* run = app.add_subcommand("run", "full pipeline; any config key may be given as --key value");
    run->add_option("--config", config_path)->check(CLI::ExistingFile);
    run->allow_extras();
    run->callback([&] { rc = cmd_run(config_path, run->remaining()); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
