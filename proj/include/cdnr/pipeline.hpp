#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cdnr/balance.hpp"
#include "cdnr/embed.hpp"
#include "cdnr/error.hpp"
#include "cdnr/eval.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/text.hpp"
#include "cdnr/transfer.hpp"
#include "cdnr/walker.hpp"

namespace cdnr {

inline constexpr std::string_view kVersion = "cdnr 0.1.0";

struct PipelineConfig {
    std::filesystem::path source_graph;
    std::filesystem::path target_graph;
    std::filesystem::path labels;
    std::filesystem::path output_dir = "cdnr_out";
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool directed = false;

    WalkConfig walk;
    BalanceParams balance;
    bool transfer_enabled = true;
    std::size_t hop_limit = 2;
    std::optional<std::size_t> pair_distance_cap;
    TrainConfig embed{.dimension = 128};
    std::optional<std::uint64_t> embed_seed;
    bool eval_enabled = true;
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t repetitions = 10;

    void validate() const;
};

// "a,b,c" or "a..b" (step 0.1) or "a..b:step"
inline std::vector<double> parse_fractions(std::string_view text) {
    std::vector<double> out;
    auto bad = [&] { return ValueError("bad fraction list '" + std::string(text) + "'"); };
    if (auto dots = text.find(".."); dots != std::string_view::npos) {
        auto rest = text.substr(dots + 2);
        double step = 0.1;
        if (auto colon = rest.find(':'); colon != std::string_view::npos) {
            auto s = parse_double(trim(rest.substr(colon + 1)));
            if (!s || !(*s > 0)) throw bad();
            step = *s;
            rest = rest.substr(0, colon);
        }
        auto a = parse_double(trim(text.substr(0, dots)));
        auto b = parse_double(trim(rest));
        if (!a || !b || *b < *a) throw bad();
        auto count = static_cast<std::size_t>(std::floor((*b - *a) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(std::round((*a + static_cast<double>(i) * step) * 1e9) / 1e9);
    } else {
        for (auto tok : split_tokens(text, true)) {
            auto v = parse_double(tok);
            if (!v) throw bad();
            out.push_back(*v);
        }
    }
    if (out.empty()) throw bad();
    for (double f : out)
        if (!(f > 0.0 && f < 1.0)) throw ValueError("fractions must lie in (0, 1)");
    return out;
}

namespace detail {

inline bool parse_flag(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ValueError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

template <class Int>
Int parse_count(std::string_view key, std::string_view v) {
    auto x = parse_int<Int>(v);
    if (!x) throw ValueError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return *x;
}

inline double parse_real(std::string_view key, std::string_view v) {
    auto x = parse_double(v);
    if (!x) throw ValueError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    return *x;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "source_graph", "target_graph", "labels", "output_dir", "seed", "workers", "directed",
        "walk.k", "walk.l", "walk.p", "walk.q",
        "balance.gamma", "balance.lambda", "balance.epsilon", "balance.max_iterations", "balance.a_plus",
        "transfer.enabled", "transfer.hop_limit", "transfer.pair_distance_cap",
        "embed.d", "embed.window", "embed.negatives", "embed.lr", "embed.epochs", "embed.seed", "embed.deterministic",
        "eval.enabled", "eval.fractions", "eval.repetitions"};
    return keys;
}

inline void set_config_value(PipelineConfig& c, std::string_view key, std::string_view raw) {
    using detail::parse_count;
    using detail::parse_real;
    auto v = trim(raw);
    if (key == "source_graph") c.source_graph = std::string(v);
    else if (key == "target_graph") c.target_graph = std::string(v);
    else if (key == "labels") c.labels = std::string(v);
    else if (key == "output_dir") c.output_dir = std::string(v);
    else if (key == "seed") c.seed = parse_count<std::uint64_t>(key, v);
    else if (key == "workers") c.workers = parse_count<unsigned>(key, v);
    else if (key == "directed") c.directed = detail::parse_flag(key, v);
    else if (key == "walk.k") c.walk.walks_per_node = parse_count<std::size_t>(key, v);
    else if (key == "walk.l") c.walk.walk_length = parse_count<std::size_t>(key, v);
    else if (key == "walk.p") c.walk.p = parse_real(key, v);
    else if (key == "walk.q") c.walk.q = parse_real(key, v);
    else if (key == "balance.gamma") c.balance.gamma = parse_real(key, v);
    else if (key == "balance.lambda") c.balance.lambda = parse_real(key, v);
    else if (key == "balance.epsilon") c.balance.epsilon = parse_real(key, v);
    else if (key == "balance.max_iterations") c.balance.max_iterations = parse_count<std::size_t>(key, v);
    else if (key == "balance.a_plus") c.balance.a_plus = parse_real(key, v);
    else if (key == "transfer.enabled") c.transfer_enabled = detail::parse_flag(key, v);
    else if (key == "transfer.hop_limit") c.hop_limit = parse_count<std::size_t>(key, v);
    else if (key == "transfer.pair_distance_cap") {
        if (v == "none" || v.empty()) c.pair_distance_cap.reset();
        else c.pair_distance_cap = parse_count<std::size_t>(key, v);
    }
    else if (key == "embed.d") c.embed.dimension = parse_count<std::size_t>(key, v);
    else if (key == "embed.window") c.embed.window = parse_count<std::size_t>(key, v);
    else if (key == "embed.negatives") c.embed.negatives = parse_count<std::size_t>(key, v);
    else if (key == "embed.lr") c.embed.initial_learning_rate = parse_real(key, v);
    else if (key == "embed.epochs") c.embed.epochs = parse_count<std::size_t>(key, v);
    else if (key == "embed.seed") c.embed_seed = parse_count<std::uint64_t>(key, v);
    else if (key == "embed.deterministic") c.embed.deterministic = detail::parse_flag(key, v);
    else if (key == "eval.enabled") c.eval_enabled = detail::parse_flag(key, v);
    else if (key == "eval.fractions") c.fractions = parse_fractions(v);
    else if (key == "eval.repetitions") c.repetitions = parse_count<std::size_t>(key, v);
    else throw ValueError("unknown config key '" + std::string(key) + "'");
}

// Flat "key = value" lines with dotted section keys; '#' starts a comment.
inline PipelineConfig parse_config(std::string_view text, PipelineConfig c = {}) {
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto body = trim(line);
        if (body.empty()) return;
        auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        try {
            set_config_value(c, trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const ValueError& e) {
            throw ParseError(line_no, e.what());
        }
    });
    return c;
}

inline std::string format_config(const PipelineConfig& c) {
    std::string out;
    auto put = [&](std::string_view k, const std::string& v) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    };
    auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    put("source_graph", c.source_graph.string());
    put("target_graph", c.target_graph.string());
    put("labels", c.labels.string());
    put("output_dir", c.output_dir.string());
    put("seed", std::to_string(c.seed));
    put("workers", std::to_string(c.workers));
    put("directed", b(c.directed));
    put("walk.k", std::to_string(c.walk.walks_per_node));
    put("walk.l", std::to_string(c.walk.walk_length));
    put("walk.p", format_double(c.walk.p));
    put("walk.q", format_double(c.walk.q));
    put("balance.gamma", format_double(c.balance.gamma));
    put("balance.lambda", format_double(c.balance.lambda));
    put("balance.epsilon", format_double(c.balance.epsilon));
    if (c.balance.max_iterations) put("balance.max_iterations", std::to_string(*c.balance.max_iterations));
    if (c.balance.a_plus) put("balance.a_plus", format_double(*c.balance.a_plus));
    put("transfer.enabled", b(c.transfer_enabled));
    put("transfer.hop_limit", std::to_string(c.hop_limit));
    put("transfer.pair_distance_cap", c.pair_distance_cap ? std::to_string(*c.pair_distance_cap) : "none");
    put("embed.d", std::to_string(c.embed.dimension));
    put("embed.window", std::to_string(c.embed.window));
    put("embed.negatives", std::to_string(c.embed.negatives));
    put("embed.lr", format_double(c.embed.initial_learning_rate));
    put("embed.epochs", std::to_string(c.embed.epochs));
    if (c.embed_seed) put("embed.seed", std::to_string(*c.embed_seed));
    put("embed.deterministic", b(c.embed.deterministic));
    put("eval.enabled", b(c.eval_enabled));
    std::string fr;
    for (double f : c.fractions) {
        if (!fr.empty()) fr += ',';
        append_double(fr, f);
    }
    put("eval.fractions", fr);
    put("eval.repetitions", std::to_string(c.repetitions));
    return out;
}

inline void PipelineConfig::validate() const {
    auto need = [](const std::filesystem::path& p, std::string_view what) {
        if (p.empty()) throw ValueError(std::string(what) + " is not set");
        if (!std::filesystem::exists(p)) throw ValueError(std::string(what) + " not found: " + p.string());
    };
    if (transfer_enabled) need(source_graph, "source_graph");
    need(target_graph, "target_graph");
    if (eval_enabled) need(labels, "labels");
    if (output_dir.empty()) throw ValueError("output_dir is not set");
    walk.validate();
    balance.validate();
    embed.validate();
    if (hop_limit < 1) throw ValueError("transfer.hop_limit must be >= 1");
    if (pair_distance_cap && *pair_distance_cap < 1) throw ValueError("transfer.pair_distance_cap must be >= 1");
    if (eval_enabled && repetitions < 1) throw ValueError("eval.repetitions must be >= 1");
    for (double f : fractions)
        if (!(f > 0.0 && f < 1.0)) throw ValueError("eval.fractions must lie in (0, 1)");
}

struct StageRecord {
    std::string name;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> artifacts;
};

struct RunManifest {
    std::string config_text;
    std::string version{kVersion};
    std::vector<StageRecord> stages;
    bool ok = false;
    std::string failed_stage;
    std::string error;
    std::optional<EvalReport> report;  // not serialized; convenience for callers

    std::vector<std::filesystem::path> artifacts() const {
        std::vector<std::filesystem::path> out;
        for (const auto& s : stages) out.insert(out.end(), s.artifacts.begin(), s.artifacts.end());
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = version;
        j["status"] = ok ? "ok" : "failed";
        if (!ok) {
            j["failed_stage"] = failed_stage;
            j["error"] = error;
        }
        j["config"] = config_text;
        j["stages"] = nlohmann::json::array();
        for (const auto& s : stages) {
            nlohmann::json st;
            st["name"] = s.name;
            st["seconds"] = s.seconds;
            st["seed"] = s.seed;
            st["artifacts"] = nlohmann::json::array();
            for (const auto& a : s.artifacts) st["artifacts"].push_back(a.string());
            j["stages"].push_back(std::move(st));
        }
        return j;
    }
};

class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Stage seeds, all derived from the one root seed.
enum class Stage : std::uint64_t { source_walks = 1, target_walks = 2, embed = 3, eval = 4 };

inline std::uint64_t stage_seed(std::uint64_t root, Stage s) { return derive_seed(root, static_cast<std::uint64_t>(s)); }

// Bottom-layer walks, balance, transfer, top-layer walks, embedding, and an
// optional evaluation; with transfer disabled the top layer walks the target
// as given. Every artifact goes to output_dir and manifest.json is written
// last (also, partially, when a stage throws).
inline RunManifest run_pipeline(const PipelineConfig& cfg) {
    RunManifest man;
    man.config_text = format_config(cfg);
    const auto& dir = cfg.output_dir;
    auto manifest_path = dir / "manifest.json";
    auto write_manifest = [&] { write_file_atomic(manifest_path, man.to_json().dump(2) + "\n"); };

    std::string current = "validate";
    auto stage = [&](const std::string& name, std::uint64_t seed, auto&& body) {
        current = name;
        StageRecord rec{name, 0.0, seed, {}};
        auto t0 = std::chrono::steady_clock::now();
        body(rec);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        man.stages.push_back(std::move(rec));
    };
    auto emit = [&](StageRecord& rec, const std::string& file, std::string_view content) {
        auto path = dir / file;
        write_file_atomic(path, content);
        rec.artifacts.push_back(path);
    };

    try {
        cfg.validate();
        std::filesystem::create_directories(dir);

        Graph target, source;
        LabelSet labels;
        stage("load", cfg.seed, [&](StageRecord&) {
            target = load_edge_list(read_file(cfg.target_graph), cfg.directed);
            if (cfg.transfer_enabled) source = load_edge_list(read_file(cfg.source_graph), cfg.directed);
            if (cfg.eval_enabled) {
                // labeled nodes without edges join the target as isolated nodes
                auto text = read_file(cfg.labels);
                auto names = label_node_names(text);
                target = target.with_extra_nodes(names);
                labels = read_labels(text, target.ids());
            }
        });

        Graph top = target;
        if (cfg.transfer_enabled) {
            WalkSet source_walks;
            auto wseed = stage_seed(cfg.seed, Stage::source_walks);
            stage("source_walks", wseed, [&](StageRecord& rec) {
                WalkConfig wc = cfg.walk;
                wc.seed = wseed;
                source_walks = generate_walks(source, wc, GraphTag::source, cfg.workers);
                emit(rec, "walks_source.txt", write_walks(source_walks));
            });
            BalanceResult bal;
            stage("balance", cfg.seed, [&](StageRecord& rec) {
                bal = balance(source, target, cfg.balance);
                emit(rec, "supernodes.tsv", write_super_nodes(bal.supers));
                emit(rec, "crosslinks.tsv", write_cross_links(bal.cross));
            });
            stage("transfer", cfg.seed, [&](StageRecord& rec) {
                auto sg = build_super_graph(source_walks, bal.supers, {cfg.pair_distance_cap});
                emit(rec, "supergraph.tsv", write_super_graph(sg));
                auto tr = transfer_weights(target, sg, bal.cross, candidate_pairs(target, cfg.hop_limit));
                emit(rec, "transfer.tsv", write_transfer(tr));
                top = evolve_edges(target, tr);
            });
        }

        WalkSet target_walks;
        auto tseed = stage_seed(cfg.seed, Stage::target_walks);
        stage("target_walks", tseed, [&](StageRecord& rec) {
            WalkConfig wc = cfg.walk;
            wc.seed = tseed;
            wc.use_edge_weights = true;
            target_walks = generate_walks(top, wc, GraphTag::target, cfg.workers);
            emit(rec, "walks_target.txt", write_walks(target_walks));
        });

        Embedding emb;
        auto eseed = cfg.embed_seed.value_or(stage_seed(cfg.seed, Stage::embed));
        stage("embed", eseed, [&](StageRecord& rec) {
            TrainConfig tc = cfg.embed;
            tc.seed = eseed;
            tc.workers = cfg.workers;
            emb = train(target_walks, tc, target.node_count());
            emit(rec, "embedding.txt", export_embedding(emb, target.ids()));
        });

        if (cfg.eval_enabled) {
            auto vseed = stage_seed(cfg.seed, Stage::eval);
            stage("eval", vseed, [&](StageRecord& rec) {
                EvalConfig ec;
                ec.fractions = cfg.fractions;
                ec.repetitions = cfg.repetitions;
                ec.seed = vseed;
                man.report = evaluate(emb, labels, ec);
                emit(rec, "eval.csv", write_eval_report(*man.report));
            });
        }
        man.ok = true;
        write_manifest();
    } catch (const std::exception& e) {
        man.ok = false;
        man.failed_stage = current;
        man.error = e.what();
        try {
            std::filesystem::create_directories(dir);
            write_manifest();
        } catch (...) {
        }
        throw PipelineError(current, e.what());
    }
    return man;
}

}  // namespace cdnr
