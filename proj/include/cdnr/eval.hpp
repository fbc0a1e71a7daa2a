#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cdnr/embed.hpp"
#include "cdnr/error.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/rng.hpp"
#include "cdnr/text.hpp"

namespace cdnr {

using LabelId = std::uint32_t;

struct LabelSet {
    std::map<NodeId, std::vector<LabelId>> labels;  // sorted, unique
    std::size_t label_count = 0;
    std::vector<std::string> label_names;

    std::vector<NodeId> nodes() const {
        std::vector<NodeId> out;
        out.reserve(labels.size());
        for (const auto& [v, _] : labels) out.push_back(v);
        return out;
    }

    bool multi_label() const {
        return std::any_of(labels.begin(), labels.end(), [](const auto& kv) { return kv.second.size() > 1; });
    }
};

// Lines "node label [label ...]" separated by whitespace or commas; repeated
// nodes accumulate labels. Label ids follow first appearance.
inline LabelSet read_labels(std::string_view text, const IdMap& ids) {
    LabelSet set;
    std::map<std::string, LabelId, std::less<>> by_name;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty() || body.front() == '#') return;
        auto tok = split_tokens(body, true);
        if (tok.size() < 2) throw ParseError(line_no, "expected node and at least one label");
        auto node = ids.find(tok[0]);
        if (!node) throw ValueError("line " + std::to_string(line_no) + ": unknown node '" + std::string(tok[0]) + "'");
        auto& dst = set.labels[*node];
        for (std::size_t k = 1; k < tok.size(); ++k) {
            auto it = by_name.find(tok[k]);
            if (it == by_name.end()) {
                it = by_name.emplace(std::string(tok[k]), static_cast<LabelId>(set.label_names.size())).first;
                set.label_names.emplace_back(tok[k]);
            }
            dst.push_back(it->second);
        }
        std::sort(dst.begin(), dst.end());
        dst.erase(std::unique(dst.begin(), dst.end()), dst.end());
    });
    set.label_count = set.label_names.size();
    return set;
}

// Node names in a label file, in order of first appearance.
inline std::vector<std::string> label_node_names(std::string_view text) {
    std::vector<std::string> out;
    IdMap seen;
    for_each_line(text, [&](std::size_t, std::string_view line) {
        auto body = trim(line);
        if (body.empty() || body.front() == '#') return;
        auto tok = split_tokens(body, true);
        if (!tok.empty() && !seen.find(tok[0])) {
            seen.add(tok[0]);
            out.emplace_back(tok[0]);
        }
    });
    return out;
}

// "external_id<TAB>label" per (node, label).
inline std::string write_labels(const std::vector<std::vector<LabelId>>& labels, const IdMap& ids) {
    std::string out;
    for (std::size_t v = 0; v < labels.size(); ++v)
        for (auto l : labels[v]) out += ids.name(static_cast<NodeId>(v)) + '\t' + std::to_string(l) + '\n';
    return out;
}

inline LabelSet make_label_set(const std::vector<std::vector<LabelId>>& labels) {
    LabelSet set;
    LabelId max_label = 0;
    bool any = false;
    for (std::size_t v = 0; v < labels.size(); ++v) {
        if (labels[v].empty()) continue;
        auto l = labels[v];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        max_label = std::max(max_label, l.back());
        any = true;
        set.labels[static_cast<NodeId>(v)] = std::move(l);
    }
    set.label_count = any ? max_label + 1 : 0;
    for (std::size_t l = 0; l < set.label_count; ++l) set.label_names.push_back(std::to_string(l));
    return set;
}

// Uniform random partition of the labeled nodes; round(fraction * n) train.
inline std::pair<std::vector<NodeId>, std::vector<NodeId>> split(const LabelSet& set, double fraction,
                                                                  std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValueError("split: fraction must be in (0, 1)");
    auto nodes = set.nodes();
    auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(nodes.size())));
    if (n_train == 0 || n_train >= nodes.size()) throw ValueError("split: fraction leaves an empty side");
    Rng rng(seed);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    std::vector<NodeId> train(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<NodeId> test(nodes.begin() + static_cast<std::ptrdiff_t>(n_train), nodes.end());
    return {std::move(train), std::move(test)};
}

struct SvmConfig {
    double regularization = 1e-4;
    std::size_t epochs = 100;
    double learning_rate = 0.1;  // scaled by 1/sqrt(epoch)
    std::uint64_t seed = 0;
};

// One-vs-rest linear separators.
struct LinearOvrModel {
    std::size_t dim = 0;
    std::size_t label_count = 0;
    std::vector<double> weights;  // label_count x dim
    std::vector<double> bias;
    std::vector<bool> no_positive;  // label had no positive training example

    double score(LabelId l, std::span<const double> x) const {
        if (no_positive[l]) return -std::numeric_limits<double>::infinity();
        const double* w = weights.data() + static_cast<std::size_t>(l) * dim;
        return std::inner_product(x.begin(), x.end(), w, bias[l]);
    }

    std::size_t flagged_labels() const { return static_cast<std::size_t>(std::count(no_positive.begin(), no_positive.end(), true)); }
};

// L2-regularized hinge loss, per-sample subgradient steps with step size
// learning_rate / sqrt(epoch).
inline LinearOvrModel train_linear_ovr(const Embedding& emb, const std::vector<NodeId>& train_nodes,
                                       const LabelSet& set, const SvmConfig& cfg = {}) {
    if (train_nodes.empty()) throw ValueError("train_linear_ovr: empty training set");
    LinearOvrModel m;
    m.dim = emb.dim;
    m.label_count = set.label_count;
    m.weights.assign(m.label_count * m.dim, 0.0);
    m.bias.assign(m.label_count, 0.0);
    m.no_positive.assign(m.label_count, true);
    for (NodeId v : train_nodes) {
        if (v >= emb.rows) throw ValueError("train_linear_ovr: node without embedding");
        for (auto l : set.labels.at(v)) m.no_positive[l] = false;
    }

    std::vector<NodeId> order = train_nodes;
    std::vector<double> y(train_nodes.size());
    for (LabelId l = 0; l < m.label_count; ++l) {
        if (m.no_positive[l]) continue;
        double* w = m.weights.data() + static_cast<std::size_t>(l) * m.dim;
        double& b = m.bias[l];
        Rng rng(derive_seed(cfg.seed, l));
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            const double lr = cfg.learning_rate / std::sqrt(static_cast<double>(epoch));
            std::shuffle(order.begin(), order.end(), rng);
            for (NodeId v : order) {
                const auto& lab = set.labels.at(v);
                double target = std::binary_search(lab.begin(), lab.end(), l) ? 1.0 : -1.0;
                auto x = emb.vector(v);
                double margin = target * std::inner_product(x.begin(), x.end(), w, b);
                const double shrink = 1.0 - lr * cfg.regularization;
                for (std::size_t k = 0; k < m.dim; ++k) w[k] *= shrink;
                if (margin < 1.0) {
                    for (std::size_t k = 0; k < m.dim; ++k) w[k] += lr * target * x[k];
                    b += lr * target;
                }
            }
        }
    }
    return m;
}

enum class PredictMode { automatic, single_label, multi_label };

struct Predictions {
    std::vector<std::vector<LabelId>> labels;  // aligned with the test nodes
    std::size_t tied_nodes = 0;                // nodes whose chosen labels tied on score
};

// Single-label: argmax. Multi-label: the k_i highest-scoring labels, k_i the
// node's true label count. Ties go to the smaller label id.
inline Predictions predict(const LinearOvrModel& model, const Embedding& emb, const std::vector<NodeId>& test_nodes,
                           const LabelSet& set, PredictMode mode = PredictMode::automatic) {
    if (mode == PredictMode::automatic) mode = set.multi_label() ? PredictMode::multi_label : PredictMode::single_label;
    Predictions out;
    out.labels.reserve(test_nodes.size());
    std::vector<std::pair<double, LabelId>> scored(model.label_count);
    for (NodeId v : test_nodes) {
        auto x = emb.vector(v);
        for (LabelId l = 0; l < model.label_count; ++l) scored[l] = {model.score(l, x), l};
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t k = mode == PredictMode::single_label ? 1 : set.labels.at(v).size();
        k = std::min(k, scored.size());
        if (k < scored.size() && scored[k - 1].first == scored[k].first) ++out.tied_nodes;
        std::vector<LabelId> chosen;
        for (std::size_t i = 0; i < k; ++i) chosen.push_back(scored[i].second);
        std::sort(chosen.begin(), chosen.end());
        out.labels.push_back(std::move(chosen));
    }
    return out;
}

struct ConfusionCounts {
    std::vector<std::size_t> tp, fp, fn;
};

inline ConfusionCounts confusion(const std::vector<std::vector<LabelId>>& predictions,
                                 const std::vector<std::vector<LabelId>>& truth, std::size_t m) {
    if (predictions.size() != truth.size()) throw ValueError("confusion: size mismatch");
    ConfusionCounts c{std::vector<std::size_t>(m, 0), std::vector<std::size_t>(m, 0), std::vector<std::size_t>(m, 0)};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& p = predictions[i];
        const auto& t = truth[i];
        for (auto l : p) {
            if (std::find(t.begin(), t.end(), l) != t.end())
                ++c.tp.at(l);
            else
                ++c.fp.at(l);
        }
        for (auto l : t)
            if (std::find(p.begin(), p.end(), l) == p.end()) ++c.fn.at(l);
    }
    return c;
}

struct F1Scores {
    double micro = 0.0;
    double macro = 0.0;
};

inline double f1(double r, double p) { return r + p > 0 ? 2 * r * p / (r + p) : 0.0; }

namespace detail {
inline double ratio(double a, double b) { return b > 0 ? a / b : 0.0; }
}  // namespace detail

// Micro: F1 of pooled recall and precision. Macro: F1 of the label-averaged
// recall and precision (averaged first, then combined).
inline F1Scores micro_macro_f1(const std::vector<std::vector<LabelId>>& predictions,
                               const std::vector<std::vector<LabelId>>& truth, std::size_t m) {
    auto c = confusion(predictions, truth, m);
    double tp = 0, fp = 0, fn = 0, r_sum = 0, p_sum = 0;
    for (std::size_t l = 0; l < m; ++l) {
        tp += static_cast<double>(c.tp[l]);
        fp += static_cast<double>(c.fp[l]);
        fn += static_cast<double>(c.fn[l]);
        r_sum += detail::ratio(static_cast<double>(c.tp[l]), static_cast<double>(c.tp[l] + c.fn[l]));
        p_sum += detail::ratio(static_cast<double>(c.tp[l]), static_cast<double>(c.tp[l] + c.fp[l]));
    }
    F1Scores s;
    s.micro = f1(detail::ratio(tp, tp + fn), detail::ratio(tp, tp + fp));
    if (m > 0) s.macro = f1(r_sum / static_cast<double>(m), p_sum / static_cast<double>(m));
    return s;
}

// Two-sided paired t-test p-value. Zero-variance differences give 1 when
// their mean is zero and 0 otherwise.
inline double paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ValueError("paired_t_test: need equal lengths >= 2");
    const double n = static_cast<double>(a.size());
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0;
    for (double x : d) ss += (x - mean) * (x - mean);
    double var = ss / (n - 1);
    if (var <= 0.0) return mean == 0.0 ? 1.0 : 0.0;
    double t = mean / std::sqrt(var / n);
    boost::math::students_t_distribution<double> dist(n - 1);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

struct EvalConfig {
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
    SvmConfig svm;
    PredictMode mode = PredictMode::automatic;
};

struct EvalRun {
    double fraction;
    std::size_t run;
    double micro_f1;
    double macro_f1;
};

struct EvalSummary {
    double fraction;
    double micro_mean, micro_var;
    double macro_mean, macro_var;
};

inline std::pair<double, double> mean_and_variance(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double n = static_cast<double>(xs.size());
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1)};
}

struct EvalReport {
    std::vector<EvalRun> runs;
    std::size_t flagged_labels = 0;  // labels without positive training examples, summed over runs
    std::size_t tied_nodes = 0;

    std::vector<double> micro_scores(double fraction) const { return scores(fraction, true); }
    std::vector<double> macro_scores(double fraction) const { return scores(fraction, false); }

    std::vector<double> fractions() const {
        std::vector<double> out;
        for (const auto& r : runs)
            if (out.empty() || out.back() != r.fraction) out.push_back(r.fraction);
        return out;
    }

    std::vector<EvalSummary> summary() const {
        std::vector<EvalSummary> out;
        for (double f : fractions()) {
            auto [mi, mv] = mean_and_variance(micro_scores(f));
            auto [ma, av] = mean_and_variance(macro_scores(f));
            out.push_back({f, mi, mv, ma, av});
        }
        return out;
    }

private:
    std::vector<double> scores(double fraction, bool micro) const {
        std::vector<double> out;
        for (const auto& r : runs)
            if (r.fraction == fraction) out.push_back(micro ? r.micro_f1 : r.macro_f1);
        return out;
    }
};

inline F1Scores evaluate_split(const Embedding& emb, const LabelSet& set, double fraction, std::uint64_t seed,
                               const EvalConfig& cfg, std::size_t* flagged = nullptr, std::size_t* tied = nullptr) {
    auto [train_nodes, test_nodes] = split(set, fraction, seed);
    SvmConfig svm = cfg.svm;
    svm.seed = derive_seed(seed, 0x5f3);
    auto model = train_linear_ovr(emb, train_nodes, set, svm);
    auto pred = predict(model, emb, test_nodes, set, cfg.mode);
    std::vector<std::vector<LabelId>> truth;
    truth.reserve(test_nodes.size());
    for (NodeId v : test_nodes) truth.push_back(set.labels.at(v));
    if (flagged) *flagged += model.flagged_labels();
    if (tied) *tied += pred.tied_nodes;
    return micro_macro_f1(pred.labels, truth, set.label_count);
}

// Repeated random splits per training fraction.
inline EvalReport evaluate(const Embedding& emb, const LabelSet& set, const EvalConfig& cfg = {}) {
    if (set.label_count < 2) throw ValueError("evaluate: need at least 2 labels");
    for (const auto& [v, _] : set.labels)
        if (v >= emb.rows) throw ValueError("evaluate: labeled node without embedding");
    EvalReport rep;
    for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi)
        for (std::size_t run = 0; run < cfg.repetitions; ++run) {
            auto s = evaluate_split(emb, set, cfg.fractions[fi], derive_seed(cfg.seed, fi, run), cfg,
                                    &rep.flagged_labels, &rep.tied_nodes);
            rep.runs.push_back({cfg.fractions[fi], run, s.micro, s.macro});
        }
    return rep;
}

// "fraction,run,micro_f1,macro_f1" rows, then a summary block.
inline std::string write_eval_report(const EvalReport& rep) {
    std::string out = "fraction,run,micro_f1,macro_f1\n";
    for (const auto& r : rep.runs) {
        append_double(out, r.fraction);
        out += ',' + std::to_string(r.run) + ',';
        append_double(out, r.micro_f1);
        out += ',';
        append_double(out, r.macro_f1);
        out += '\n';
    }
    out += "\n# summary\nfraction,micro_mean,micro_var,macro_mean,macro_var\n";
    for (const auto& s : rep.summary()) {
        for (double x : {s.fraction, s.micro_mean, s.micro_var, s.macro_mean}) {
            append_double(out, x);
            out += ',';
        }
        append_double(out, s.macro_var);
        out += '\n';
    }
    return out;
}

// "pair,fraction,p_value" for micro and macro F1 per fraction, plus the mean
// of the per-fraction p-values under fraction "mean".
inline std::string write_t_tests(const std::string& pair_name, const EvalReport& a, const EvalReport& b) {
    std::string out = "pair,fraction,p_value\n";
    for (bool micro : {true, false}) {
        std::string name = pair_name + (micro ? ":micro" : ":macro");
        std::vector<double> ps;
        for (double f : a.fractions()) {
            auto sa = micro ? a.micro_scores(f) : a.macro_scores(f);
            auto sb = micro ? b.micro_scores(f) : b.macro_scores(f);
            if (sa.size() != sb.size() || sa.size() < 2) continue;
            double p = paired_t_test(sa, sb);
            ps.push_back(p);
            out += name + ',';
            append_double(out, f);
            out += ',';
            append_double(out, p);
            out += '\n';
        }
        if (!ps.empty()) {
            out += name + ",mean,";
            append_double(out, std::accumulate(ps.begin(), ps.end(), 0.0) / static_cast<double>(ps.size()));
            out += '\n';
        }
    }
    return out;
}

}  // namespace cdnr
