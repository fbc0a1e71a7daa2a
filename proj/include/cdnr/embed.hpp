#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "cdnr/error.hpp"
#include "cdnr/graph.hpp"
#include "cdnr/rng.hpp"
#include "cdnr/text.hpp"
#include "cdnr/walker.hpp"

namespace cdnr {

struct TrainConfig {
    std::size_t dimension = 128;
    std::size_t window = 10;
    std::size_t negatives = 5;
    double initial_learning_rate = 0.025;
    double final_learning_rate = 1e-4;
    std::size_t epochs = 5;
    std::uint64_t seed = 0;
    // Sequential, bit-reproducible training. When false, `workers` threads
    // update shared rows without synchronization.
    bool deterministic = true;
    unsigned workers = 1;

    void validate() const {
        if (dimension < 1) throw ValueError("dimension must be >= 1");
        if (window < 1) throw ValueError("window must be >= 1");
        if (negatives < 1) throw ValueError("negatives must be >= 1");
        if (!(initial_learning_rate > 0.0)) throw ValueError("learning rate must be positive");
    }
};

// Row v of `input` is the representation of node v.
struct Embedding {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> input;    // rows x dim
    std::vector<double> context;  // rows x dim, training auxiliary
    std::vector<std::size_t> visit_counts;
    std::vector<double> epoch_losses;  // mean per-pair loss of each epoch

    std::span<const double> vector(std::size_t row) const { return {input.data() + row * dim, dim}; }
    std::span<double> vector(std::size_t row) { return {input.data() + row * dim, dim}; }
    std::span<const double> context_vector(std::size_t row) const { return {context.data() + row * dim, dim}; }

    bool all_finite() const {
        auto finite = [](double x) { return std::isfinite(x); };
        return std::all_of(input.begin(), input.end(), finite) && std::all_of(context.begin(), context.end(), finite);
    }
};

// Input rows uniform in (-0.5/d, 0.5/d), context rows zero.
inline Embedding initialize_embedding(std::size_t rows, const TrainConfig& cfg) {
    Embedding e;
    e.rows = rows;
    e.dim = cfg.dimension;
    e.input.resize(rows * cfg.dimension);
    e.context.assign(rows * cfg.dimension, 0.0);
    Rng rng(derive_seed(cfg.seed, 0x1417));
    const double half = 0.5 / static_cast<double>(cfg.dimension);
    std::uniform_real_distribution<double> u(-half, half);
    for (auto& x : e.input) x = u(rng);
    e.visit_counts.assign(rows, 0);
    return e;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow
inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// Walker's alias method: O(1) draws from a fixed discrete distribution.
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (n == 0 || !(total > 0.0)) throw ValueError("alias table needs a positive total weight");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            auto s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) prob_[i] = 1.0;
        for (auto i : small) prob_[i] = 1.0;  // rounding leftovers
    }

    std::size_t size() const noexcept { return prob_.size(); }

    std::uint32_t operator()(Rng& rng) const {
        double u = uniform01(rng) * static_cast<double>(prob_.size());
        auto i = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
        return (u - static_cast<double>(i)) < prob_[i] ? static_cast<std::uint32_t>(i) : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

struct SkipGramSample {
    NodeId center;
    NodeId context;
    std::vector<NodeId> negatives;
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> center_grad;  // d loss / d f_center
    // d loss / d c_row for every touched context row, repeated rows summed
    std::vector<std::pair<NodeId, std::vector<double>>> context_grads;
};

// Negative-sampling loss for one positive pair:
//   -log s(f_u . c_x) - sum_n log s(-f_u . c_n)
inline LossGradient loss_and_gradient(const SkipGramSample& sample, const Embedding& emb) {
    const std::size_t d = emb.dim;
    LossGradient out;
    out.center_grad.assign(d, 0.0);
    auto f = emb.vector(sample.center);

    auto touch = [&](NodeId row) -> std::vector<double>& {
        for (auto& [r, g] : out.context_grads)
            if (r == row) return g;
        out.context_grads.emplace_back(row, std::vector<double>(d, 0.0));
        return out.context_grads.back().second;
    };
    auto term = [&](NodeId row, double label) {
        auto c = emb.context_vector(row);
        double s = std::inner_product(f.begin(), f.end(), c.begin(), 0.0);
        out.loss -= label > 0 ? log_sigmoid(s) : log_sigmoid(-s);
        // d/ds of the term: sigmoid(s) - label
        double g = sigmoid(s) - label;
        auto& gc = touch(row);
        for (std::size_t k = 0; k < d; ++k) {
            out.center_grad[k] += g * c[k];
            gc[k] += g * f[k];
        }
    };
    term(sample.context, 1.0);
    for (NodeId n : sample.negatives) term(n, 0.0);
    return out;
}

namespace detail {

// Plain or relaxed-atomic element access; the atomic form lets parallel
// workers race on shared rows without undefined behaviour.
template <bool Shared>
struct RowAccess {
    static double load(const double& x) {
        if constexpr (Shared)
            return std::atomic_ref<const double>(x).load(std::memory_order_relaxed);
        else
            return x;
    }
    static void store(double& x, double v) {
        if constexpr (Shared)
            std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
        else
            x = v;
    }
};

// Four partial sums so the compiler can keep several lanes busy without
// reassociating on its own.
inline double dot(const double* __restrict a, const double* __restrict b, std::size_t d) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < d; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

// grad += g * c; c += g * f
inline void axpy_pair(double g, double* __restrict c, const double* __restrict f, double* __restrict grad,
                      std::size_t d) {
    for (std::size_t k = 0; k < d; ++k) {
        grad[k] += g * c[k];
        c[k] += g * f[k];
    }
}

// One SGD step on a positive pair plus sampled negatives. Returns the pair's
// loss before the update.
template <bool Shared>
double sgd_pair(Embedding& emb, NodeId center, NodeId ctx, std::size_t negatives,
                const AliasTable& noise, Rng& rng, double lr, std::vector<double>& grad_f,
                std::vector<double>& f_local) {
    using A = RowAccess<Shared>;
    const std::size_t d = emb.dim;
    double* f = emb.input.data() + static_cast<std::size_t>(center) * d;
    for (std::size_t k = 0; k < d; ++k) {
        f_local[k] = A::load(f[k]);
        grad_f[k] = 0.0;
    }
    double linear = 0.0, log_factor = 1.0;
    for (std::size_t i = 0; i <= negatives; ++i) {
        NodeId row = ctx;
        double label = 1.0;
        if (i > 0) {
            row = noise(rng);
            if (row == ctx) continue;
            label = 0.0;
        }
        double* c = emb.context.data() + static_cast<std::size_t>(row) * d;
        double s = 0.0;
        if constexpr (Shared)
            for (std::size_t k = 0; k < d; ++k) s += f_local[k] * A::load(c[k]);
        else
            s = dot(f_local.data(), c, d);
        // softplus = max(.,0) + log(1 + e) with e <= 1; the log factors are
        // multiplied up (at most 2 each) and taken once per pair
        double e = std::exp(-std::abs(s));
        double sig = s >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
        linear += label > 0 ? std::max(-s, 0.0) : std::max(s, 0.0);
        log_factor *= 1.0 + e;
        double g = (label - sig) * lr;
        if constexpr (Shared) {
            for (std::size_t k = 0; k < d; ++k) {
                double ck = A::load(c[k]);
                grad_f[k] += g * ck;
                A::store(c[k], ck + g * f_local[k]);
            }
        } else {
            axpy_pair(g, c, f_local.data(), grad_f.data(), d);
        }
    }
    for (std::size_t k = 0; k < d; ++k) A::store(f[k], A::load(f[k]) + grad_f[k]);
    return linear + std::log(log_factor);
}

inline std::size_t pairs_in_walk(std::size_t len, std::size_t window) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < len; ++i) {
        std::size_t lo = i >= window ? i - window : 0;
        std::size_t hi = std::min(len - 1, i + window);
        n += hi - lo;
    }
    return n;
}

template <bool Shared>
void train_walks(Embedding& emb, const WalkSet& walks, std::span<const std::size_t> order, const TrainConfig& cfg,
                 const AliasTable& noise, Rng rng, std::atomic<std::size_t>& progress,
                 std::size_t total_pairs, double& loss_sum, std::size_t& pair_count) {
    std::vector<double> grad_f(emb.dim), f_local(emb.dim);
    const double lr0 = cfg.initial_learning_rate, lr1 = std::min(cfg.final_learning_rate, lr0);
    std::size_t local = 0;
    double lr = lr0;
    // Sequential training tracks progress privately and decays per pair;
    // parallel workers publish to the shared counter in batches.
    const std::size_t start = progress.load(std::memory_order_relaxed);
    std::size_t mine = 0;
    auto refresh_lr = [&] {
        std::size_t done;
        if constexpr (Shared) {
            done = progress.fetch_add(local, std::memory_order_relaxed) + local;
        } else {
            mine += local;
            done = start + mine;
        }
        local = 0;
        double frac = std::min(1.0, static_cast<double>(done) / static_cast<double>(std::max<std::size_t>(1, total_pairs)));
        lr = lr0 - (lr0 - lr1) * frac;
    };
    for (std::size_t idx : order) {
        const auto& w = walks.walks[idx];
        for (std::size_t i = 0; i < w.size(); ++i) {
            std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
            std::size_t hi = std::min(w.size() - 1, i + cfg.window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j == i) continue;
                loss_sum += sgd_pair<Shared>(emb, w[i], w[j], cfg.negatives, noise, rng, lr, grad_f, f_local);
                ++pair_count;
                if (++local >= (Shared ? 1024 : 1)) refresh_lr();
            }
        }
    }
    refresh_lr();
    if constexpr (!Shared) progress.fetch_add(mine, std::memory_order_relaxed);
}

}  // namespace detail

// Skip-gram with negative sampling over walk windows of +-window positions.
// Negatives are drawn proportionally to visit_count^0.75 and the learning
// rate decays linearly over all epochs' pairs.
inline Embedding train(const WalkSet& walks, const TrainConfig& cfg, std::size_t node_count = 0) {
    cfg.validate();
    if (walks.walks.empty()) throw ValueError("train: empty walk set");
    std::size_t rows = node_count;
    for (const auto& w : walks.walks)
        for (NodeId v : w) rows = std::max<std::size_t>(rows, static_cast<std::size_t>(v) + 1);

    Embedding emb = initialize_embedding(rows, cfg);
    emb.visit_counts = visit_counts(walks, rows);
    std::vector<double> noise_weights(rows);
    for (std::size_t v = 0; v < rows; ++v) noise_weights[v] = std::pow(static_cast<double>(emb.visit_counts[v]), 0.75);
    AliasTable noise(noise_weights);

    std::size_t pairs_per_epoch = 0;
    for (const auto& w : walks.walks) pairs_per_epoch += detail::pairs_in_walk(w.size(), cfg.window);
    const std::size_t total = pairs_per_epoch * cfg.epochs;
    std::atomic<std::size_t> progress{0};

    std::vector<std::size_t> order(walks.walks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const unsigned workers = cfg.deterministic ? 1u : std::max(1u, cfg.workers);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0x5eed, epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t pair_count = 0;
        if (workers == 1) {
            detail::train_walks<false>(emb, walks, order, cfg, noise, Rng(derive_seed(cfg.seed, epoch, 0)), progress,
                                       total, loss_sum, pair_count);
        } else {
            std::vector<double> losses(workers, 0.0);
            std::vector<std::size_t> counts(workers, 0);
            {
                std::vector<std::jthread> pool;
                std::size_t chunk = (order.size() + workers - 1) / workers;
                for (unsigned t = 0; t < workers; ++t) {
                    std::size_t b = std::min(order.size(), t * chunk), e = std::min(order.size(), b + chunk);
                    std::span<const std::size_t> shard(order.data() + b, e - b);
                    pool.emplace_back([&, shard, t] {
                        detail::train_walks<true>(emb, walks, shard, cfg, noise, Rng(derive_seed(cfg.seed, epoch, t)),
                                                  progress, total, losses[t], counts[t]);
                    });
                }
            }
            for (unsigned t = 0; t < workers; ++t) {
                loss_sum += losses[t];
                pair_count += counts[t];
            }
        }
        emb.epoch_losses.push_back(pair_count ? loss_sum / static_cast<double>(pair_count) : 0.0);
    }
    if (!emb.all_finite()) throw StateError("train: non-finite embedding entries");
    return emb;
}

// "<rows> <d>" then "<external_id> v1 ... vd" per row, shortest round-trip decimals.
inline std::string export_embedding(const Embedding& emb, const IdMap& ids) {
    if (ids.size() < emb.rows) throw ValueError("export: id map smaller than embedding");
    std::string out = std::to_string(emb.rows) + " " + std::to_string(emb.dim) + "\n";
    for (std::size_t r = 0; r < emb.rows; ++r) {
        out += ids.name(static_cast<NodeId>(r));
        for (double x : emb.vector(r)) {
            out += ' ';
            append_double(out, x);
        }
        out += '\n';
    }
    return out;
}

struct ImportedEmbedding {
    IdMap ids;
    Embedding embedding;
};

inline ImportedEmbedding import_embedding(std::string_view text) {
    ImportedEmbedding res;
    auto& e = res.embedding;
    bool header = false;
    for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        auto body = trim(line);
        if (body.empty()) return;
        auto tok = split_tokens(body);
        if (!header) {
            if (tok.size() != 2) throw ParseError(line_no, "expected '<rows> <d>' header");
            auto r = parse_int<std::size_t>(tok[0]);
            auto d = parse_int<std::size_t>(tok[1]);
            if (!r || !d) throw ParseError(line_no, "bad header");
            e.rows = *r;
            e.dim = *d;
            e.input.reserve(e.rows * e.dim);
            header = true;
            return;
        }
        if (tok.size() != e.dim + 1) throw ParseError(line_no, "expected id plus " + std::to_string(e.dim) + " values");
        auto before = res.ids.size();
        res.ids.add(tok[0]);
        if (res.ids.size() == before) throw ParseError(line_no, "duplicate id '" + std::string(tok[0]) + "'");
        for (std::size_t k = 1; k < tok.size(); ++k) {
            auto v = parse_double(tok[k]);
            if (!v) throw ParseError(line_no, "bad value '" + std::string(tok[k]) + "'");
            e.input.push_back(*v);
        }
    });
    if (!header) throw ParseError(1, "empty embedding file");
    if (res.ids.size() != e.rows) throw ParseError(0, "row count does not match header");
    e.context.assign(e.input.size(), 0.0);
    e.visit_counts.assign(e.rows, 0);
    return res;
}

inline constexpr std::string_view kBinaryMagic = "CDNREMB1";

// Magic, little-endian u64 rows, u64 dim, then rows*dim little-endian doubles.
inline std::string export_embedding_binary(const Embedding& emb) {
    std::string out(kBinaryMagic);
    auto put64 = [&](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    };
    put64(emb.rows);
    put64(emb.dim);
    for (double x : emb.input) put64(std::bit_cast<std::uint64_t>(x));
    return out;
}

inline Embedding import_embedding_binary(std::string_view bytes) {
    if (bytes.size() < 24 || bytes.substr(0, 8) != kBinaryMagic) throw ParseError(0, "missing CDNREMB1 magic");
    std::size_t pos = 8;
    auto get64 = [&] {
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return x;
    };
    Embedding e;
    e.rows = get64();
    e.dim = get64();
    if (bytes.size() != 24 + 8 * e.rows * e.dim) throw ParseError(0, "binary embedding size mismatch");
    e.input.resize(e.rows * e.dim);
    for (auto& x : e.input) x = std::bit_cast<double>(get64());
    e.context.assign(e.input.size(), 0.0);
    e.visit_counts.assign(e.rows, 0);
    return e;
}

}  // namespace cdnr
