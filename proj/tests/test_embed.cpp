#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cdnr/embed.hpp"
#include "cdnr/synth.hpp"

using namespace cdnr;

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    return ab / std::sqrt(aa * bb);
}

WalkSet clique_walks(std::uint64_t seed) {
    auto g = synth::planted_partition(20, 2, 1.0, 0.0, seed).graph;
    WalkConfig wc;
    wc.walks_per_node = 10;
    wc.walk_length = 20;
    wc.seed = seed;
    return generate_walks(g, wc);
}

Embedding random_embedding(std::size_t rows, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 0.7);
    Embedding e;
    e.rows = rows;
    e.dim = d;
    e.input.resize(rows * d);
    e.context.resize(rows * d);
    for (auto& x : e.input) x = n(rng);
    for (auto& x : e.context) x = n(rng);
    return e;
}

}  // namespace

TEST(TrainConfigCheck, RejectsInvalid) {
    TrainConfig c;
    c.dimension = 0;
    EXPECT_THROW(c.validate(), ValueError);
    c = {};
    c.window = 0;
    EXPECT_THROW(c.validate(), ValueError);
    c = {};
    c.negatives = 0;
    EXPECT_THROW(c.validate(), ValueError);
    c = {};
    c.initial_learning_rate = 0;
    EXPECT_THROW(c.validate(), ValueError);
}

TEST(Train, ZeroEpochsIsInitialization) {
    auto ws = clique_walks(1);
    TrainConfig cfg;
    cfg.dimension = 8;
    cfg.epochs = 0;
    cfg.seed = 3;
    auto e = train(ws, cfg);
    auto init = initialize_embedding(20, cfg);
    EXPECT_EQ(e.input, init.input);
    for (double x : e.context) EXPECT_EQ(x, 0.0);
    for (double x : e.input) {
        EXPECT_GT(x, -0.5 / 8);
        EXPECT_LT(x, 0.5 / 8);
    }
}

TEST(Train, EmptyWalksRejected) { EXPECT_THROW(train(WalkSet{}, TrainConfig{}), ValueError); }

TEST(Train, CliquesSeparate) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainConfig cfg;
        cfg.dimension = 16;
        cfg.epochs = 3;
        cfg.seed = seed;
        auto e = train(clique_walks(seed), cfg);
        double intra = 0, inter = 0;
        int ni = 0, nx = 0;
        for (NodeId u = 0; u < 20; ++u)
            for (NodeId v = u + 1; v < 20; ++v) {
                double c = cosine(e.vector(u), e.vector(v));
                if (u / 10 == v / 10) {
                    intra += c;
                    ++ni;
                } else {
                    inter += c;
                    ++nx;
                }
            }
        EXPECT_GT(intra / ni, inter / nx) << "seed " << seed;
    }
}

// Epoch losses are online averages taken before each update. On this fixture
// the objective flattens after two epochs, and the shrinking learning rate
// then lets the online average creep up slightly, so only a bounded rise is
// asserted after the first drop.
TEST(Train, EpochLossSettles) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainConfig cfg;
        cfg.dimension = 16;
        cfg.epochs = 6;
        cfg.seed = seed;
        auto e = train(clique_walks(seed), cfg);
        const auto& l = e.epoch_losses;
        ASSERT_EQ(l.size(), 6u);
        EXPECT_LT(l[0], 6 * std::log(2.0));
        EXPECT_LT(l[1], l[0]) << "seed " << seed;
        double best = *std::min_element(l.begin(), l.end());
        for (std::size_t i = 1; i < l.size(); ++i) EXPECT_LT(l[i], best * 1.05) << "seed " << seed << " epoch " << i;
    }
}

TEST(Train, DeterministicBitIdentical) {
    auto ws = clique_walks(4);
    TrainConfig cfg;
    cfg.dimension = 12;
    cfg.epochs = 2;
    cfg.seed = 8;
    auto a = train(ws, cfg), b = train(ws, cfg);
    EXPECT_EQ(a.input, b.input);
    EXPECT_EQ(a.context, b.context);
    EXPECT_EQ(export_embedding_binary(a), export_embedding_binary(b));
    cfg.seed = 9;
    EXPECT_NE(train(ws, cfg).input, a.input);
}

TEST(Train, ParallelModeSeparatesAndStaysFinite) {
    auto ws = clique_walks(2);
    TrainConfig cfg;
    cfg.dimension = 16;
    cfg.epochs = 3;
    cfg.deterministic = false;
    cfg.workers = 3;
    auto e = train(ws, cfg);
    EXPECT_TRUE(e.all_finite());
    double intra = cosine(e.vector(0), e.vector(1)) + cosine(e.vector(10), e.vector(11));
    double inter = cosine(e.vector(0), e.vector(10)) + cosine(e.vector(1), e.vector(11));
    EXPECT_GT(intra, inter);
}

TEST(Train, IsolatedRowsKeepInitialization) {
    auto g = Graph::from_edges(5, {{0, 1, 1.0}, {1, 2, 1.0}}, false);
    WalkConfig wc;
    wc.walks_per_node = 5;
    wc.walk_length = 10;
    auto ws = generate_walks(g, wc);
    TrainConfig cfg;
    cfg.dimension = 4;
    cfg.epochs = 2;
    auto e = train(ws, cfg);
    auto init = initialize_embedding(5, cfg);
    ASSERT_EQ(e.rows, 5u);
    for (std::size_t r : {3u, 4u})
        for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(e.vector(r)[k], init.vector(r)[k]);
    EXPECT_NE(e.vector(0)[0], init.vector(0)[0]);
    EXPECT_EQ(e.visit_counts[3], 1u);
}

TEST(Train, NodeCountPadsRows) {
    auto ws = clique_walks(1);
    TrainConfig cfg;
    cfg.dimension = 4;
    cfg.epochs = 1;
    EXPECT_EQ(train(ws, cfg, 25).rows, 25u);
}

TEST(LossGradient, ZeroVectors) {
    Embedding e;
    e.rows = 4;
    e.dim = 3;
    e.input.assign(12, 0.0);
    e.context.assign(12, 0.0);
    SkipGramSample s{0, 1, {2, 3, 2, 1, 3}};
    auto r = loss_and_gradient(s, e);
    EXPECT_NEAR(r.loss, 6 * std::log(2.0), 1e-15);
    for (double g : r.center_grad) EXPECT_EQ(g, 0.0);
    for (const auto& [row, g] : r.context_grads)
        for (double x : g) EXPECT_EQ(x, 0.0);
}

TEST(LossGradient, MatchesFiniteDifferences) {
    std::mt19937_64 rng(31);
    const double h = 1e-5;
    for (int it = 0; it < 20; ++it) {
        auto e = random_embedding(6, 8, rng);
        SkipGramSample s{static_cast<NodeId>(rng() % 6), static_cast<NodeId>(rng() % 6), {}};
        for (int k = 0; k < 5; ++k) s.negatives.push_back(static_cast<NodeId>(rng() % 6));
        auto r = loss_and_gradient(s, e);

        std::vector<double> analytic, numeric;
        auto probe = [&](std::vector<double>& mat, std::size_t idx, double grad) {
            double keep = mat[idx];
            mat[idx] = keep + h;
            double up = loss_and_gradient(s, e).loss;
            mat[idx] = keep - h;
            double down = loss_and_gradient(s, e).loss;
            mat[idx] = keep;
            analytic.push_back(grad);
            numeric.push_back((up - down) / (2 * h));
        };
        for (std::size_t k = 0; k < 8; ++k) probe(e.input, s.center * 8 + k, r.center_grad[k]);
        for (const auto& [row, g] : r.context_grads)
            for (std::size_t k = 0; k < 8; ++k) probe(e.context, row * 8 + k, g[k]);
        double diff = 0, norm = 0;
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
            norm += numeric[i] * numeric[i];
        }
        EXPECT_LT(std::sqrt(diff / std::max(norm, 1e-300)), 1e-4);
    }
}

TEST(LossGradient, SignFlipInvariant) {
    std::mt19937_64 rng(5);
    auto e = random_embedding(5, 6, rng);
    SkipGramSample s{0, 1, {2, 3, 4}};
    double before = loss_and_gradient(s, e).loss;
    for (auto& x : e.input) x = -x;
    for (auto& x : e.context) x = -x;
    EXPECT_NEAR(loss_and_gradient(s, e).loss, before, 1e-12);
}

TEST(LogSigmoid, StableAtExtremes) {
    EXPECT_NEAR(log_sigmoid(0.0), -std::log(2.0), 1e-15);
    EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
    EXPECT_NEAR(log_sigmoid(800.0), 0.0, 1e-15);
    EXPECT_NEAR(sigmoid(3.0) + sigmoid(-3.0), 1.0, 1e-15);
}

TEST(AliasTableSampling, MatchesWeights) {
    std::vector<double> w{0.0, 1.0, 2.0, 7.0, 0.5};
    AliasTable t(w);
    Rng rng(3);
    std::vector<double> freq(w.size(), 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) freq[t(rng)] += 1.0 / n;
    EXPECT_EQ(freq[0], 0.0);
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_NEAR(freq[i], w[i] / 10.5, 0.005);
    EXPECT_THROW(AliasTable(std::vector<double>{0.0, 0.0}), ValueError);
}

TEST(Export, TwoNodeFormat) {
    Embedding e;
    e.rows = 2;
    e.dim = 2;
    e.input = {0.5, -1.25, 3.0, 1e-300};
    auto ids = load_edge_list("x y\n").ids();
    auto text = export_embedding(e, ids);
    EXPECT_EQ(text, "2 2\nx 0.5 -1.25\ny 3 1e-300\n");
}

TEST(Export, TextRoundTripBitIdentical) {
    auto ws = clique_walks(3);
    TrainConfig cfg;
    cfg.dimension = 10;
    cfg.epochs = 1;
    auto e = train(ws, cfg);
    IdMap ids = IdMap::identity(e.rows);
    auto back = import_embedding(export_embedding(e, ids));
    EXPECT_EQ(back.embedding.rows, e.rows);
    EXPECT_EQ(back.embedding.dim, e.dim);
    EXPECT_EQ(back.embedding.input, e.input);
    EXPECT_EQ(back.ids.name(7), "7");
    EXPECT_EQ(export_embedding(back.embedding, back.ids), export_embedding(e, ids));
}

TEST(Export, BinaryRoundTrip) {
    std::mt19937_64 rng(2);
    auto e = random_embedding(7, 5, rng);
    auto bytes = export_embedding_binary(e);
    EXPECT_EQ(bytes.substr(0, 8), "CDNREMB1");
    EXPECT_EQ(bytes.size(), 24u + 8u * 35u);
    auto back = import_embedding_binary(bytes);
    EXPECT_EQ(back.input, e.input);
    EXPECT_THROW(import_embedding_binary(bytes.substr(0, bytes.size() - 1)), ParseError);
    EXPECT_THROW(import_embedding_binary("XXXXXXXX" + bytes.substr(8)), ParseError);
}

TEST(Export, ImportRejectsMalformed) {
    EXPECT_THROW(import_embedding(""), ParseError);
    EXPECT_THROW(import_embedding("2 2\na 1 2\n"), ParseError);
    EXPECT_THROW(import_embedding("1 2\na 1\n"), ParseError);
}
