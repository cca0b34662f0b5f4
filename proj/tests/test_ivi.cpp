#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "ivikit/ivi.hpp"
#include "ivikit/synthdata.hpp"

using namespace ivikit;
using testing_util::labels;

namespace {

BootstrapWeights fixture(const Eigen::MatrixXd& reps) {
    BootstrapWeights bw;
    bw.replicates = reps;
    return bw;
}

// percentile by counting: smallest value v such that at least ceil(p*B) replicates are <= v
double brute_percentile(std::vector<double> v, double p) {
    const auto need = static_cast<std::size_t>(std::max(1.0, std::ceil(p * static_cast<double>(v.size()) - 1e-9)));
    for (double cand : v) {
        std::size_t below = 0, strictly = 0;
        for (double u : v) {
            below += u <= cand;
            strictly += u < cand;
        }
        if (below >= need && strictly < need) return cand;
    }
    return std::nan("");
}

std::pair<Eigen::MatrixXd, LabelVector> strong_single_feature(std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(200, 3);
    LabelVector y;
    for (Eigen::Index i = 0; i < 200; ++i) {
        const int label = i % 2 ? 1 : -1;
        y.values.push_back(label);
        x(i, 0) = 2.0 * label + rng.normal();
        x(i, 1) = rng.normal();
        x(i, 2) = rng.normal();
    }
    return {x, y};
}

}  // namespace

TEST(Bootstrap, ShapeAndDeterminism) {
    const auto [x, y] = strong_single_feature(1);
    const auto a = bootstrap_weights(x, y, {}, 50, 9);
    const auto b = bootstrap_weights(x, y, {}, 50, 9, 1);
    EXPECT_EQ(a.replicates.rows(), 50);
    EXPECT_EQ(a.replicates.cols(), 3);
    EXPECT_EQ(a.replicates, b.replicates);
    EXPECT_NE(a.replicates, bootstrap_weights(x, y, {}, 50, 10).replicates);
    EXPECT_THROW(bootstrap_weights(x, y, {}, 1, 9), InvalidArgument);
}

TEST(Bootstrap, ReplicateDependsOnlyOnItsIndex) {
    const auto [x, y] = strong_single_feature(2);
    const auto small = bootstrap_weights(x, y, {}, 5, 4);
    const auto large = bootstrap_weights(x, y, {}, 20, 4);
    EXPECT_EQ(small.replicates, large.replicates.topRows(5));
}

TEST(Bootstrap, IdenticalRowsGiveZeroVariance) {
    Eigen::MatrixXd x(6, 2);
    x << 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2;
    const auto y = labels({1, -1, 1, -1, 1, -1});
    const auto bw = bootstrap_weights(x, y, {}, 30, 3);
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_EQ(bw.replicates.col(j).maxCoeff(), bw.replicates.col(j).minCoeff());
    const auto g = redundancy_graph(bw);
    EXPECT_TRUE(g.edges.empty());
    EXPECT_EQ(g.zero_variance, (std::vector<std::size_t>{0, 1}));
}

TEST(Bootstrap, SingleClassIsRejected) {
    EXPECT_THROW(bootstrap_weights(Eigen::MatrixXd::Ones(3, 1), labels({1, 1, 1}), {}, 5, 1), DataError);
}

TEST(Relevance, ConstantAndSymmetricColumns) {
    Eigen::MatrixXd reps(100, 2);
    for (Eigen::Index b = 0; b < 100; ++b) {
        reps(b, 0) = 0.3;
        reps(b, 1) = b % 2 ? 0.3 : -0.3;
    }
    const auto r = relevant_features(fixture(reps));
    EXPECT_EQ(r.features[0].lower, 0.3);
    EXPECT_EQ(r.features[0].upper, 0.3);
    EXPECT_TRUE(r.features[0].relevant);
    EXPECT_FALSE(r.features[1].relevant);
    EXPECT_EQ(r.relevant_indices(), (std::vector<std::size_t>{0}));
}

TEST(Relevance, MatchesBrutePercentile) {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const auto b = static_cast<Eigen::Index>(2 + rng.below(300));
        Eigen::MatrixXd reps = testing_util::random_matrix(rng, b, 4);
        reps.col(1).array() += 2.0;
        reps.col(2) = reps.col(2).unaryExpr([](double v) { return std::round(v * 2) / 2; });  // ties
        const double alpha = trial % 2 ? 0.05 : 0.1;
        const auto r = relevant_features(fixture(reps), alpha);
        for (Eigen::Index n = 0; n < 4; ++n) {
            std::vector<double> col(reps.col(n).data(), reps.col(n).data() + b);
            const double lo = brute_percentile(col, alpha / 2), hi = brute_percentile(col, 1 - alpha / 2);
            ASSERT_EQ(r.features[static_cast<std::size_t>(n)].lower, lo);
            ASSERT_EQ(r.features[static_cast<std::size_t>(n)].upper, hi);
            ASSERT_EQ(r.features[static_cast<std::size_t>(n)].relevant, !(lo <= 0.0 && 0.0 <= hi));
        }
    }
}

TEST(Relevance, NearestRankOnFiveHundred) {
    std::vector<double> v(500);
    for (int i = 0; i < 500; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    EXPECT_EQ(nearest_rank(v, 0.025), 13.0);
    EXPECT_EQ(nearest_rank(v, 0.975), 488.0);
    EXPECT_EQ(nearest_rank(v, 0.0), 1.0);
    EXPECT_EQ(nearest_rank(v, 1.0), 500.0);
}

TEST(Redundancy, DuplicateAndComplementaryColumns) {
    Rng rng(7);
    Eigen::MatrixXd reps(200, 4);
    for (Eigen::Index b = 0; b < 200; ++b) {
        reps(b, 0) = rng.normal();
        reps(b, 1) = reps(b, 0);
        reps(b, 2) = -reps(b, 0) + 0.01 * rng.normal();
        reps(b, 3) = rng.normal();
    }
    const auto g = redundancy_graph(fixture(reps), 0.5);
    ASSERT_NE(g.find(1, 0), nullptr);
    EXPECT_NEAR(g.find(0, 1)->rho, 1.0, 1e-12);
    EXPECT_LT(g.find(2, 0)->rho, -0.99);
    EXPECT_EQ(g.find(0, 3), nullptr);
    for (const auto& e : g.edges) {
        EXPECT_LT(e.m, e.n);
        EXPECT_GT(std::abs(e.rho), 0.5);
    }
}

TEST(Redundancy, IndependentColumnsRarelyLink) {
    Rng rng(8);
    std::size_t edges = 0, pairs = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = redundancy_graph(fixture(testing_util::random_matrix(rng, 500, 10)), 0.5);
        edges += g.edges.size();
        pairs += 45;
    }
    EXPECT_LE(static_cast<double>(edges) / static_cast<double>(pairs), 0.01);
}

TEST(Components, ChainSingletonDiscard) {
    RedundancyGraph g;
    g.nodes = 5;
    g.edges = {{0, 1, 0.9}, {1, 2, -0.8}};
    RelevanceReport r;
    r.features.resize(5);
    r.features[2].relevant = true;
    r.features[3].relevant = true;
    const auto split = informative_components(g, r);
    EXPECT_EQ(split.informative, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(split.components.size(), 3u);
    EXPECT_EQ(split.components[0], (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Components, RemovingRelevanceNeverGrowsInformativeSet) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        RedundancyGraph g;
        g.nodes = 8;
        for (std::size_t m = 0; m < 8; ++m)
            for (std::size_t n = m + 1; n < 8; ++n)
                if (rng.below(6) == 0) g.edges.push_back({m, n, 0.9});
        RelevanceReport r;
        r.features.resize(8);
        for (auto& f : r.features) f.relevant = rng.below(3) == 0;
        const auto before = informative_components(g, r).informative;
        r.features[rng.below(8)].relevant = false;
        const auto after = informative_components(g, r).informative;
        ASSERT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
    }
}

TEST(Importance, HandValues) {
    Eigen::MatrixXd reps(40, 3);
    for (Eigen::Index b = 0; b < 40; ++b) {
        // 20 replicates at each end: nearest-rank CI is exactly [lo, hi], mean the midpoint
        reps(b, 0) = b < 20 ? 0.4 : 0.6;
        reps(b, 1) = b < 20 ? -0.6 : -0.4;
        reps(b, 2) = 0.7;
    }
    const auto ranking = importance_ranking(fixture(reps), {0, 1, 2});
    ASSERT_EQ(ranking.size(), 3u);
    EXPECT_EQ(ranking[0].index, 2u);
    EXPECT_TRUE(ranking[0].degenerate);
    EXPECT_TRUE(std::isinf(ranking[0].score));
    EXPECT_NEAR(ranking[1].score, 12.5, 1e-12);
    EXPECT_NEAR(ranking[2].score, 12.5, 1e-12);
    EXPECT_EQ(ranking[1].index, 0u);
    EXPECT_EQ(ranking[2].index, 1u);
}

TEST(Importance, NearEqualScoresTieByIndex) {
    Eigen::MatrixXd reps(40, 3);
    const double nudge = std::nextafter(0.6, 1.0);
    for (Eigen::Index b = 0; b < 40; ++b) {
        reps(b, 0) = b < 20 ? 0.4 : 0.6;
        reps(b, 1) = b < 20 ? 0.4 : nudge;  // larger score by a few ulps
        reps(b, 2) = b < 20 ? 0.1 : 0.3;
    }
    const auto ranking = importance_ranking(fixture(reps), {2, 1, 0});
    EXPECT_GT(ranking[1].score, 0.0);
    EXPECT_NE(ranking[0].score, ranking[1].score);
    EXPECT_EQ(ranking[0].index, 0u);
    EXPECT_EQ(ranking[1].index, 1u);
    EXPECT_EQ(ranking[2].index, 2u);
    EXPECT_TRUE(scores_tied(1.0, 1.0 + 1e-13));
    EXPECT_FALSE(scores_tied(1.0, 1.0 + 1e-9));
}

TEST(Ivi, SingleStrongFeature) {
    const auto [x, y] = strong_single_feature(3);
    IviConfig cfg;
    cfg.seed = 5;
    const auto res = run_ivi(x, y, cfg);
    ASSERT_EQ(res.informative(), (std::vector<std::size_t>{0}));
    ASSERT_EQ(res.ranking.size(), 1u);
    EXPECT_EQ(res.ranking[0].index, 0u);
    EXPECT_EQ(res.sign[0], 1);
    for (std::size_t i = 0; i < res.relevance.features.size(); ++i) {
        const auto& f = res.relevance.features[i];
        EXPECT_EQ(f.relevant, f.lower > 0 || f.upper < 0);
    }
}

TEST(Ivi, ThreadCountDoesNotChangeResult) {
    const auto data = generate(appendix_preset(4));
    const Eigen::MatrixXd x = standardize(one_hot_encode(data.table)).values;
    IviConfig cfg;
    cfg.b_reps = 100;
    cfg.threads = 1;
    const auto one = run_ivi(x, data.labels, cfg);
    cfg.threads = 4;
    const auto four = run_ivi(x, data.labels, cfg);
    EXPECT_EQ(one.bootstrap.replicates, four.bootstrap.replicates);
    EXPECT_EQ(one.graph.edges, four.graph.edges);
}

TEST(Ivi, RescalingMetricColumnsKeepsResult) {
    const auto data = generate(appendix_preset(6));
    const auto encoded = one_hot_encode(data.table);
    Eigen::MatrixXd x = standardize(encoded).values;
    Eigen::MatrixXd scaled = x;
    for (std::size_t j = 0; j < encoded.cols(); ++j)
        if (encoded.is_metric(j)) scaled.col(static_cast<Eigen::Index>(j)) *= 3.5 + static_cast<double>(j);
    IviConfig cfg;
    cfg.b_reps = 200;
    cfg.seed = 77;
    const auto a = run_ivi(x, data.labels, cfg);
    const auto b = run_ivi(scaled, data.labels, cfg);
    EXPECT_EQ(a.informative(), b.informative());
    ASSERT_EQ(a.ranking.size(), b.ranking.size());
    for (std::size_t i = 0; i < a.ranking.size(); ++i) EXPECT_EQ(a.ranking[i].index, b.ranking[i].index);
    ASSERT_EQ(a.graph.edges.size(), b.graph.edges.size());
    for (std::size_t i = 0; i < a.graph.edges.size(); ++i) {
        EXPECT_EQ(a.graph.edges[i].m, b.graph.edges[i].m);
        EXPECT_EQ(a.graph.edges[i].n, b.graph.edges[i].n);
    }
}

TEST(Probabilistic, LargestDropCutoff) {
    EXPECT_EQ(largest_drop_cutoff({}), 0u);
    EXPECT_EQ(largest_drop_cutoff({5.0}), 1u);
    EXPECT_EQ(largest_drop_cutoff({100, 99, 98, 20, 19}), 3u);
    EXPECT_EQ(largest_drop_cutoff({50, 50, 50}), 3u);
    EXPECT_EQ(largest_drop_cutoff({90, 10, 5}), 1u);
}

TEST(Probabilistic, KeepThreshold) {
    const auto [x, y] = strong_single_feature(9);
    ProbabilisticIviConfig cfg;
    cfg.ivi.b_reps = 50;
    cfg.m_runs = 10;
    cfg.keep_fraction = 0.9;
    cfg.master_seed = 1;
    const auto res = run_probabilistic_ivi(x, y, cfg);
    for (std::size_t f = 0; f < 3; ++f) {
        const bool stable = std::find(res.stable_features.begin(), res.stable_features.end(), f) != res.stable_features.end();
        EXPECT_EQ(stable, res.appearance_count[f] >= 9);
    }
    EXPECT_EQ(res.appearance_count[0], 10u);
    const auto again = run_probabilistic_ivi(x, y, cfg);
    EXPECT_EQ(res.appearance_count, again.appearance_count);
    EXPECT_EQ(res.mean_weight, again.mean_weight);
}

TEST(Probabilistic, StableSetMatchesMajorityOfSingleRuns) {
    const auto data = generate(appendix_preset(2));
    const Eigen::MatrixXd x = standardize(one_hot_encode(data.table)).values;
    ProbabilisticIviConfig cfg;
    cfg.ivi.b_reps = 100;
    cfg.m_runs = 20;
    cfg.master_seed = 3;
    const auto res = run_probabilistic_ivi(x, data.labels, cfg);
    std::vector<std::size_t> votes(9, 0);
    for (std::size_t r = 0; r < cfg.m_runs; ++r) {
        IviConfig single = cfg.ivi;
        single.seed = derive_seed(cfg.master_seed, r);
        for (auto f : run_ivi(x, data.labels, single).informative()) ++votes[f];
    }
    EXPECT_EQ(votes, res.appearance_count);
    for (std::size_t i = 1; i < res.kept_edges.size(); ++i) EXPECT_GE(res.kept_edges[i - 1].abs_sum, res.kept_edges[i].abs_sum);
    EXPECT_EQ(res.kept_edges.size(), res.cutoff);
}
