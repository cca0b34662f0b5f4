#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ivikit/eval.hpp"
#include "ivikit/synthdata.hpp"
#include "oracles.hpp"

using namespace ivikit;
using testing_util::labels;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::pair<Eigen::MatrixXd, LabelVector> separable(std::size_t n) {
    Rng rng(1);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
    LabelVector y;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 ? 1 : -1;
        y.values.push_back(label);
        x(static_cast<Eigen::Index>(i), 0) = label * (1.0 + rng.uniform01());
        x(static_cast<Eigen::Index>(i), 1) = rng.normal();
    }
    return {x, y};
}

}  // namespace

TEST(Auc, HandExamples) {
    EXPECT_EQ(auc(vec({0.9, 0.8, 0.4, 0.3}), labels({1, 1, -1, 1})), 2.0 / 3.0);
    EXPECT_EQ(auc(vec({0.9, 0.8, 0.4, 0.3}), labels({1, 1, -1, -1})), 1.0);
    EXPECT_EQ(auc(vec({0.5, 0.5, 0.5, 0.5}), labels({1, -1, -1, 1})), 0.5);
    EXPECT_THROW(auc(vec({0.1, 0.2}), labels({1, 1})), DataError);
}

TEST(Auc, MatchesPairCountingOracle) {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + rng.below(49);
        const auto y = testing_util::random_labels(rng, n);
        Eigen::VectorXd s(static_cast<Eigen::Index>(n));
        for (auto& v : s) v = static_cast<double>(rng.below(8)) / 4.0;
        std::vector<double> sv(s.data(), s.data() + s.size());
        const double a = auc(s, y);
        ASSERT_EQ(a, oracle::auc(sv, y.values));
        const Eigen::VectorXd t = s.unaryExpr([](double v) { return std::exp(3.0 * v) - 7.0; });
        ASSERT_EQ(auc(t, y), a);
    }
}

TEST(Metrics, ConfusionCounts) {
    const auto m = compute_metrics(vec({0.9, 0.6, 0.4, 0.2, 0.5}), labels({1, -1, 1, -1, 1}), 0.5);
    EXPECT_EQ(m.true_positive, 2u);
    EXPECT_EQ(m.false_positive, 1u);
    EXPECT_EQ(m.false_negative, 1u);
    EXPECT_EQ(m.true_negative, 1u);
    EXPECT_DOUBLE_EQ(m.accuracy + m.error_rate(), 1.0);
}

TEST(Classifiers, SeparableDataFitsPerfectly) {
    const auto [x, y] = separable(60);
    ClassifierParams p;
    p.knn_k = 1;
    p.svm_c = 100;
    for (auto kind : kAllClassifiers) {
        const auto model = train_classifier(kind, x, y, p);
        const auto m = compute_metrics(model.scores(x), y, model.threshold());
        EXPECT_EQ(m.accuracy, 1.0) << to_string(kind);
    }
}

TEST(Classifiers, StumpOnSeparatingFeature) {
    const auto [x, y] = separable(30);
    const DecisionTree tree(x, y, 1, 1);
    EXPECT_EQ(compute_metrics(tree.scores(x), y, 0.5).accuracy, 1.0);
    EXPECT_EQ(tree.nodes().size(), 3u);
    EXPECT_EQ(tree.nodes()[0].feature, 0);
}

TEST(Classifiers, KnnScoresAreNeighborFractions) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 10;
    const KnnModel knn(x, labels({1, -1, 1, -1}), 3);
    Eigen::MatrixXd q(1, 1);
    q << 0.9;
    EXPECT_DOUBLE_EQ(knn.scores(q)[0], 2.0 / 3.0);
    EXPECT_THROW(KnnModel(x, labels({1, -1, 1, -1}), 5), InvalidArgument);
}

TEST(CrossValidation, DefaultGrids) {
    const CvConfig cv;
    EXPECT_EQ(cv.svm_c_grid, (std::vector<double>{1, 10, 100, 1000}));
    ASSERT_EQ(cv.knn_k_grid.size(), 19u);
    for (std::size_t i = 0; i < 19; ++i) EXPECT_EQ(cv.knn_k_grid[i], i + 2);
}

TEST(CrossValidation, FoldsAreStratified) {
    std::vector<int> v(50, 1);
    for (int i = 0; i < 20; ++i) v[static_cast<std::size_t>(i)] = -1;
    const auto y = labels(v);
    const auto fold = stratified_folds(y, 5, 3);
    for (std::size_t f = 0; f < 5; ++f) {
        std::size_t pos = 0, neg = 0;
        for (std::size_t i = 0; i < 50; ++i)
            if (fold[i] == f) (y[i] > 0 ? pos : neg)++;
        EXPECT_EQ(pos, 6u);
        EXPECT_EQ(neg, 4u);
    }
}

TEST(CrossValidation, SelectsFromGridWithTiesToSmallest) {
    const auto [x, y] = separable(60);
    CvConfig cv;
    cv.seed = 4;
    const auto svm = fit_classifier(ClassifierKind::linear_svm, x, y, cv);
    EXPECT_EQ(svm.cv_trace.size(), 4u);
    const auto knn = fit_classifier(ClassifierKind::knn, x, y, cv);
    EXPECT_EQ(knn.cv_trace.size(), 19u);
    for (const auto* fit : {&svm, &knn}) {
        double best = -1;
        double first_best = 0;
        for (const auto& pt : fit->cv_trace)
            if (pt.mean_auc > best) best = pt.mean_auc, first_best = pt.value;
        const double chosen = fit == &svm ? fit->chosen.svm_c : static_cast<double>(fit->chosen.knn_k);
        EXPECT_EQ(chosen, first_best);
    }
}

TEST(Compare, RowsAndDeterminism) {
    const auto data = generate(appendix_preset(1));
    const auto x = one_hot_encode(data.table);
    std::vector<std::size_t> all(9);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::vector<FeatureSet> sets{{"all", all}, {"pair", {0, 1}}, {"pair_again", {0, 1}}, {"empty", {}}};
    const auto table = compare_feature_sets(sets, x, data.labels, {0.3, 5}, {});
    ASSERT_EQ(table.rows.size(), 4u);
    EXPECT_EQ(table.rows[0].n_features, 9u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(table.rows[1].results[k]->auc, table.rows[2].results[k]->auc);
        EXPECT_EQ(table.rows[1].results[k]->accuracy, table.rows[2].results[k]->accuracy);
        EXPECT_FALSE(table.rows[3].results[k].has_value());
    }
    const auto csv = format_comparison_csv(table);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "label,num_var,auc_lr,auc_dt,auc_svm,auc_knn,acc_lr,acc_dt,acc_svm,acc_knn");
    EXPECT_NE(csv.find("empty,0,NA,NA,NA,NA,NA,NA,NA,NA"), std::string::npos);
    EXPECT_EQ(csv, format_comparison_csv(compare_feature_sets(sets, x, data.labels, {0.3, 5}, {})));
}

TEST(LatentPipeline, ConstantHeadIsChance) {
    const auto model = initialize_autoencoder(3, 2, 1);
    Rng rng(5);
    const Eigen::MatrixXd x = testing_util::random_matrix(rng, 30, 3);
    const auto y = testing_util::random_labels(rng, 30);
    EXPECT_EQ(evaluate_latent_pipeline(model, {Eigen::VectorXd::Zero(2), 0.0}, x, y).auc, 0.5);
    EXPECT_THROW(evaluate_latent_pipeline(model, {Eigen::VectorXd::Zero(3), 0.0}, x, y), InvalidArgument);
}
