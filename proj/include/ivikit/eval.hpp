#pragma once

// Hyperparameter selection by stratified k-fold AUC, feature-subset
// comparison tables and scoring of the latent-code pipeline.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ivikit/autoencoder.hpp"
#include "ivikit/classifiers.hpp"
#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/metrics.hpp"
#include "ivikit/rng.hpp"

namespace ivikit {

struct CvConfig {
    std::size_t folds = 5;
    std::vector<double> svm_c_grid{1, 10, 100, 1000};
    std::vector<std::size_t> knn_k_grid{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::uint64_t seed = 0;
    ClassifierParams base;  // fixed hyperparameters for the non-searched knobs
};

struct CvPoint {
    double value = 0.0;
    double mean_auc = 0.0;
    std::size_t folds_used = 0;
};

struct ClassifierFit {
    FittedClassifier model;
    ClassifierParams chosen;
    std::vector<CvPoint> cv_trace;
    std::vector<std::string> warnings;
};

/// Stratified fold ids: within each class (-1 first, then +1) the row indices
/// are shuffled with one Rng(seed) stream and dealt to folds 0, 1, ..., k-1 in turn.
inline std::vector<std::size_t> stratified_folds(const LabelVector& y, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("cross validation: need at least 2 folds");
    std::vector<std::size_t> fold(y.size(), 0);
    Rng rng(seed);
    for (int cls : {-1, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == cls) members.push_back(i);
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = i % folds;
    }
    return fold;
}

namespace detail {

struct FoldData {
    Eigen::MatrixXd x_train, x_valid;
    LabelVector y_train, y_valid;
};

inline std::vector<FoldData> make_folds(const Eigen::MatrixXd& x, const LabelVector& y, const CvConfig& cv, std::vector<std::string>& warnings) {
    const auto fold_of = stratified_folds(y, cv.folds, cv.seed);
    std::vector<FoldData> out;
    for (std::size_t f = 0; f < cv.folds; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == f ? va : tr).push_back(i);
        FoldData d;
        d.y_train = y.subset(tr);
        d.y_valid = y.subset(va);
        if (!d.y_train.has_both_classes() || !d.y_valid.has_both_classes()) {
            warnings.push_back("fold " + std::to_string(f + 1) + " skipped: single class");
            continue;
        }
        d.x_train.resize(static_cast<Eigen::Index>(tr.size()), x.cols());
        d.x_valid.resize(static_cast<Eigen::Index>(va.size()), x.cols());
        for (std::size_t i = 0; i < tr.size(); ++i) d.x_train.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(tr[i]));
        for (std::size_t i = 0; i < va.size(); ++i) d.x_valid.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(va[i]));
        out.push_back(std::move(d));
    }
    if (out.empty()) throw DataError("cross validation: every fold has a single class");
    return out;
}

/// Index of the best mean AUC; the first (smallest grid value) wins ties.
inline std::size_t best_point(const std::vector<CvPoint>& trace) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].mean_auc > trace[best].mean_auc) best = i;
    return best;
}

}  // namespace detail

/// Fits `kind` on the training data. The SVM's C and the KNN's K are chosen by
/// mean validation AUC over stratified folds (grids sorted ascending so ties
/// resolve to the smallest value); logistic regression and the tree use the
/// fixed parameters in cv.base.
inline ClassifierFit fit_classifier(ClassifierKind kind, const Eigen::MatrixXd& x, const LabelVector& y, const CvConfig& cv = {}) {
    y.require_both_classes("fit_classifier");
    ClassifierParams params = cv.base;
    std::vector<CvPoint> trace;
    std::vector<std::string> warnings;

    if (kind == ClassifierKind::linear_svm) {
        if (cv.svm_c_grid.empty()) throw InvalidArgument("fit_classifier: empty C grid");
        auto grid = cv.svm_c_grid;
        std::sort(grid.begin(), grid.end());
        const auto folds = detail::make_folds(x, y, cv, warnings);
        for (double c : grid) {
            CvPoint pt{c, 0.0, 0};
            for (const auto& f : folds) {
                const auto m = fit_linear_svm(f.x_train, f.y_train, c, params.svm_iterations);
                pt.mean_auc += auc(m.scores(f.x_valid), f.y_valid);
                ++pt.folds_used;
            }
            pt.mean_auc /= static_cast<double>(pt.folds_used);
            trace.push_back(pt);
        }
        params.svm_c = trace[detail::best_point(trace)].value;
    } else if (kind == ClassifierKind::knn) {
        if (cv.knn_k_grid.empty()) throw InvalidArgument("fit_classifier: empty K grid");
        auto grid = cv.knn_k_grid;
        std::sort(grid.begin(), grid.end());
        const auto folds = detail::make_folds(x, y, cv, warnings);
        for (auto k : grid) trace.push_back({static_cast<double>(k), 0.0, 0});
        for (const auto& f : folds) {
            const std::size_t max_k = std::min(grid.back(), f.y_train.size());
            const KnnModel model(f.x_train, f.y_train, max_k);
            std::vector<std::vector<std::size_t>> nn;
            for (Eigen::Index i = 0; i < f.x_valid.rows(); ++i) nn.push_back(model.neighbors(f.x_valid.row(i), max_k));
            for (std::size_t g = 0; g < grid.size(); ++g) {
                if (grid[g] > max_k) continue;
                Eigen::VectorXd s(f.x_valid.rows());
                for (Eigen::Index i = 0; i < f.x_valid.rows(); ++i) {
                    std::size_t pos = 0;
                    for (std::size_t q = 0; q < grid[g]; ++q) pos += f.y_train[nn[static_cast<std::size_t>(i)][q]] > 0;
                    s[i] = static_cast<double>(pos) / static_cast<double>(grid[g]);
                }
                trace[g].mean_auc += auc(s, f.y_valid);
                ++trace[g].folds_used;
            }
        }
        for (auto& pt : trace) pt.mean_auc = pt.folds_used ? pt.mean_auc / static_cast<double>(pt.folds_used) : -1.0;
        params.knn_k = static_cast<std::size_t>(trace[detail::best_point(trace)].value);
    }
    return {train_classifier(kind, x, y, params), params, std::move(trace), std::move(warnings)};
}

// ---------------------------------------------------------------------------

struct FeatureSet {
    std::string label;
    std::vector<std::size_t> columns;
};

struct ComparisonRow {
    std::string label;
    std::size_t n_features = 0;
    std::vector<std::optional<Metrics>> results;  // per classifier in kAllClassifiers order; empty when not applicable
    std::vector<ClassifierParams> chosen;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    SplitIndices split;
};

struct SplitConfig {
    double test_fraction = 0.3;
    std::uint64_t seed = 0;
};

/// Fits every classifier on every feature subset using one shared stratified
/// split. Metric columns are standardized with training-split statistics.
inline ComparisonTable compare_feature_sets(const std::vector<FeatureSet>& sets, const DesignMatrix& x, const LabelVector& y,
                                            const SplitConfig& split_cfg = {}, const CvConfig& cv = {}) {
    ComparisonTable table;
    const auto split = train_test_split(x, y, split_cfg.test_fraction, split_cfg.seed);
    table.split = split.indices;
    const DesignMatrix train = standardize(split.train.x);
    const DesignMatrix test = standardize(split.test.x, train.stats);
    for (const auto& set : sets) {
        ComparisonRow row;
        row.label = set.label;
        row.n_features = set.columns.size();
        if (set.columns.empty()) {
            row.results.assign(std::size(kAllClassifiers), std::nullopt);
            table.rows.push_back(std::move(row));
            continue;
        }
        const auto xtr = train.select_columns(set.columns).values;
        const auto xte = test.select_columns(set.columns).values;
        for (auto kind : kAllClassifiers) {
            const auto fit = fit_classifier(kind, xtr, split.train.y, cv);
            row.results.push_back(compute_metrics(fit.model.scores(xte), split.test.y, fit.model.threshold()));
            row.chosen.push_back(fit.chosen);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// CSV with columns label,num_var,auc_lr,auc_dt,auc_svm,auc_knn,acc_lr,acc_dt,acc_svm,acc_knn.
/// Not-applicable cells are "NA".
inline std::string format_comparison_csv(const ComparisonTable& table) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << "label,num_var";
    for (auto k : kAllClassifiers) out << ",auc_" << short_name(k);
    for (auto k : kAllClassifiers) out << ",acc_" << short_name(k);
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.label << ',' << row.n_features;
        for (const auto& r : row.results) {
            if (r) out << ',' << r->auc;
            else out << ",NA";
        }
        for (const auto& r : row.results) {
            if (r) out << ',' << r->accuracy;
            else out << ",NA";
        }
        out << '\n';
    }
    return out.str();
}

/// Encodes the rows, scores them with the head and thresholds at 0.5.
inline Metrics evaluate_latent_pipeline(const ShallowAutoencoder& model, const ClassifierHead& head, const Eigen::MatrixXd& x_test,
                                        const LabelVector& y_test) {
    if (head.weights.size() != model.latent_dim()) throw InvalidArgument("evaluate_latent_pipeline: head size does not match latent size");
    return compute_metrics(head_scores(model, head, x_test), y_test, 0.5);
}

struct LatentPipelineConfig {
    std::size_t latent_dim = 3;
    TrainConfig autoencoder;  // seed is overridden
    std::size_t head_epochs = 200;
    std::size_t fine_tune_epochs = 200;
    double test_fraction = 0.3;
    bool fine_tune = true;
    std::uint64_t seed = 0;  // split, autoencoder, head and fine-tune use derive_seed(seed, 0..3)
};

struct LatentPipelineResult {
    SplitIndices split;
    DesignMatrix standardized;  // all rows, scaled with training statistics
    AutoencoderFit autoencoder;
    HeadFit head;
    std::optional<FineTuneFit> tuned;
    Metrics frozen_test;
    std::optional<Metrics> tuned_test;
};

/// Stratified split, autoencoder on the training rows, logistic head on the
/// frozen codes and (optionally) joint fine tuning; both heads scored on the
/// test rows.
inline LatentPipelineResult run_latent_pipeline(const DesignMatrix& x, const LabelVector& y, const LatentPipelineConfig& cfg) {
    LatentPipelineResult out;
    const auto split = train_test_split(x, y, cfg.test_fraction, derive_seed(cfg.seed, 0));
    out.split = split.indices;
    const auto train = standardize(split.train.x);
    out.standardized = standardize(x, train.stats);
    const Eigen::MatrixXd test_x = out.standardized.select_rows(split.indices.test).values;

    TrainConfig ae_cfg = cfg.autoencoder;
    ae_cfg.batch_size = std::min(ae_cfg.batch_size, train.rows());
    ae_cfg.seed = derive_seed(cfg.seed, 1);
    out.autoencoder = train_autoencoder(train.values, static_cast<Eigen::Index>(cfg.latent_dim), ae_cfg);

    TrainConfig head_cfg = ae_cfg;
    head_cfg.epochs = cfg.head_epochs;
    head_cfg.seed = derive_seed(cfg.seed, 2);
    head_cfg.loss_floor.reset();
    out.head = train_head_frozen(out.autoencoder.model, train.values, split.train.y, head_cfg);
    out.frozen_test = evaluate_latent_pipeline(out.autoencoder.model, out.head.head, test_x, split.test.y);

    if (cfg.fine_tune) {
        TrainConfig ft_cfg = head_cfg;
        ft_cfg.epochs = cfg.fine_tune_epochs;
        ft_cfg.seed = derive_seed(cfg.seed, 3);
        out.tuned = fine_tune(out.autoencoder.model, out.head.head, train.values, split.train.y, ft_cfg);
        out.tuned_test = evaluate_latent_pipeline(out.tuned->model, out.tuned->head, test_x, split.test.y);
    }
    return out;
}

}  // namespace ivikit
