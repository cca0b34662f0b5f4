#pragma once

// Logistic regression, linear SVM, k-nearest neighbors and a Gini decision
// tree behind one scoring interface.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/estimators.hpp"

namespace ivikit {

enum class ClassifierKind { logistic, decision_tree, linear_svm, knn };

inline constexpr ClassifierKind kAllClassifiers[] = {ClassifierKind::logistic, ClassifierKind::decision_tree, ClassifierKind::linear_svm,
                                                     ClassifierKind::knn};

inline std::string_view to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::logistic: return "logistic";
        case ClassifierKind::decision_tree: return "decision-tree";
        case ClassifierKind::linear_svm: return "linear-svm";
        case ClassifierKind::knn: return "knn";
    }
    return "?";
}

/// Short tag used in comparison table headers.
inline std::string_view short_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::logistic: return "lr";
        case ClassifierKind::decision_tree: return "dt";
        case ClassifierKind::linear_svm: return "svm";
        case ClassifierKind::knn: return "knn";
    }
    return "?";
}

struct ClassifierParams {
    LogisticConfig logistic;
    double svm_c = 1.0;
    std::size_t svm_iterations = 1000;
    std::size_t knn_k = 5;
    std::size_t tree_max_depth = 6;
    std::size_t tree_min_leaf = 3;
};

// ---------------------------------------------------------------------------

class LinearScorer {
public:
    LinearScorer(Eigen::VectorXd w, double b, bool probabilistic) : w_(std::move(w)), b_(b), probabilistic_(probabilistic) {}

    Eigen::VectorXd scores(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd z = (x * w_).array() + b_;
        if (probabilistic_) z = z.unaryExpr([](double v) { return detail::sigmoid(v); });
        return z;
    }
    double threshold() const { return probabilistic_ ? 0.5 : 0.0; }
    const Eigen::VectorXd& weights() const { return w_; }
    double bias() const { return b_; }

private:
    Eigen::VectorXd w_;
    double b_;
    bool probabilistic_;
};

/// Full-batch Pegasos on  lambda/2 |w|^2 + (1/L) sum hinge(y (w.x + b)),
/// lambda = 1 / (C L), with the bias as an extra (regularized) input fixed at 1.
/// Step 1/(lambda t), projection onto the ball of radius 1/sqrt(lambda); the
/// iterate with the lowest objective is returned.
inline LinearScorer fit_linear_svm(const Eigen::MatrixXd& x, const LabelVector& y, double c, std::size_t iterations) {
    if (!(c > 0.0)) throw InvalidArgument("linear svm: C must be positive");
    const auto rows = x.rows();
    Eigen::MatrixXd xa(rows, x.cols() + 1);
    xa << x, Eigen::VectorXd::Ones(rows);
    const Eigen::VectorXd yv = y.as_vector();
    const double lambda = 1.0 / (c * static_cast<double>(rows));
    const double radius = 1.0 / std::sqrt(lambda);

    auto objective = [&](const Eigen::VectorXd& w) {
        const Eigen::ArrayXd margins = yv.array() * (xa * w).array();
        return 0.5 * lambda * w.squaredNorm() + (1.0 - margins).max(0.0).sum() / static_cast<double>(rows);
    };
    Eigen::VectorXd w = Eigen::VectorXd::Zero(xa.cols());
    Eigen::VectorXd best = w;
    double best_obj = objective(w);
    for (std::size_t t = 1; t <= iterations; ++t) {
        const Eigen::ArrayXd margins = yv.array() * (xa * w).array();
        Eigen::VectorXd sub = Eigen::VectorXd::Zero(xa.cols());
        for (Eigen::Index i = 0; i < rows; ++i)
            if (margins[i] < 1.0) sub += yv[i] * xa.row(i).transpose();
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        w = (1.0 - eta * lambda) * w + (eta / static_cast<double>(rows)) * sub;
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
        const double obj = objective(w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
    }
    return LinearScorer(best.head(x.cols()), best[x.cols()], false);
}

/// Euclidean k-nearest neighbors; the score is the fraction of positive
/// neighbors. Distance ties go to the lower training index.
class KnnModel {
public:
    KnnModel(Eigen::MatrixXd x, LabelVector y, std::size_t k) : x_(std::move(x)), y_(std::move(y)), k_(k) {
        if (k_ < 1 || k_ > y_.size()) throw InvalidArgument("knn: K must lie in [1, training rows]");
    }

    /// Training indices of the `count` nearest rows to `query`, nearest first.
    std::vector<std::size_t> neighbors(const Eigen::RowVectorXd& query, std::size_t count) const {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(y_.size());
        for (Eigen::Index r = 0; r < x_.rows(); ++r) d.emplace_back((x_.row(r) - query).squaredNorm(), static_cast<std::size_t>(r));
        count = std::min(count, d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(count), d.end());
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < count; ++i) out.push_back(d[i].second);
        return out;
    }

    Eigen::VectorXd scores(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd s(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto nn = neighbors(x.row(i), k_);
            std::size_t pos = 0;
            for (auto r : nn) pos += y_[r] > 0;
            s[i] = static_cast<double>(pos) / static_cast<double>(nn.size());
        }
        return s;
    }
    double threshold() const { return 0.5; }
    std::size_t k() const { return k_; }
    const LabelVector& labels() const { return y_; }

private:
    Eigen::MatrixXd x_;
    LabelVector y_;
    std::size_t k_;
};

/// CART-style binary tree: axis-aligned splits at midpoints between
/// consecutive distinct values, chosen by weighted Gini impurity; ties go to
/// the lower feature and then the lower threshold. A node becomes a leaf when
/// it is pure, at max depth, or no split leaves min_leaf rows on both sides.
/// Leaves score the fraction of positive rows.
class DecisionTree {
public:
    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0.0;
        int left = -1;   // value <= threshold
        int right = -1;  // value > threshold
        double score = 0.5;
    };

    DecisionTree(const Eigen::MatrixXd& x, const LabelVector& y, std::size_t max_depth, std::size_t min_leaf) {
        if (min_leaf < 1) throw InvalidArgument("decision tree: min_leaf must be >= 1");
        std::vector<std::size_t> rows(y.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        build(x, y, rows, 0, max_depth, min_leaf);
    }

    Eigen::VectorXd scores(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd s(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            int node = 0;
            while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& n = nodes_[static_cast<std::size_t>(node)];
                node = x(i, n.feature) <= n.threshold ? n.left : n.right;
            }
            s[i] = nodes_[static_cast<std::size_t>(node)].score;
        }
        return s;
    }
    double threshold() const { return 0.5; }
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    int build(const Eigen::MatrixXd& x, const LabelVector& y, std::vector<std::size_t>& rows, std::size_t depth, std::size_t max_depth,
              std::size_t min_leaf) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        std::size_t pos = 0;
        for (auto r : rows) pos += y[r] > 0;
        const double n = static_cast<double>(rows.size());
        nodes_[static_cast<std::size_t>(id)].score = static_cast<double>(pos) / n;
        if (pos == 0 || pos == rows.size() || depth >= max_depth || rows.size() < 2 * min_leaf) return id;

        auto gini = [](double p, double total) { return total > 0 ? 2.0 * (p / total) * (1.0 - p / total) : 0.0; };
        const double parent = gini(static_cast<double>(pos), n);
        double best_impurity = parent;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> values(rows.size());
        for (Eigen::Index f = 0; f < x.cols(); ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i) values[i] = {x(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]] > 0 ? 1 : 0};
            std::sort(values.begin(), values.end());
            double left_pos = 0.0;
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                left_pos += values[i].second;
                if (values[i].first == values[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1), nr = n - nl;
                if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) continue;
                const double impurity = (nl * gini(left_pos, nl) + nr * gini(static_cast<double>(pos) - left_pos, nr)) / n;
                if (impurity < best_impurity - 1e-12) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (values[i].first + values[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return id;
        std::vector<std::size_t> left, right;
        for (auto r : rows) (x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
        nodes_[static_cast<std::size_t>(id)].feature = best_feature;
        nodes_[static_cast<std::size_t>(id)].threshold = best_threshold;
        const int l = build(x, y, left, depth + 1, max_depth, min_leaf);
        const int r = build(x, y, right, depth + 1, max_depth, min_leaf);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::vector<Node> nodes_;
};

/// A fitted model of any kind.
class FittedClassifier {
public:
    using Model = std::variant<LinearScorer, KnnModel, DecisionTree>;

    FittedClassifier(ClassifierKind kind, Model model) : kind_(kind), model_(std::move(model)) {}

    ClassifierKind kind() const { return kind_; }
    Eigen::VectorXd scores(const Eigen::MatrixXd& x) const {
        return std::visit([&](const auto& m) { return m.scores(x); }, model_);
    }
    double threshold() const {
        return std::visit([](const auto& m) { return m.threshold(); }, model_);
    }
    const Model& model() const { return model_; }

private:
    ClassifierKind kind_;
    Model model_;
};

/// Fits one classifier with fixed hyperparameters.
inline FittedClassifier train_classifier(ClassifierKind kind, const Eigen::MatrixXd& x, const LabelVector& y, const ClassifierParams& p) {
    y.require_both_classes("train_classifier");
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("train_classifier: label count mismatch");
    switch (kind) {
        case ClassifierKind::logistic: {
            const auto m = logistic_weights(x, y, p.logistic);
            return {kind, LinearScorer(m.weights, m.bias, true)};
        }
        case ClassifierKind::linear_svm: return {kind, fit_linear_svm(x, y, p.svm_c, p.svm_iterations)};
        case ClassifierKind::knn: return {kind, KnnModel(x, y, p.knn_k)};
        case ClassifierKind::decision_tree: return {kind, DecisionTree(x, y, p.tree_max_depth, p.tree_min_leaf)};
    }
    throw InvalidArgument("unknown classifier");
}

}  // namespace ivikit
