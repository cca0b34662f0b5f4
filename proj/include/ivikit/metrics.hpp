#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"

namespace ivikit {

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (positive, negative) pairs in which the positive scores higher, with ties
/// counting 1/2. Computed from mid-ranks in O(L log L).
inline double auc(const Eigen::VectorXd& scores, const LabelVector& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size()) throw InvalidArgument("auc: size mismatch");
    labels.require_both_classes("auc");
    const auto n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)];
    });
    // twice the rank sum of positives, kept integral so the result is exact
    long long twice_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[static_cast<Eigen::Index>(order[j + 1])] == scores[static_cast<Eigen::Index>(order[i])]) ++j;
        const long long twice_mid_rank = static_cast<long long>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] > 0) twice_rank_sum += twice_mid_rank;
        i = j + 1;
    }
    const auto pos = static_cast<long long>(labels.count(1));
    const auto neg = static_cast<long long>(n) - pos;
    // U = R - pos (pos + 1) / 2 ; 2U counts ties as 1 and wins as 2
    const long long twice_u = twice_rank_sum - pos * (pos + 1);
    return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

struct Metrics {
    double accuracy = 0.0;
    double auc = 0.5;
    std::size_t true_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_positive = 0;
    std::size_t false_negative = 0;

    std::size_t total() const { return true_positive + true_negative + false_positive + false_negative; }
    double error_rate() const { return static_cast<double>(false_positive + false_negative) / static_cast<double>(total()); }
};

/// Predicts +1 when score >= threshold.
inline Metrics compute_metrics(const Eigen::VectorXd& scores, const LabelVector& labels, double threshold) {
    Metrics m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = scores[static_cast<Eigen::Index>(i)] >= threshold;
        const bool actual = labels[i] > 0;
        if (predicted && actual) ++m.true_positive;
        else if (predicted) ++m.false_positive;
        else if (actual) ++m.false_negative;
        else ++m.true_negative;
    }
    m.accuracy = static_cast<double>(m.true_positive + m.true_negative) / static_cast<double>(labels.size());
    m.auc = auc(scores, labels);
    return m;
}

}  // namespace ivikit
