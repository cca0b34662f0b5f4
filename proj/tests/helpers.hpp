#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/rng.hpp"

namespace testing_util {

inline ivikit::LabelVector labels(std::vector<int> v) { return ivikit::LabelVector{std::move(v)}; }

/// All-metric design matrix named x0, x1, ...
inline ivikit::DesignMatrix metric_matrix(const Eigen::MatrixXd& values) {
    ivikit::DesignMatrix m;
    m.values = values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const auto name = "x" + std::to_string(j);
        m.columns.push_back({static_cast<std::size_t>(j), name, ivikit::FeatureKind::metric, std::nullopt});
        m.stats.push_back(std::nullopt);
    }
    return m;
}

inline Eigen::MatrixXd random_matrix(ivikit::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

/// Random labels guaranteed to contain both classes.
inline ivikit::LabelVector random_labels(ivikit::Rng& rng, std::size_t n) {
    ivikit::LabelVector y;
    for (std::size_t i = 0; i < n; ++i) y.values.push_back(rng.below(2) ? 1 : -1);
    y.values[0] = 1;
    y.values[1] = -1;
    return y;
}

}  // namespace testing_util
