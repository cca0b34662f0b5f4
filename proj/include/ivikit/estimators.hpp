#pragma once

// Feature-weight estimators: sample covariance/correlation statistics, the
// covariance multiplication estimator (CME), its correlation-matrix form, and
// an L2-regularized logistic regression.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"

namespace ivikit {

struct CovariancePair {
    Eigen::MatrixXd cxx;
    Eigen::VectorXd cxy;
};

struct CorrelationPair {
    Eigen::MatrixXd rxx;
    Eigen::VectorXd rxy;
    std::vector<std::size_t> constant_columns;  // handled by the diag-1 / off-diag-0 convention
};

struct LinearModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;  // infinity norm at the returned iterate
};

struct CmeConfig {
    int exponent_g = 1;
};

struct LogisticConfig {
    double l2 = 1e-2;
    std::size_t max_iterations = 20000;
    double tolerance = 1e-6;
};

enum class Estimator { corr_cme, cme, logistic };

inline std::string_view to_string(Estimator e) {
    switch (e) {
        case Estimator::corr_cme: return "corr-cme";
        case Estimator::cme: return "cme";
        case Estimator::logistic: return "logistic";
    }
    return "?";
}

inline Estimator parse_estimator(std::string_view name) {
    if (name == "corr-cme") return Estimator::corr_cme;
    if (name == "cme") return Estimator::cme;
    if (name == "logistic") return Estimator::logistic;
    throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
}

struct EstimatorConfig {
    Estimator kind = Estimator::corr_cme;
    CmeConfig cme;
    LogisticConfig logistic;
};

namespace detail {

/// Centered scatter matrix of the augmented data [X y] under per-row weights
/// (bootstrap multiplicities). Row/column N is the label.
struct Scatter {
    Eigen::MatrixXd s;
    Eigen::VectorXd mean;
    double n = 0.0;
};

inline Scatter weighted_scatter(const Eigen::MatrixXd& augmented, const Eigen::VectorXd& w) {
    Scatter out;
    out.n = w.sum();
    out.mean = augmented.transpose() * w / out.n;
    const Eigen::MatrixXd centered = augmented.rowwise() - out.mean.transpose();
    out.s = centered.transpose() * (centered.array().colwise() * w.array()).matrix();
    return out;
}

inline Eigen::MatrixXd augment(const Eigen::MatrixXd& x, const LabelVector& y) {
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("label count does not match row count");
    Eigen::MatrixXd z(x.rows(), x.cols() + 1);
    z.leftCols(x.cols()) = x;
    z.col(x.cols()) = y.as_vector();
    return z;
}

inline bool is_degenerate_variance(double scatter_diag, double n, double mean) {
    const double var = scatter_diag / n;
    return !(var > 1e-26 * (1.0 + mean * mean));
}

inline CovariancePair covariance_from_scatter(const Scatter& sc) {
    const auto n = sc.s.rows() - 1;
    const double denom = sc.n - 1.0;
    CovariancePair out;
    out.cxx = sc.s.topLeftCorner(n, n) / denom;
    out.cxy = sc.s.col(n).head(n) / denom;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (is_degenerate_variance(sc.s(j, j), sc.n, sc.mean[j])) {
            out.cxx.row(j).setZero();
            out.cxx.col(j).setZero();
            out.cxy[j] = 0.0;
        }
    }
    return out;
}

inline CorrelationPair correlation_from_scatter(const Scatter& sc) {
    const auto n = sc.s.rows() - 1;
    Eigen::VectorXd inv_sd(n + 1);
    std::vector<bool> constant(static_cast<std::size_t>(n + 1));
    for (Eigen::Index j = 0; j <= n; ++j) {
        constant[static_cast<std::size_t>(j)] = is_degenerate_variance(sc.s(j, j), sc.n, sc.mean[j]);
        inv_sd[j] = constant[static_cast<std::size_t>(j)] ? 0.0 : 1.0 / std::sqrt(sc.s(j, j));
    }
    CorrelationPair out;
    out.rxx.resize(n, n);
    out.rxy.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out.rxx(i, j) = i == j ? 1.0 : std::clamp(sc.s(i, j) * inv_sd[i] * inv_sd[j], -1.0, 1.0);
        }
        out.rxy[i] = std::clamp(sc.s(i, n) * inv_sd[i] * inv_sd[n], -1.0, 1.0);
        if (constant[static_cast<std::size_t>(i)]) out.constant_columns.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

inline double stable_log1p_exp_neg(double margin) {
    // log(1 + exp(-margin))
    return margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace detail

/// Sample covariance (1/(L-1)) of the encoded columns and of each column with the labels.
inline CovariancePair covariance_matrices(const Eigen::MatrixXd& x, const LabelVector& y) {
    if (x.rows() < 2) throw InvalidArgument("covariance_matrices: need at least 2 rows");
    return detail::covariance_from_scatter(detail::weighted_scatter(detail::augment(x, y), Eigen::VectorXd::Ones(x.rows())));
}

/// Pearson correlations. Constant columns get a unit diagonal and zero
/// correlation with everything else; they are listed in `constant_columns`.
inline CorrelationPair correlation_matrices(const Eigen::MatrixXd& x, const LabelVector& y) {
    if (x.rows() < 2) throw InvalidArgument("correlation_matrices: need at least 2 rows");
    return detail::correlation_from_scatter(detail::weighted_scatter(detail::augment(x, y), Eigen::VectorXd::Ones(x.rows())));
}

/// Element-wise transform sign(C)^(g-1) * C^(g) applied to each entry, i.e.
/// sign(c) * |c|^g with sign(0) = 0.
inline double cme_transform(double c, int g) {
    if (c == 0.0) return 0.0;
    double mag = std::abs(c);
    double p = mag;
    for (int k = 1; k < g; ++k) p *= mag;
    return g == 1 ? c : std::copysign(p, c);
}

inline Eigen::VectorXd cme_weights(const CovariancePair& cov, const CmeConfig& cfg = {}) {
    if (cfg.exponent_g < 1) throw InvalidArgument("cme_weights: exponent g must be >= 1");
    if (cfg.exponent_g == 1) return cov.cxx * cov.cxy;
    const Eigen::MatrixXd t = cov.cxx.unaryExpr([g = cfg.exponent_g](double c) { return cme_transform(c, g); });
    return t * cov.cxy;
}

/// w = R_XX * R_Xy.
inline Eigen::VectorXd corr_cme_weights(const CorrelationPair& corr) { return corr.rxx * corr.rxy; }

/// Weighted L2-regularized logistic regression by gradient descent with a
/// fixed 1/Lipschitz step, starting from zero. Minimizes
///   (1/n) sum_i c_i log(1 + exp(-y_i (w.x_i + b))) + (l2/2) |w|^2,   n = sum_i c_i.
/// The bias is not regularized. On hitting max_iterations the last iterate is
/// returned with converged = false.
inline LinearModel logistic_weights(const Eigen::MatrixXd& x, const LabelVector& y, const LogisticConfig& cfg,
                                    const Eigen::VectorXd& row_weights) {
    y.require_both_classes("logistic_weights");
    if (y.size() != static_cast<std::size_t>(x.rows()) || row_weights.size() != x.rows())
        throw InvalidArgument("logistic_weights: size mismatch");
    const Eigen::VectorXd yv = y.as_vector();
    const double n = row_weights.sum();
    const double lipschitz = 0.25 * (row_weights.dot((x.rowwise().squaredNorm().array() + 1.0).matrix())) / n + cfg.l2;
    const double step = 1.0 / lipschitz;

    LinearModel model;
    model.weights = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd coef(x.rows());
    for (std::size_t it = 0;; ++it) {
        const Eigen::VectorXd margin = ((x * model.weights).array() + model.bias).matrix();
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            // d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
            coef[i] = -row_weights[i] * yv[i] * detail::sigmoid(-yv[i] * margin[i]) / n;
        }
        const Eigen::VectorXd grad_w = x.transpose() * coef + cfg.l2 * model.weights;
        const double grad_b = coef.sum();
        model.gradient_norm = std::max(grad_w.size() ? grad_w.cwiseAbs().maxCoeff() : 0.0, std::abs(grad_b));
        model.iterations = it;
        if (!std::isfinite(model.gradient_norm)) throw NumericError("logistic_weights: non-finite gradient");
        if (model.gradient_norm <= cfg.tolerance) {
            model.converged = true;
            return model;
        }
        if (it == cfg.max_iterations) return model;
        model.weights -= step * grad_w;
        model.bias -= step * grad_b;
    }
}

inline LinearModel logistic_weights(const Eigen::MatrixXd& x, const LabelVector& y, const LogisticConfig& cfg = {}) {
    return logistic_weights(x, y, cfg, Eigen::VectorXd::Ones(x.rows()));
}

/// Regularized logistic objective, exposed for gradient checks.
inline double logistic_objective(const Eigen::MatrixXd& x, const LabelVector& y, const LogisticConfig& cfg,
                                 const Eigen::VectorXd& w, double b) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) loss += detail::stable_log1p_exp_neg(y[static_cast<std::size_t>(i)] * (x.row(i).dot(w) + b));
    return loss / static_cast<double>(x.rows()) + 0.5 * cfg.l2 * w.squaredNorm();
}

/// Weights from one (possibly bootstrap-weighted) sample under the selected
/// estimator. `augmented` is [X y] as built by detail::augment.
inline Eigen::VectorXd estimate_weights(const Eigen::MatrixXd& augmented, const LabelVector& y, const Eigen::VectorXd& row_weights,
                                        const EstimatorConfig& cfg) {
    switch (cfg.kind) {
        case Estimator::corr_cme:
            return corr_cme_weights(detail::correlation_from_scatter(detail::weighted_scatter(augmented, row_weights)));
        case Estimator::cme:
            return cme_weights(detail::covariance_from_scatter(detail::weighted_scatter(augmented, row_weights)), cfg.cme);
        case Estimator::logistic:
            return logistic_weights(augmented.leftCols(augmented.cols() - 1), y, cfg.logistic, row_weights).weights;
    }
    throw InvalidArgument("unknown estimator");
}

}  // namespace ivikit
