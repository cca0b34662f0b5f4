#pragma once

// Baseline feature rankers: greedy forward selection under the common
// information-theoretic criteria, multi-neighbor Relief, and a stopping rule
// for greedy rankings.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/mutual_info.hpp"

namespace ivikit {

enum class SelectorMethod { mim, mifs, mrmr, jmi, cmim, cife, icap, disr, condred, cmi, relief };

inline constexpr std::string_view kSelectorNames[] = {"MIM", "MIFS", "MRMR", "JMI", "CMIM", "CIFE", "ICAP", "DISR", "CondRed", "CMI", "Relief"};

inline std::string_view to_string(SelectorMethod m) { return kSelectorNames[static_cast<int>(m)]; }

inline SelectorMethod parse_selector(std::string_view name) {
    for (int i = 0; i < static_cast<int>(std::size(kSelectorNames)); ++i) {
        const auto candidate = kSelectorNames[i];
        if (candidate.size() == name.size() &&
            std::equal(candidate.begin(), candidate.end(), name.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
            return static_cast<SelectorMethod>(i);
    }
    throw InvalidArgument("unknown selection method '" + std::string(name) + "'");
}

struct SelectorKind {
    SelectorMethod method = SelectorMethod::mim;
    double mifs_beta = 1.0;
    std::size_t relief_k = 10;
};

struct RankingResult {
    std::vector<std::size_t> order;  // selected features in selection order
    std::vector<double> scores;      // criterion value at the step each was chosen
    std::size_t stop_k = 0;
    std::vector<std::string> warnings;
};

/// Number of leading steps kept: everything before the first step whose
/// criterion score is <= 0, or all steps when there is none.
inline std::size_t forward_selection_stop(const std::vector<double>& scores) {
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] <= 0.0) return i;
    return scores.size();
}

inline std::size_t forward_selection_stop(const RankingResult& result) { return forward_selection_stop(result.scores); }

namespace detail {

/// Expected rows per cell below which the CMI criterion falls back to
/// conditioning on the most recently chosen feature only.
inline constexpr double kSparseCellCount = 5.0;
inline constexpr double kCriterionZero = 1e-12;

class CriterionTables {
public:
    CriterionTables(std::vector<DiscreteColumn> features, DiscreteColumn labels)
        : f_(std::move(features)), y_(std::move(labels)), n_(f_.size()),
          pair_mi_(n_ * n_, kUnset), pair_cmi_(n_ * n_, kUnset), disr_(n_ * n_, kUnset) {
        relevance_.reserve(n_);
        for (const auto& c : f_) relevance_.push_back(mutual_information(c, y_));
    }

    double relevance(std::size_t f) const { return relevance_[f]; }

    double redundancy(std::size_t f, std::size_t s) {
        auto& slot = pair_mi_[key(f, s)];
        if (slot == kUnset) slot = pair_mi_[key(s, f)] = mutual_information(f_[f], f_[s]);
        return slot;
    }

    double conditional_redundancy(std::size_t f, std::size_t s) {
        auto& slot = pair_cmi_[key(f, s)];
        if (slot == kUnset) slot = pair_cmi_[key(s, f)] = conditional_mutual_information(f_[f], f_[s], y_);
        return slot;
    }

    /// I(f,s;Y) / H(f,s,Y)
    double disr_term(std::size_t f, std::size_t s) {
        auto& slot = disr_[key(f, s)];
        if (slot == kUnset) {
            const auto fs = joint(f_[f], f_[s]);
            const double h = entropy(joint(fs, y_));
            slot = disr_[key(s, f)] = h > 0.0 ? mutual_information(fs, y_) / h : 0.0;
        }
        return slot;
    }

    /// I(f;Y|S) with the sparse-table guard.
    double conditional_relevance(std::size_t f, const std::vector<std::size_t>& selected) {
        if (selected.empty()) return relevance_[f];
        std::vector<const DiscreteColumn*> parts;
        for (auto s : selected) parts.push_back(&f_[s]);
        DiscreteColumn cond = joint(parts);
        const double cells = static_cast<double>(f_[f].levels) * static_cast<double>(y_.levels) * static_cast<double>(cond.levels);
        if (static_cast<double>(y_.size()) / cells < kSparseCellCount) cond = f_[selected.back()];
        return conditional_mutual_information(f_[f], y_, cond);
    }

    std::size_t size() const { return n_; }

private:
    static constexpr double kUnset = -1.0;
    std::size_t key(std::size_t a, std::size_t b) const { return a * n_ + b; }

    std::vector<DiscreteColumn> f_;
    DiscreteColumn y_;
    std::size_t n_;
    std::vector<double> relevance_;
    std::vector<double> pair_mi_, pair_cmi_, disr_;
};

inline double criterion(SelectorKind kind, CriterionTables& t, std::size_t f, const std::vector<std::size_t>& selected) {
    const double rel = t.relevance(f);
    if (selected.empty()) return rel;
    const double s_count = static_cast<double>(selected.size());
    auto linear = [&](double beta, double gamma) {
        double red = 0.0, cond = 0.0;
        for (auto s : selected) {
            if (beta != 0.0) red += t.redundancy(f, s);
            if (gamma != 0.0) cond += t.conditional_redundancy(f, s);
        }
        return rel - beta * red + gamma * cond;
    };
    switch (kind.method) {
        case SelectorMethod::mim: return rel;
        case SelectorMethod::mifs: return linear(kind.mifs_beta, 0.0);
        case SelectorMethod::mrmr: return linear(1.0 / s_count, 0.0);
        case SelectorMethod::jmi: return linear(1.0 / s_count, 1.0 / s_count);
        case SelectorMethod::cife: return linear(1.0, 1.0);
        case SelectorMethod::condred: return linear(0.0, 1.0);
        case SelectorMethod::cmim: {
            double best = std::numeric_limits<double>::infinity();
            for (auto s : selected) best = std::min(best, rel - t.redundancy(f, s) + t.conditional_redundancy(f, s));
            return best;
        }
        case SelectorMethod::icap: {
            double penalty = 0.0;
            for (auto s : selected) penalty += std::max(0.0, t.redundancy(f, s) - t.conditional_redundancy(f, s));
            return rel - penalty;
        }
        case SelectorMethod::disr: {
            double sum = 0.0;
            for (auto s : selected) sum += t.disr_term(f, s);
            return sum;
        }
        case SelectorMethod::cmi: return t.conditional_relevance(f, selected);
        case SelectorMethod::relief: break;
    }
    throw InvalidArgument("criterion: Relief is not a greedy information criterion");
}

}  // namespace detail

/// Greedy forward selection maximizing the method's criterion; every method
/// scores the first pick by I(f;Y). Ties go to the lowest column index.
inline RankingResult greedy_select(SelectorKind kind, const DesignMatrix& x, const LabelVector& y, const MiConfig& cfg = {},
                                   std::size_t max_k = 0) {
    if (kind.method == SelectorMethod::relief) throw InvalidArgument("greedy_select: use relief_scores for Relief");
    if (y.size() != x.rows()) throw InvalidArgument("greedy_select: label count does not match row count");
    RankingResult result;
    const std::size_t n = x.cols();
    if (max_k == 0) max_k = n;
    if (max_k > n) {
        result.warnings.push_back("max_k " + std::to_string(max_k) + " clamped to " + std::to_string(n));
        max_k = n;
    }
    detail::CriterionTables tables(discretize(x, cfg), discretize_labels(y));
    std::vector<bool> taken(n, false);
    for (std::size_t step = 0; step < max_k; ++step) {
        std::size_t best = n;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < n; ++f) {
            if (taken[f]) continue;
            double score = detail::criterion(kind, tables, f, result.order);
            if (std::abs(score) < detail::kCriterionZero) score = 0.0;  // cancellation residue of an exactly-zero criterion
            if (best == n || score > best_score) {
                best = f;
                best_score = score;
            }
        }
        taken[best] = true;
        result.order.push_back(best);
        result.scores.push_back(best_score);
    }
    result.stop_k = forward_selection_stop(result);
    return result;
}

struct ReliefResult {
    std::vector<double> scores;  // per encoded column
    RankingResult ranking;       // by descending score, ties to the lower index
};

/// Multi-neighbor Relief over all instances. Per-feature difference is
/// |a - b| / range for metric columns (0 when the range is 0) and 0/1 for
/// indicator columns; the neighbor distance is the sum of those differences.
/// For each row the mean difference to its k nearest other-class rows minus the
/// mean difference to its k nearest same-class rows is accumulated, and the
/// total is divided by L. Distance ties go to the lower row index, so `seed`
/// has no effect; it is accepted for interface symmetry with sampled variants.
inline ReliefResult relief_scores(const DesignMatrix& x, const LabelVector& y, std::size_t k_neighbors = 10, std::uint64_t seed = 0) {
    (void)seed;
    if (k_neighbors < 1) throw InvalidArgument("relief: k_neighbors must be >= 1");
    if (y.size() != x.rows()) throw InvalidArgument("relief: label count does not match row count");
    const std::size_t pos = y.count(1), neg = y.count(-1);
    if (std::min(pos, neg) < std::max<std::size_t>(k_neighbors, 2))
        throw DataError("relief: each class needs at least max(k, 2) = " + std::to_string(std::max<std::size_t>(k_neighbors, 2)) + " rows");

    const auto rows = static_cast<Eigen::Index>(x.rows());
    const auto cols = static_cast<Eigen::Index>(x.cols());
    Eigen::MatrixXd scaled = x.values;
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double range = x.values.col(j).maxCoeff() - x.values.col(j).minCoeff();
        if (x.is_metric(static_cast<std::size_t>(j))) {
            if (range > 0.0) scaled.col(j) = x.values.col(j) / range;
            else scaled.col(j).setZero();
        } else {
            scaled.col(j) = x.values.col(j).unaryExpr([](double v) { return v != 0.0 ? 1.0 : 0.0; });
        }
    }

    Eigen::VectorXd total = Eigen::VectorXd::Zero(cols);
    std::vector<std::pair<double, Eigen::Index>> hits, misses;
    for (Eigen::Index i = 0; i < rows; ++i) {
        hits.clear();
        misses.clear();
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (r == i) continue;
            const double d = (scaled.row(r) - scaled.row(i)).cwiseAbs().sum();
            (y[static_cast<std::size_t>(r)] == y[static_cast<std::size_t>(i)] ? hits : misses).emplace_back(d, r);
        }
        const auto kh = std::min(k_neighbors, hits.size());
        const auto km = std::min(k_neighbors, misses.size());
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kh), hits.end());
        std::partial_sort(misses.begin(), misses.begin() + static_cast<std::ptrdiff_t>(km), misses.end());
        Eigen::VectorXd hit_diff = Eigen::VectorXd::Zero(cols), miss_diff = Eigen::VectorXd::Zero(cols);
        for (std::size_t q = 0; q < kh; ++q) hit_diff += (scaled.row(hits[q].second) - scaled.row(i)).cwiseAbs().transpose();
        for (std::size_t q = 0; q < km; ++q) miss_diff += (scaled.row(misses[q].second) - scaled.row(i)).cwiseAbs().transpose();
        total += miss_diff / static_cast<double>(km) - hit_diff / static_cast<double>(kh);
    }
    total /= static_cast<double>(rows);

    ReliefResult out;
    out.scores.assign(total.data(), total.data() + total.size());
    std::vector<std::size_t> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.scores[a] > out.scores[b]; });
    out.ranking.order = order;
    for (auto f : order) out.ranking.scores.push_back(out.scores[f]);
    out.ranking.stop_k = forward_selection_stop(out.ranking);
    return out;
}

/// Dispatches to greedy_select or relief_scores.
inline RankingResult rank_features(SelectorKind kind, const DesignMatrix& x, const LabelVector& y, const MiConfig& cfg = {},
                                   std::size_t max_k = 0, std::uint64_t seed = 0) {
    if (kind.method != SelectorMethod::relief) return greedy_select(kind, x, y, cfg, max_k);
    auto ranking = relief_scores(x, y, kind.relief_k, seed).ranking;
    if (max_k != 0 && max_k < ranking.order.size()) {
        ranking.order.resize(max_k);
        ranking.scores.resize(max_k);
        ranking.stop_k = forward_selection_stop(ranking);
    }
    return ranking;
}

}  // namespace ivikit
