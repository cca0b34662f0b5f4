#pragma once

// Plug-in entropy and (conditional) mutual information on discrete codes, in
// nats. Metric columns are discretized by equal-frequency binning first.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"

namespace ivikit {

struct MiConfig {
    std::size_t metric_bins = 0;  // 0: min(10, floor(sqrt(L)))
};

/// A discretized column: codes in [0, levels).
struct DiscreteColumn {
    std::vector<std::uint32_t> codes;
    std::uint32_t levels = 0;

    std::size_t size() const { return codes.size(); }
};

inline std::size_t effective_bins(const MiConfig& cfg, std::size_t rows) {
    if (cfg.metric_bins != 0) {
        if (cfg.metric_bins < 2) throw InvalidArgument("mutual information: metric_bins must be >= 2");
        return cfg.metric_bins;
    }
    return std::max<std::size_t>(2, std::min<std::size_t>(10, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(rows))))));
}

/// Distinct values mapped to codes in ascending value order.
inline DiscreteColumn discretize_categorical(std::span<const double> values) {
    std::vector<double> distinct(values.begin(), values.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    DiscreteColumn out;
    out.levels = static_cast<std::uint32_t>(distinct.size());
    out.codes.reserve(values.size());
    for (double v : values)
        out.codes.push_back(static_cast<std::uint32_t>(std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin()));
    return out;
}

/// Equal-frequency bins: a value whose first position in sorted order is r
/// (0-based) goes to bin floor(r * bins / L), so tied values share a bin.
/// Empty bins are squeezed out of the code range.
inline DiscreteColumn discretize_equal_frequency(std::span<const double> values, std::size_t bins) {
    const std::size_t n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::uint32_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto first = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin());
        raw[i] = static_cast<std::uint32_t>(first * bins / n);
    }
    std::vector<double> as_double(raw.begin(), raw.end());
    return discretize_categorical(as_double);
}

inline std::vector<DiscreteColumn> discretize(const DesignMatrix& x, const MiConfig& cfg) {
    const auto bins = effective_bins(cfg, x.rows());
    std::vector<DiscreteColumn> out;
    out.reserve(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXd col = x.values.col(static_cast<Eigen::Index>(j));
        const std::span<const double> values(col.data(), static_cast<std::size_t>(col.size()));
        out.push_back(x.is_metric(j) ? discretize_equal_frequency(values, bins) : discretize_categorical(values));
    }
    return out;
}

inline DiscreteColumn discretize_labels(const LabelVector& y) {
    DiscreteColumn out;
    out.levels = 2;
    for (int v : y.values) out.codes.push_back(v > 0 ? 1u : 0u);
    return out;
}

/// Joint variable whose codes enumerate the observed tuples.
inline DiscreteColumn joint(std::span<const DiscreteColumn* const> parts) {
    if (parts.empty()) throw InvalidArgument("joint: no columns");
    const std::size_t n = parts.front()->size();
    std::vector<std::uint64_t> keys(n, 0);
    std::uint64_t radix = 1;
    for (const auto* p : parts) {
        if (p->size() != n) throw InvalidArgument("joint: column lengths differ");
        if (radix > (UINT64_MAX / std::max<std::uint64_t>(1, p->levels))) throw InvalidArgument("joint: too many levels");
        for (std::size_t i = 0; i < n; ++i) keys[i] = keys[i] * p->levels + p->codes[i];
        radix *= std::max<std::uint64_t>(1, p->levels);
    }
    std::vector<std::uint64_t> distinct = keys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    DiscreteColumn out;
    out.levels = static_cast<std::uint32_t>(distinct.size());
    out.codes.reserve(n);
    for (auto k : keys) out.codes.push_back(static_cast<std::uint32_t>(std::lower_bound(distinct.begin(), distinct.end(), k) - distinct.begin()));
    return out;
}

inline DiscreteColumn joint(const DiscreteColumn& a, const DiscreteColumn& b) {
    const DiscreteColumn* parts[] = {&a, &b};
    return joint(parts);
}

inline DiscreteColumn joint(const DiscreteColumn& a, const DiscreteColumn& b, const DiscreteColumn& c) {
    const DiscreteColumn* parts[] = {&a, &b, &c};
    return joint(parts);
}

/// Plug-in entropy. Cell terms are summed in ascending count order, so the
/// result depends only on the multiset of counts; this makes H(a,b) and
/// H(b,a), and hence I(a;b) and I(b;a), bit-identical.
inline double entropy(const DiscreteColumn& c) {
    if (c.codes.empty()) return 0.0;
    std::vector<std::size_t> counts(c.levels, 0);
    for (auto code : c.codes) ++counts[code];
    std::sort(counts.begin(), counts.end());
    const double n = static_cast<double>(c.codes.size());
    double h = 0.0;
    for (auto k : counts) {
        if (k == 0) continue;
        const double p = static_cast<double>(k) / n;
        h -= p * std::log(p);
    }
    return h;
}

inline double mutual_information(const DiscreteColumn& a, const DiscreteColumn& b) {
    if (a.size() != b.size()) throw InvalidArgument("mutual_information: length mismatch");
    return std::max(0.0, (entropy(a) + entropy(b)) - entropy(joint(a, b)));
}

/// I(a;b|c) = H(a,c) + H(b,c) - H(a,b,c) - H(c), clamped at 0.
inline double conditional_mutual_information(const DiscreteColumn& a, const DiscreteColumn& b, const DiscreteColumn& c) {
    if (a.size() != b.size() || a.size() != c.size()) throw InvalidArgument("conditional_mutual_information: length mismatch");
    return std::max(0.0, (entropy(joint(a, c)) + entropy(joint(b, c))) - (entropy(joint(a, b, c)) + entropy(c)));
}

/// Discretizes each side per cfg (metric flag selects equal-frequency binning).
inline double mutual_information(std::span<const double> a, bool a_metric, std::span<const double> b, bool b_metric, const MiConfig& cfg = {}) {
    const auto bins = effective_bins(cfg, a.size());
    auto disc = [&](std::span<const double> v, bool metric) { return metric ? discretize_equal_frequency(v, bins) : discretize_categorical(v); };
    return mutual_information(disc(a, a_metric), disc(b, b_metric));
}

}  // namespace ivikit
