#pragma once

// Brute-force reference implementations used to check the library.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

inline bool constant(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

/// Pearson correlation; constant columns correlate 1 with themselves and 0 with anything else.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b, bool same_column = false) {
    if (constant(a) || constant(b)) return same_column ? 1.0 : 0.0;
    return covariance(a, b) / std::sqrt(covariance(a, a) * covariance(b, b));
}

inline std::vector<double> column(const Eigen::MatrixXd& x, Eigen::Index j) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(x(i, j));
    return out;
}

inline double entropy_of(const std::map<std::vector<std::uint32_t>, double>& counts, double total) {
    double h = 0;
    for (const auto& [k, c] : counts) {
        const double p = c / total;
        h -= p * std::log(p);
    }
    return h;
}

/// I(a;b) = sum p(a,b) log(p(a,b) / (p(a) p(b))) over observed cells.
inline double mutual_information(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
    std::map<std::uint32_t, double> pa, pb;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        pa[a[i]] += 1;
        pb[b[i]] += 1;
    }
    double mi = 0;
    for (const auto& [k, c] : joint) mi += (c / n) * std::log((c / n) / ((pa[k.first] / n) * (pb[k.second] / n)));
    return mi;
}

/// I(a;b|c) = sum p(a,b,c) log(p(c) p(a,b,c) / (p(a,c) p(b,c))).
inline double conditional_mutual_information(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                                             const std::vector<std::uint32_t>& c) {
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, double> abc;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> ac, bc;
    std::map<std::uint32_t, double> pc;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        abc[{a[i], b[i], c[i]}] += 1;
        ac[{a[i], c[i]}] += 1;
        bc[{b[i], c[i]}] += 1;
        pc[c[i]] += 1;
    }
    double cmi = 0;
    for (const auto& [k, cnt] : abc) {
        const auto [x, y, z] = k;
        cmi += (cnt / n) * std::log((pc[z] * cnt) / (ac[{x, z}] * bc[{y, z}]));
    }
    return cmi;
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2,
/// as an exact fraction numerator2 / (2 * pos * neg).
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    long long twice_wins = 0, pos = 0, neg = 0;
    for (int l : labels) (l > 0 ? pos : neg)++;
    for (std::size_t i = 0; i < scores.size(); ++i)
        for (std::size_t j = 0; j < scores.size(); ++j)
            if (labels[i] > 0 && labels[j] < 0) twice_wins += scores[i] > scores[j] ? 2 : (scores[i] == scores[j] ? 1 : 0);
    return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace oracle
