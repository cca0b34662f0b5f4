#pragma once

// Informative variable identification from bootstrap weight distributions:
// relevance by percentile confidence intervals, redundancy by correlation of
// weights across replicates, informative connected components, an importance
// ranking, and a repeated-run stabilization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/estimators.hpp"
#include "ivikit/parallel.hpp"
#include "ivikit/rng.hpp"

namespace ivikit {

inline constexpr int kMaxResampleRetries = 100;
inline constexpr double kScoreTieTolerance = 1e-12;  // relative

/// True when two importance scores agree to the tie tolerance.
inline bool scores_tied(double a, double b) {
    if (a == b) return true;
    if (std::isinf(a) || std::isinf(b)) return false;
    return std::abs(a - b) <= kScoreTieTolerance * std::max(std::abs(a), std::abs(b));
}

struct BootstrapWeights {
    Eigen::MatrixXd replicates;  // B x N, row b from resample b
    Estimator estimator = Estimator::corr_cme;
    std::uint64_t seed = 0;

    std::size_t reps() const { return static_cast<std::size_t>(replicates.rows()); }
    std::size_t features() const { return static_cast<std::size_t>(replicates.cols()); }
};

struct FeatureRelevance {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool relevant = false;
};

struct RelevanceReport {
    std::vector<FeatureRelevance> features;
    double alpha = 0.05;

    std::vector<std::size_t> relevant_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i].relevant) out.push_back(i);
        return out;
    }
};

struct RedundancyEdge {
    std::size_t m = 0;  // m < n
    std::size_t n = 0;
    double rho = 0.0;

    bool operator==(const RedundancyEdge&) const = default;
};

struct RedundancyGraph {
    std::size_t nodes = 0;
    std::vector<RedundancyEdge> edges;  // sorted by (m, n)
    double threshold = 0.5;
    std::vector<std::size_t> zero_variance;  // features excluded from edges

    std::vector<std::vector<std::size_t>> adjacency() const {
        std::vector<std::vector<std::size_t>> adj(nodes);
        for (const auto& e : edges) {
            adj[e.m].push_back(e.n);
            adj[e.n].push_back(e.m);
        }
        return adj;
    }

    const RedundancyEdge* find(std::size_t a, std::size_t b) const {
        if (a > b) std::swap(a, b);
        for (const auto& e : edges)
            if (e.m == a && e.n == b) return &e;
        return nullptr;
    }
};

struct ComponentSplit {
    std::vector<std::vector<std::size_t>> components;  // each ascending, ordered by smallest member
    std::vector<std::size_t> informative;              // ascending
};

struct RankedFeature {
    std::size_t index = 0;
    double score = 0.0;
    bool degenerate = false;  // zero-width interval; score is +inf (or 0 when the mean is 0 too)
};

struct IviResult {
    BootstrapWeights bootstrap;
    RelevanceReport relevance;
    RedundancyGraph graph;
    ComponentSplit split;
    std::vector<RankedFeature> ranking;
    std::vector<int> sign;  // sign of the mean replicate weight per feature

    const std::vector<std::size_t>& informative() const& { return split.informative; }
    std::vector<std::size_t> informative() && { return std::move(split.informative); }
};

struct IviConfig {
    EstimatorConfig estimator;
    std::size_t b_reps = 500;
    double alpha = 0.05;
    double rho_th = 0.5;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0: hardware concurrency
};

// ---------------------------------------------------------------------------

/// B bootstrap replicates. Replicate b draws L row indices with replacement
/// from Rng(derive_seed(seed, b)); a draw missing either class is redrawn from
/// the same stream, up to kMaxResampleRetries times.
inline BootstrapWeights bootstrap_weights(const Eigen::MatrixXd& x, const LabelVector& y, const EstimatorConfig& estimator,
                                          std::size_t b_reps, std::uint64_t seed, std::size_t threads = 0) {
    if (b_reps < 2) throw InvalidArgument("bootstrap_weights: need at least 2 replicates");
    y.require_both_classes("bootstrap_weights");
    const Eigen::MatrixXd augmented = detail::augment(x, y);
    const auto rows = static_cast<std::uint64_t>(x.rows());

    BootstrapWeights out;
    out.replicates.resize(static_cast<Eigen::Index>(b_reps), x.cols());
    out.estimator = estimator.kind;
    out.seed = seed;

    parallel_for(b_reps, threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        Eigen::VectorXd counts(x.rows());
        for (int attempt = 0;; ++attempt) {
            if (attempt > kMaxResampleRetries)
                throw DataError("bootstrap_weights: replicate " + std::to_string(b) + " kept drawing a single class");
            counts.setZero();
            std::size_t positives = 0;
            for (std::uint64_t draw = 0; draw < rows; ++draw) {
                const auto i = static_cast<Eigen::Index>(rng.below(rows));
                counts[i] += 1.0;
                positives += y[static_cast<std::size_t>(i)] > 0;
            }
            if (positives > 0 && positives < rows) break;
        }
        const Eigen::VectorXd w = estimate_weights(augmented, y, counts, estimator);
        if (!w.allFinite()) throw NumericError("bootstrap_weights: non-finite weight in replicate " + std::to_string(b));
        out.replicates.row(static_cast<Eigen::Index>(b)) = w.transpose();
    });
    return out;
}

/// Nearest-rank percentile of sorted values: the ceil(p * B)-th smallest
/// (1-based), clamped to [1, B]. A relative 1e-12 slack keeps p * B that is
/// mathematically an integer from rounding up.
inline double nearest_rank(const std::vector<double>& sorted, double p) {
    const auto b = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * b * (1.0 - 1e-12)));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

/// Percentile interval [alpha/2, 1 - alpha/2] per feature; relevant when it excludes 0.
inline RelevanceReport relevant_features(const BootstrapWeights& bw, double alpha = 0.05) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("relevant_features: alpha must lie in (0, 1)");
    RelevanceReport report;
    report.alpha = alpha;
    std::vector<double> column(bw.reps());
    for (std::size_t n = 0; n < bw.features(); ++n) {
        for (std::size_t b = 0; b < bw.reps(); ++b) column[b] = bw.replicates(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n));
        FeatureRelevance f;
        f.mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
        std::sort(column.begin(), column.end());
        f.lower = nearest_rank(column, alpha / 2.0);
        f.upper = nearest_rank(column, 1.0 - alpha / 2.0);
        f.relevant = f.lower > 0.0 || f.upper < 0.0;
        report.features.push_back(f);
    }
    return report;
}

/// Pearson correlation of every pair of replicate columns; an edge is stored
/// when |rho| > rho_th. Columns with zero variance across replicates take no edges.
inline RedundancyGraph redundancy_graph(const BootstrapWeights& bw, double rho_th = 0.5) {
    if (!(rho_th > 0.0 && rho_th < 1.0)) throw InvalidArgument("redundancy_graph: rho_th must lie in (0, 1)");
    RedundancyGraph graph;
    graph.nodes = bw.features();
    graph.threshold = rho_th;
    const Eigen::MatrixXd centered = bw.replicates.rowwise() - bw.replicates.colwise().mean();
    const Eigen::MatrixXd scatter = centered.transpose() * centered;
    const Eigen::VectorXd mean = bw.replicates.colwise().mean().transpose();
    std::vector<bool> degenerate(graph.nodes);
    for (std::size_t j = 0; j < graph.nodes; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        degenerate[j] = detail::is_degenerate_variance(scatter(jj, jj), static_cast<double>(bw.reps()), mean[jj]);
        if (degenerate[j]) graph.zero_variance.push_back(j);
    }
    for (std::size_t m = 0; m < graph.nodes; ++m) {
        if (degenerate[m]) continue;
        for (std::size_t n = m + 1; n < graph.nodes; ++n) {
            if (degenerate[n]) continue;
            const auto mi = static_cast<Eigen::Index>(m), ni = static_cast<Eigen::Index>(n);
            const double rho = std::clamp(scatter(mi, ni) / std::sqrt(scatter(mi, mi) * scatter(ni, ni)), -1.0, 1.0);
            if (std::abs(rho) > rho_th) graph.edges.push_back({m, n, rho});
        }
    }
    return graph;
}

/// Connected components of the redundancy graph (isolated nodes are singletons);
/// a component is informative when it holds at least one relevant feature.
inline ComponentSplit informative_components(const RedundancyGraph& graph, const RelevanceReport& relevance) {
    if (relevance.features.size() != graph.nodes) throw InvalidArgument("informative_components: feature count mismatch");
    const auto adj = graph.adjacency();
    ComponentSplit out;
    std::vector<bool> visited(graph.nodes, false);
    for (std::size_t start = 0; start < graph.nodes; ++start) {
        if (visited[start]) continue;
        std::vector<std::size_t> component;
        std::vector<std::size_t> stack{start};
        visited[start] = true;
        while (!stack.empty()) {
            const auto node = stack.back();
            stack.pop_back();
            component.push_back(node);
            for (auto next : adj[node]) {
                if (!visited[next]) {
                    visited[next] = true;
                    stack.push_back(next);
                }
            }
        }
        std::sort(component.begin(), component.end());
        const bool keep = std::any_of(component.begin(), component.end(), [&](std::size_t f) { return relevance.features[f].relevant; });
        if (keep) out.informative.insert(out.informative.end(), component.begin(), component.end());
        out.components.push_back(std::move(component));
    }
    std::sort(out.informative.begin(), out.informative.end());
    return out;
}

/// Importance |mean| / (upper - lower)^2 over the percentile interval at level
/// 1 - alpha. Sorted by descending score; runs of neighbouring scores that are
/// scores_tied form a tie group, ordered by ascending feature index. A zero-width interval scores +inf and is flagged; if its mean is also
/// exactly 0 the score is 0.
inline std::vector<RankedFeature> importance_ranking(const BootstrapWeights& bw, const std::vector<std::size_t>& informative,
                                                     double alpha = 0.05) {
    if (informative.empty()) throw InvalidArgument("importance_ranking: informative set is empty");
    const auto relevance = relevant_features(bw, alpha);
    std::vector<RankedFeature> ranking;
    for (auto f : informative) {
        if (f >= bw.features()) throw InvalidArgument("importance_ranking: feature index out of range");
        const auto& r = relevance.features[f];
        const double range = r.upper - r.lower;
        RankedFeature rf{f, 0.0, false};
        if (range > 0.0) {
            rf.score = std::abs(r.mean) / (range * range);
        } else {
            rf.degenerate = true;
            rf.score = r.mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        ranking.push_back(rf);
    }
    std::sort(ranking.begin(), ranking.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.index < b.index;
    });
    for (std::size_t begin = 0; begin < ranking.size();) {
        std::size_t end = begin + 1;
        while (end < ranking.size() && scores_tied(ranking[end - 1].score, ranking[end].score)) ++end;
        std::sort(ranking.begin() + static_cast<std::ptrdiff_t>(begin), ranking.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const RankedFeature& a, const RankedFeature& b) { return a.index < b.index; });
        begin = end;
    }
    return ranking;
}

inline IviResult run_ivi(const Eigen::MatrixXd& x, const LabelVector& y, const IviConfig& cfg) {
    IviResult result;
    result.bootstrap = bootstrap_weights(x, y, cfg.estimator, cfg.b_reps, cfg.seed, cfg.threads);
    result.relevance = relevant_features(result.bootstrap, cfg.alpha);
    result.graph = redundancy_graph(result.bootstrap, cfg.rho_th);
    result.split = informative_components(result.graph, result.relevance);
    if (!result.split.informative.empty()) result.ranking = importance_ranking(result.bootstrap, result.split.informative, cfg.alpha);
    for (const auto& f : result.relevance.features) result.sign.push_back(f.mean > 0 ? 1 : (f.mean < 0 ? -1 : 0));
    return result;
}

// ---------------------------------------------------------------------------
// Repeated runs

struct EdgeMeasure {
    std::size_t m = 0;
    std::size_t n = 0;
    double abs_sum = 0.0;     // sum over runs of |rho|; 0 for runs without the edge
    double signed_sum = 0.0;  // same with signed rho
    std::size_t count = 0;    // runs in which the edge was present
};

struct ProbabilisticIviResult {
    std::size_t runs = 0;
    std::vector<std::size_t> appearance_count;  // per feature: runs in which it was informative
    std::vector<double> appearance_freq;
    std::vector<std::size_t> stable_features;  // ascending
    std::vector<double> mean_weight;           // mean over runs of each run's mean replicate weight
    std::vector<EdgeMeasure> edges;            // every edge seen between informative features, by descending abs_sum
    std::vector<EdgeMeasure> candidate_edges;  // edges joining two stable features, by descending abs_sum
    std::size_t cutoff = 0;                    // number of candidate edges kept
    std::vector<EdgeMeasure> kept_edges;       // candidate_edges[0, cutoff)
};

struct ProbabilisticIviConfig {
    IviConfig ivi;  // ivi.seed is ignored; run r uses derive_seed(master_seed, r)
    std::size_t m_runs = 100;
    double keep_fraction = 0.9;
    std::uint64_t master_seed = 0;
};

/// Elbow on relationship measures sorted in descending order: the cut falls
/// after the largest drop s_i - s_{i+1}, where a trailing s_{K+1} = 0 is
/// appended so that a flat list is kept whole. Ties go to the earliest drop.
/// Returns the number of leading entries kept.
inline std::size_t largest_drop_cutoff(const std::vector<double>& descending) {
    if (descending.empty()) return 0;
    std::size_t best = 0;
    double best_drop = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < descending.size(); ++i) {
        const double next = i + 1 < descending.size() ? descending[i + 1] : 0.0;
        const double drop = descending[i] - next;
        if (drop > best_drop) {
            best_drop = drop;
            best = i;
        }
    }
    return best + 1;
}

inline ProbabilisticIviResult run_probabilistic_ivi(const Eigen::MatrixXd& x, const LabelVector& y, const ProbabilisticIviConfig& cfg) {
    if (cfg.m_runs < 2) throw InvalidArgument("run_probabilistic_ivi: m_runs must be >= 2");
    if (!(cfg.keep_fraction > 0.0 && cfg.keep_fraction <= 1.0)) throw InvalidArgument("run_probabilistic_ivi: keep_fraction must lie in (0, 1]");
    const auto n_features = static_cast<std::size_t>(x.cols());

    struct RunSummary {
        std::vector<std::size_t> informative;
        std::vector<RedundancyEdge> edges;
        std::vector<double> mean;
    };
    std::vector<RunSummary> runs(cfg.m_runs);
    parallel_for(cfg.m_runs, cfg.ivi.threads, [&](std::size_t r) {
        IviConfig run_cfg = cfg.ivi;
        run_cfg.seed = derive_seed(cfg.master_seed, r);
        run_cfg.threads = 1;
        const auto res = run_ivi(x, y, run_cfg);
        RunSummary s;
        s.informative = res.split.informative;
        std::vector<bool> informative(n_features, false);
        for (auto f : s.informative) informative[f] = true;
        for (const auto& e : res.graph.edges)
            if (informative[e.m] && informative[e.n]) s.edges.push_back(e);
        for (const auto& f : res.relevance.features) s.mean.push_back(f.mean);
        runs[r] = std::move(s);
    });

    ProbabilisticIviResult out;
    out.runs = cfg.m_runs;
    out.appearance_count.assign(n_features, 0);
    out.mean_weight.assign(n_features, 0.0);
    std::map<std::pair<std::size_t, std::size_t>, EdgeMeasure> measures;
    for (const auto& run : runs) {  // merged in run order
        for (auto f : run.informative) ++out.appearance_count[f];
        for (std::size_t f = 0; f < n_features; ++f) out.mean_weight[f] += run.mean[f] / static_cast<double>(cfg.m_runs);
        for (const auto& e : run.edges) {
            auto& m = measures[{e.m, e.n}];
            m.m = e.m;
            m.n = e.n;
            m.abs_sum += std::abs(e.rho);
            m.signed_sum += e.rho;
            ++m.count;
        }
    }
    std::vector<bool> stable(n_features, false);
    const auto needed = static_cast<std::size_t>(std::ceil(cfg.keep_fraction * static_cast<double>(cfg.m_runs) * (1.0 - 1e-12)));
    for (std::size_t f = 0; f < n_features; ++f) {
        out.appearance_freq.push_back(static_cast<double>(out.appearance_count[f]) / static_cast<double>(cfg.m_runs));
        stable[f] = out.appearance_count[f] >= needed;
        if (stable[f]) out.stable_features.push_back(f);
    }
    for (const auto& [key, m] : measures) out.edges.push_back(m);
    std::stable_sort(out.edges.begin(), out.edges.end(), [](const EdgeMeasure& a, const EdgeMeasure& b) { return a.abs_sum > b.abs_sum; });
    for (const auto& e : out.edges)
        if (stable[e.m] && stable[e.n]) out.candidate_edges.push_back(e);
    std::vector<double> sorted;
    for (const auto& e : out.candidate_edges) sorted.push_back(e.abs_sum);
    out.cutoff = largest_drop_cutoff(sorted);
    out.kept_edges.assign(out.candidate_edges.begin(), out.candidate_edges.begin() + static_cast<std::ptrdiff_t>(out.cutoff));
    return out;
}

}  // namespace ivikit
