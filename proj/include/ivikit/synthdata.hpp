#pragma once

// Synthetic mixed metric/binary data with a prescribed latent correlation
// structure and a binary label.
//
// Every variable v and the label own one latent standard normal. Latents of
// the two variables of a pair block correlate at `within_block_corr`, each
// variable latent correlates with the label latent at `label_corr`, and latents
// of different blocks are uncorrelated. Rows are drawn as z * S, where z holds
// i.i.d. standard normals (row-major draw order) and S is the symmetric square
// root of the latent correlation matrix. Categorical variables take category
// "1" when their latent is above 0 (the median), the label is +1 when its
// latent is above 0, metric variables are the latent values themselves.
//
// Thresholding attenuates correlations. For a latent correlation r the
// expected observed correlation is r * sqrt(2/pi) between a metric variable and
// the binary label, and (2/pi) * asin(r) between two median-split binaries.
// Both are reported next to the measured values.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ivikit/dataset.hpp"
#include "ivikit/error.hpp"
#include "ivikit/rng.hpp"

namespace ivikit {

enum class BlockKind { metric_pair, categorical_pair, metric_solo, categorical_solo };

inline bool is_pair(BlockKind k) { return k == BlockKind::metric_pair || k == BlockKind::categorical_pair; }
inline bool is_categorical(BlockKind k) { return k == BlockKind::categorical_pair || k == BlockKind::categorical_solo; }

struct SynthBlock {
    BlockKind kind = BlockKind::metric_solo;
    double within_block_corr = 0.0;  // ignored for solo blocks
    double label_corr = 0.0;
};

struct SynthSpec {
    std::size_t n_rows = 1000;
    std::vector<SynthBlock> blocks;
    std::uint64_t seed = 0;
};

struct AchievedCorrelation {
    std::string variable;
    double target = 0.0;    // latent correlation with the label latent
    double expected = 0.0;  // observed correlation implied by thresholding
    double achieved = 0.0;  // measured Pearson correlation with the +-1 label
};

struct SynthDataset {
    MixedTable table;
    LabelVector labels;
    std::vector<AchievedCorrelation> achieved_corrs;  // one per source variable
};

/// Blocks of the two-group, two-singleton fixture: a highly correlated pair of
/// binary categoricals (label correlation 0.7), a highly correlated metric pair
/// (0.1), a lone binary categorical (0.5) and a lone metric variable (0.1).
/// "Highly correlated" is fixed at 0.9. The seed is left to the caller.
inline SynthSpec appendix_preset(std::uint64_t seed = 0) {
    SynthSpec spec;
    spec.n_rows = 1000;
    spec.seed = seed;
    spec.blocks = {
        {BlockKind::categorical_pair, 0.9, 0.7},
        {BlockKind::metric_pair, 0.9, 0.1},
        {BlockKind::categorical_solo, 0.0, 0.5},
        {BlockKind::metric_solo, 0.0, 0.1},
    };
    return spec;
}

/// The same layout with every label correlation set to 0.
inline SynthSpec null_preset(std::uint64_t seed = 0) {
    auto spec = appendix_preset(seed);
    for (auto& b : spec.blocks) b.label_corr = 0.0;
    return spec;
}

namespace detail {

inline std::vector<std::string> block_variable_names(const std::vector<SynthBlock>& blocks) {
    std::vector<std::string> names;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string stem = std::string(is_categorical(blocks[b].kind) ? "cat" : "met") + std::to_string(b + 1);
        if (is_pair(blocks[b].kind)) {
            names.push_back(stem + "_a");
            names.push_back(stem + "_b");
        } else {
            names.push_back(stem);
        }
    }
    return names;
}

/// Latent correlation matrix over (variables..., label) using blocks [0, upto).
inline Eigen::MatrixXd latent_correlation(const std::vector<SynthBlock>& blocks, std::size_t upto) {
    std::size_t vars = 0;
    for (std::size_t b = 0; b < upto; ++b) vars += is_pair(blocks[b].kind) ? 2 : 1;
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(vars + 1), static_cast<Eigen::Index>(vars + 1));
    const auto label = static_cast<Eigen::Index>(vars);
    Eigen::Index v = 0;
    for (std::size_t b = 0; b < upto; ++b) {
        const auto& blk = blocks[b];
        if (is_pair(blk.kind)) {
            r(v, v + 1) = r(v + 1, v) = blk.within_block_corr;
            r(v, label) = r(label, v) = blk.label_corr;
            r(v + 1, label) = r(label, v + 1) = blk.label_corr;
            v += 2;
        } else {
            r(v, label) = r(label, v) = blk.label_corr;
            v += 1;
        }
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= n, mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
    if (spec.n_rows < 2) throw InvalidArgument("synth: need at least 2 rows");
    if (spec.blocks.empty()) throw InvalidArgument("synth: no blocks");
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const auto& blk = spec.blocks[b];
        if (!(std::abs(blk.label_corr) < 1.0)) throw InvalidArgument("synth: block " + std::to_string(b + 1) + " label_corr must lie in (-1, 1)");
        if (is_pair(blk.kind) && !(std::abs(blk.within_block_corr) < 1.0))
            throw InvalidArgument("synth: block " + std::to_string(b + 1) + " within_block_corr must lie in (-1, 1)");
    }
    // grow the matrix block by block so that the first block breaking
    // positive definiteness can be named
    for (std::size_t upto = 1; upto <= spec.blocks.size(); ++upto) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(detail::latent_correlation(spec.blocks, upto), Eigen::EigenvaluesOnly);
        if (!(eig.eigenvalues().minCoeff() > 1e-10))
            throw InvalidArgument("synth: latent correlation matrix is not positive definite once block " + std::to_string(upto) +
                                  " is added");
    }
}

inline FeatureSchema synth_schema(const SynthSpec& spec) {
    FeatureSchema schema;
    schema.label_column = "label";
    schema.id_column = "id";
    const auto names = detail::block_variable_names(spec.blocks);
    std::size_t v = 0;
    for (const auto& blk : spec.blocks) {
        for (int k = 0; k < (is_pair(blk.kind) ? 2 : 1); ++k, ++v) {
            if (is_categorical(blk.kind)) {
                schema.columns.push_back({names[v], FeatureKind::categorical, {"0", "1"}});
            } else {
                schema.columns.push_back({names[v], FeatureKind::metric, {}});
            }
        }
    }
    return schema;
}

inline SynthDataset generate(const SynthSpec& spec) {
    validate(spec);
    const Eigen::MatrixXd corr = detail::latent_correlation(spec.blocks, spec.blocks.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    const Eigen::MatrixXd root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

    const auto p = corr.rows();
    const auto n = static_cast<Eigen::Index>(spec.n_rows);
    Rng rng(spec.seed);
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.normal();
    const Eigen::MatrixXd latent = z * root;

    SynthDataset out;
    out.table.schema = synth_schema(spec);
    out.table.columns.resize(static_cast<std::size_t>(p - 1));
    out.labels.values.resize(spec.n_rows);
    std::vector<double> label_values(spec.n_rows);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int y = latent(i, p - 1) > 0.0 ? 1 : -1;
        out.labels.values[static_cast<std::size_t>(i)] = y;
        label_values[static_cast<std::size_t>(i)] = y;
        out.table.row_ids.push_back(std::to_string(i + 1));
    }
    out.table.labels = out.labels;

    std::size_t v = 0;
    for (const auto& blk : spec.blocks) {
        for (int k = 0; k < (is_pair(blk.kind) ? 2 : 1); ++k, ++v) {
            auto& column = out.table.columns[v];
            column.resize(spec.n_rows);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double l = latent(i, static_cast<Eigen::Index>(v));
                column[static_cast<std::size_t>(i)] = is_categorical(blk.kind) ? (l > 0.0 ? 1.0 : 0.0) : l;
            }
            AchievedCorrelation a;
            a.variable = out.table.schema.columns[v].name;
            a.target = blk.label_corr;
            a.expected = is_categorical(blk.kind) ? 2.0 / std::numbers::pi * std::asin(blk.label_corr)
                                                  : blk.label_corr * std::sqrt(2.0 / std::numbers::pi);
            a.achieved = detail::pearson(column, label_values);
            out.achieved_corrs.push_back(a);
        }
    }
    return out;
}

}  // namespace ivikit
