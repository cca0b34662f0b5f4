#include <gtest/gtest.h>

#include <map>

#include "ivikit/synthdata.hpp"

using namespace ivikit;

TEST(Synth, PresetLayout) {
    const auto spec = appendix_preset(1);
    ASSERT_EQ(spec.blocks.size(), 4u);
    EXPECT_EQ(spec.n_rows, 1000u);
    const double label_corrs[] = {0.7, 0.1, 0.5, 0.1};
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(spec.blocks[b].label_corr, label_corrs[b]);
    const auto data = generate(spec);
    EXPECT_EQ(data.table.schema.columns.size(), 6u);
    EXPECT_EQ(data.table.rows(), 1000u);
    EXPECT_EQ(data.table.schema.encoded_width(), 9u);
    const auto x = one_hot_encode(data.table);
    EXPECT_EQ(x.cols(), 9u);
    EXPECT_EQ(data.achieved_corrs.size(), 6u);
}

TEST(Synth, CategoricalIndicatorsAreComplementary) {
    const auto x = one_hot_encode(generate(appendix_preset(2)).table);
    for (auto start : {0, 2, 6}) {
        const Eigen::VectorXd sum = x.values.col(start) + x.values.col(start + 1);
        EXPECT_TRUE((sum.array() == 1.0).all());
    }
}

TEST(Synth, Deterministic) {
    EXPECT_EQ(format_csv(generate(appendix_preset(3)).table), format_csv(generate(appendix_preset(3)).table));
    EXPECT_NE(format_csv(generate(appendix_preset(3)).table), format_csv(generate(appendix_preset(4)).table));
}

TEST(Synth, AchievedCorrelationsTrackThresholdedTargets) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (const auto& a : generate(appendix_preset(seed)).achieved_corrs) {
            ASSERT_LE(std::abs(a.achieved - a.expected), 0.07) << a.variable << " seed " << seed;
        }
    }
}

TEST(Synth, AchievedCorrelationsAreUnbiased) {
    std::map<std::string, double> mean_dev;
    const int seeds = 200;
    for (std::uint64_t seed = 1000; seed < 1000 + seeds; ++seed)
        for (const auto& a : generate(appendix_preset(seed)).achieved_corrs) mean_dev[a.variable] += (a.achieved - a.expected) / seeds;
    for (const auto& [name, dev] : mean_dev) EXPECT_LT(std::abs(dev), 0.01) << name;
}

TEST(Synth, IndependentMetricSolo) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SynthSpec spec;
        spec.seed = seed;
        spec.blocks = {{BlockKind::metric_solo, 0.0, 0.0}};
        const auto data = generate(spec);
        ASSERT_LE(std::abs(data.achieved_corrs[0].achieved), 0.07);
    }
}

TEST(Synth, NonPositiveDefiniteNamesBlock) {
    SynthSpec spec;
    spec.blocks = {{BlockKind::metric_solo, 0.0, 0.6}, {BlockKind::metric_solo, 0.0, 0.6}, {BlockKind::metric_pair, 0.0, 0.5}};
    try {
        generate(spec);
        FAIL() << "expected an error";
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("block 3"), std::string::npos) << e.what();
    }
    spec.blocks = {{BlockKind::metric_solo, 0.0, 1.0}};
    EXPECT_THROW(generate(spec), InvalidArgument);
}

TEST(Synth, NullPresetHasZeroTargets) {
    for (const auto& b : null_preset(1).blocks) EXPECT_EQ(b.label_corr, 0.0);
}
