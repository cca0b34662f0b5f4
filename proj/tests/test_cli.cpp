#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "ivikit/cli.hpp"

namespace fs = std::filesystem;
using namespace ivikit;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("ivikit_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void synth(const std::string& out = "data") {
        const auto r = run({"synth", "--preset", "appendix", "--seed", "1", "--out-dir", path(out)});
        ASSERT_EQ(r.code, 0) << r.err;
    }

    fs::path dir_;
};

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

void expect_replay_identical(const fs::path& original, const fs::path& replayed) {
    const auto manifest = nlohmann::json::parse(slurp(original / "manifest.json"));
    ASSERT_FALSE(manifest.at("outputs").empty());
    const auto r = run({"replay", "--manifest", (original / "manifest.json").string(), "--out-dir", replayed.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& o : manifest.at("outputs")) {
        const auto name = o.at("file").get<std::string>();
        EXPECT_EQ(slurp(original / name), slurp(replayed / name)) << name;
        EXPECT_EQ(fnv1a_hex(slurp(replayed / name)), o.at("fnv1a64").get<std::string>());
    }
}

}  // namespace

TEST_F(CliTest, UsageErrors) {
    auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("synth"), std::string::npos);
    r = run({"synth", "--seed", "1", "--out-dir", path("x"), "--bogus"});
    EXPECT_EQ(r.code, 2);
    r = run({});
    EXPECT_EQ(r.code, 2);
    r = run({"synth", "--preset", "nope", "--seed", "1", "--out-dir", path("x")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(run({"--version"}).code, 0);
}

TEST_F(CliTest, MissingInputIsIoError) {
    const auto r = run({"ivi", "--in", path("none.csv"), "--schema", path("none.txt"), "--seed", "1", "--out-dir", path("o")});
    EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, BadDataIsDataError) {
    synth();
    std::ofstream(path("bad.csv")) << "id,cat1_a,cat1_b,met2_a,met2_b,cat3,met4,label\n1,0,1,0.5,0.2,7,0.1,1\n";
    const auto r = run({"ivi", "--in", path("bad.csv"), "--schema", path("data/schema.txt"), "--seed", "1", "--out-dir", path("o")});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("cat3"), std::string::npos);
}

TEST_F(CliTest, SynthWritesFilesAndReplays) {
    synth();
    for (auto f : {"data.csv", "schema.txt", "synth.json", "manifest.json"}) EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
    expect_replay_identical(dir_ / "data", dir_ / "data_replay");
    EXPECT_FALSE(fs::exists(dir_ / "data" / "data.csv.tmp"));
}

TEST_F(CliTest, IviSingleAndRepeatedReplay) {
    synth();
    auto r = run({"ivi", "--in", path("data/data.csv"), "--schema", path("data/schema.txt"), "--seed", "3", "--m-runs", "1", "--b-reps", "100",
                  "--out-dir", path("single")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto result = nlohmann::json::parse(slurp(dir_ / "single" / "ivi_result.json"));
    EXPECT_EQ(result.at("mode"), "single");
    EXPECT_NE(slurp(dir_ / "single" / "ivi_graph.dot").find("graph ivi {"), std::string::npos);
    expect_replay_identical(dir_ / "single", dir_ / "single_replay");

    r = run({"ivi", "--in", path("data/data.csv"), "--schema", path("data/schema.txt"), "--seed", "3", "--m-runs", "4", "--b-reps", "50",
             "--threads", "2", "--out-dir", path("multi")});
    ASSERT_EQ(r.code, 0) << r.err;
    expect_replay_identical(dir_ / "multi", dir_ / "multi_replay");
}

TEST_F(CliTest, AeSelectCompareReplay) {
    synth();
    const auto in = path("data/data.csv"), schema = path("data/schema.txt");
    auto r = run({"ae", "--in", in, "--schema", schema, "--seed", "2", "--epochs", "20", "--fine-tune", "--fine-tune-epochs", "10",
                  "--out-dir", path("ae")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir_ / "ae" / "latent.csv").substr(0, 26), "row_id,h1,h2,h3,label,spli");
    EXPECT_TRUE(parse_model(slurp(dir_ / "ae" / "model.txt")).head.has_value());
    expect_replay_identical(dir_ / "ae", dir_ / "ae_replay");

    r = run({"select", "--in", in, "--schema", schema, "--method", "mrmr", "--out-dir", path("sel")});
    ASSERT_EQ(r.code, 0) << r.err;
    expect_replay_identical(dir_ / "sel", dir_ / "sel_replay");

    r = run({"compare", "--in", in, "--schema", schema, "--seed", "4", "--set", "pair=0,1", "--with-ivi", "--out-dir", path("cmp")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(dir_ / "cmp" / "comparison.csv");
    EXPECT_NE(csv.find("\nall,9,"), std::string::npos);
    EXPECT_NE(csv.find("\npair,2,"), std::string::npos);
    EXPECT_NE(csv.find("\nivi,"), std::string::npos);
    expect_replay_identical(dir_ / "cmp", dir_ / "cmp_replay");

    EXPECT_EQ(run({"compare", "--in", in, "--schema", schema, "--seed", "4", "--set", "bad=0,99", "--out-dir", path("cmp2")}).code, 2);
}

TEST_F(CliTest, ReplayDetectsChangedInput) {
    synth();
    auto r = run({"select", "--in", path("data/data.csv"), "--schema", path("data/schema.txt"), "--out-dir", path("sel")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ofstream(path("data/data.csv"), std::ios::app) << "1001,0,0,0,0,0,0,1\n";
    r = run({"replay", "--manifest", path("sel/manifest.json"), "--out-dir", path("sel2")});
    EXPECT_EQ(r.code, 4);
}

TEST(Dot, EmptyAndDeterministic) {
    IviResult empty;
    EXPECT_EQ(export_dot(empty, {}), "graph ivi {\n  node [shape=ellipse, style=filled, fontcolor=white];\n}\n");

    IviResult r;
    r.relevance.features = {{-0.4, -0.5, -0.3, true}, {0.2, 0.1, 0.3, true}, {0.0, -0.1, 0.1, false}};
    r.graph.nodes = 3;
    r.graph.edges = {{0, 1, -0.812}, {1, 2, 0.9}};
    r.split.informative = {0, 1};
    const auto dot = export_dot(r, {"a", "b\"q", "c"});
    EXPECT_EQ(dot, export_dot(r, {"a", "b\"q", "c"}));
    EXPECT_NE(dot.find("n0 [label=\"a (0)\", fillcolor=red]"), std::string::npos);
    EXPECT_NE(dot.find("n1 [label=\"b\\\"q (1)\", fillcolor=blue]"), std::string::npos);
    EXPECT_NE(dot.find("n0 -- n1 [color=magenta, label=\"-0.812\""), std::string::npos);
    EXPECT_EQ(dot.find("n2"), std::string::npos);
}
