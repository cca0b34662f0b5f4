#pragma once

// Command-line front end: synth, ivi, ae, select, compare, plus replay of a
// previous run from its manifest. Every run writes manifest.json next to its
// outputs; the manifest records the fully resolved argument list, so that
// `replay` reproduces the outputs byte for byte.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ivikit/autoencoder.hpp"
#include "ivikit/dataset.hpp"
#include "ivikit/dot_export.hpp"
#include "ivikit/error.hpp"
#include "ivikit/eval.hpp"
#include "ivikit/io.hpp"
#include "ivikit/ivi.hpp"
#include "ivikit/selectors.hpp"
#include "ivikit/synthdata.hpp"

namespace ivikit::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kIo = 3,
    kData = 4,
    kNumeric = 5,
};

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return kUsage;
        case ErrorCode::io: return kIo;
        case ErrorCode::data: return kData;
        case ErrorCode::numeric: return kNumeric;
    }
    return kInternal;
}

namespace detail {

using nlohmann::json;
namespace fs = std::filesystem;

inline std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string absolute_path(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

/// Collects output files and writes the manifest last.
class RunRecorder {
public:
    RunRecorder(std::string subcommand, fs::path out_dir) : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)) {}

    void arg(const std::string& flag, const std::string& value) {
        args_.push_back(flag);
        args_.push_back(value);
        config_[flag.substr(2)] = value;
    }
    void arg(const std::string& flag, double value) { arg(flag, exact(value)); }
    void arg(const std::string& flag, std::uint64_t value) { arg(flag, std::to_string(value)); }
    void flag(const std::string& flag) {
        args_.push_back(flag);
        config_[flag.substr(2)] = true;
    }

    std::string input(const std::string& flag, const std::string& path) {
        const auto abs = absolute_path(path);
        const auto content = read_text_file(abs);
        inputs_.push_back({{"flag", flag}, {"path", abs}, {"fnv1a64", fnv1a_hex(content)}});
        arg(flag, abs);
        return content;
    }

    void output(const std::string& name, const std::string& content) {
        write_file_atomic(out_dir_ / name, content);
        outputs_.push_back({{"file", name}, {"fnv1a64", fnv1a_hex(content)}});
    }

    void finish(std::ostream& out) {
        json manifest;
        manifest["tool"] = "ivikit";
        manifest["version"] = kVersion;
        manifest["subcommand"] = subcommand_;
        json args = json::array({subcommand_});
        for (const auto& a : args_) args.push_back(a);
        manifest["args"] = args;
        manifest["config"] = config_;
        manifest["inputs"] = inputs_;
        manifest["outputs"] = outputs_;
        write_file_atomic(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
        out << subcommand_ << ": wrote " << outputs_.size() << " file(s) and manifest.json to " << out_dir_.string() << '\n';
    }

private:
    std::string subcommand_;
    fs::path out_dir_;
    std::vector<std::string> args_;
    json config_ = json::object();
    json inputs_ = json::array();
    json outputs_ = json::array();
};

struct LoadedData {
    MixedTable table;
    DesignMatrix encoded;  // not standardized
    LabelVector labels;
    std::vector<std::string> names;
};

inline LoadedData load_labeled(RunRecorder& rec, const std::string& csv_path, const std::string& schema_path) {
    const auto schema_text = rec.input("--schema", schema_path);
    const auto schema = parse_schema(schema_text);
    if (schema.label_column.empty()) throw DataError("schema declares no label column");
    const auto csv_text = rec.input("--in", csv_path);
    LoadedData d;
    d.table = parse_csv(csv_text, schema);
    d.labels = *d.table.labels;
    d.labels.require_both_classes("input");
    d.encoded = one_hot_encode(d.table);
    for (const auto& c : d.encoded.columns) d.names.push_back(c.name());
    return d;
}

inline json relevance_json(const RelevanceReport& rel, const std::vector<std::string>& names, const std::vector<std::size_t>& informative) {
    std::vector<bool> inf(rel.features.size(), false);
    for (auto f : informative) inf[f] = true;
    json out = json::array();
    for (std::size_t i = 0; i < rel.features.size(); ++i) {
        const auto& f = rel.features[i];
        out.push_back({{"index", i},
                       {"name", names[i]},
                       {"mean_weight", f.mean},
                       {"ci_lower", f.lower},
                       {"ci_upper", f.upper},
                       {"relevant", f.relevant},
                       {"informative", static_cast<bool>(inf[i])},
                       {"sign", f.mean > 0 ? 1 : (f.mean < 0 ? -1 : 0)}});
    }
    return out;
}

inline json ranking_json(const std::vector<RankedFeature>& ranking, const std::vector<std::string>& names) {
    json out = json::array();
    for (const auto& r : ranking) {
        json item = {{"index", r.index}, {"name", names[r.index]}, {"degenerate", r.degenerate}};
        item["score"] = std::isfinite(r.score) ? json(r.score) : json("inf");
        out.push_back(item);
    }
    return out;
}

inline json edge_measure_json(const std::vector<EdgeMeasure>& edges) {
    json out = json::array();
    for (const auto& e : edges)
        out.push_back({{"m", e.m}, {"n", e.n}, {"abs_sum", e.abs_sum}, {"signed_sum", e.signed_sum}, {"runs_present", e.count}});
    return out;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
    std::string preset = "appendix";
    std::uint64_t seed = 0;
    std::size_t rows = 1000;
    std::string out_dir;
};

inline void run_synth(const SynthOptions& o, std::ostream& out) {
    RunRecorder rec("synth", o.out_dir);
    rec.arg("--preset", o.preset);
    rec.arg("--seed", o.seed);
    rec.arg("--rows", std::to_string(o.rows));
    SynthSpec spec;
    if (o.preset == "appendix") spec = appendix_preset(o.seed);
    else if (o.preset == "null") spec = null_preset(o.seed);
    else throw InvalidArgument("unknown preset '" + o.preset + "' (expected appendix or null)");
    spec.n_rows = o.rows;
    const auto data = generate(spec);
    json summary;
    summary["rows"] = spec.n_rows;
    summary["seed"] = spec.seed;
    summary["encoded_width"] = data.table.schema.encoded_width();
    json corrs = json::array();
    for (const auto& a : data.achieved_corrs)
        corrs.push_back({{"variable", a.variable}, {"latent_target", a.target}, {"expected_observed", a.expected}, {"achieved", a.achieved}});
    summary["label_correlations"] = corrs;
    rec.output("data.csv", format_csv(data.table));
    rec.output("schema.txt", format_schema(data.table.schema));
    rec.output("synth.json", summary.dump(2) + "\n");
    rec.finish(out);
}

struct IviOptions {
    std::string in, schema, out_dir;
    std::string estimator = "corr-cme";
    int cme_g = 1;
    std::size_t b_reps = 500;
    double alpha = 0.05;
    double rho_th = 0.5;
    std::size_t m_runs = 100;
    double keep_frac = 0.9;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
};

inline void run_ivi_command(const IviOptions& o, std::ostream& out) {
    RunRecorder rec("ivi", o.out_dir);
    auto data = load_labeled(rec, o.in, o.schema);
    rec.arg("--estimator", o.estimator);
    rec.arg("--cme-g", std::to_string(o.cme_g));
    rec.arg("--b-reps", std::to_string(o.b_reps));
    rec.arg("--alpha", o.alpha);
    rec.arg("--rho-th", o.rho_th);
    rec.arg("--m-runs", std::to_string(o.m_runs));
    rec.arg("--keep-frac", o.keep_frac);
    rec.arg("--seed", o.seed);

    IviConfig cfg;
    cfg.estimator.kind = parse_estimator(o.estimator);
    cfg.estimator.cme.exponent_g = o.cme_g;
    cfg.b_reps = o.b_reps;
    cfg.alpha = o.alpha;
    cfg.rho_th = o.rho_th;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    const auto x = standardize(data.encoded).values;

    json result;
    result["estimator"] = o.estimator;
    result["b_reps"] = o.b_reps;
    result["alpha"] = o.alpha;
    result["rho_th"] = o.rho_th;
    result["features"] = data.names;
    std::string dot;
    if (o.m_runs >= 2) {
        ProbabilisticIviConfig pcfg{cfg, o.m_runs, o.keep_frac, o.seed};
        const auto res = run_probabilistic_ivi(x, data.labels, pcfg);
        result["mode"] = "probabilistic";
        result["m_runs"] = res.runs;
        result["keep_fraction"] = o.keep_frac;
        json freq = json::array();
        for (std::size_t f = 0; f < res.appearance_freq.size(); ++f)
            freq.push_back({{"index", f}, {"name", data.names[f]}, {"runs_informative", res.appearance_count[f]},
                            {"frequency", res.appearance_freq[f]}, {"mean_weight", res.mean_weight[f]}});
        result["appearance"] = freq;
        result["stable_features"] = res.stable_features;
        result["edges"] = edge_measure_json(res.edges);
        result["candidate_edges"] = edge_measure_json(res.candidate_edges);
        result["cutoff"] = res.cutoff;
        result["kept_edges"] = edge_measure_json(res.kept_edges);
        dot = export_dot(res, data.names);
    } else {
        const auto res = run_ivi(x, data.labels, cfg);
        result["mode"] = "single";
        result["relevance"] = relevance_json(res.relevance, data.names, res.informative());
        json edges = json::array();
        for (const auto& e : res.graph.edges) edges.push_back({{"m", e.m}, {"n", e.n}, {"rho", e.rho}});
        result["edges"] = edges;
        result["components"] = res.split.components;
        result["informative"] = res.informative();
        result["ranking"] = ranking_json(res.ranking, data.names);
        result["zero_variance_features"] = res.graph.zero_variance;
        dot = export_dot(res, data.names);
    }
    rec.output("ivi_result.json", result.dump(2) + "\n");
    rec.output("ivi_graph.dot", dot);
    rec.finish(out);
}

struct AeOptions {
    std::string in, schema, out_dir;
    std::size_t latent_dim = 3;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t head_epochs = 200;
    std::size_t fine_tune_epochs = 200;
    double test_frac = 0.3;
    bool fine_tune = false;
    std::uint64_t seed = 0;
};

inline std::string latent_csv(const Eigen::MatrixXd& codes, const LoadedData& data, const SplitIndices& split) {
    std::vector<std::string> side(data.labels.size(), "train");
    for (auto i : split.test) side[i] = "test";
    std::ostringstream out;
    out << "row_id";
    for (Eigen::Index k = 0; k < codes.cols(); ++k) out << ",h" << (k + 1);
    out << ",label,split\n";
    for (Eigen::Index i = 0; i < codes.rows(); ++i) {
        out << data.table.row_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < codes.cols(); ++k) out << ',' << exact(codes(i, k));
        out << ',' << data.labels[static_cast<std::size_t>(i)] << ',' << side[static_cast<std::size_t>(i)] << '\n';
    }
    return out.str();
}

inline json metrics_json(const Metrics& m) {
    return {{"accuracy", m.accuracy}, {"auc", m.auc}, {"tp", m.true_positive}, {"tn", m.true_negative},
            {"fp", m.false_positive}, {"fn", m.false_negative}};
}

inline void run_ae(const AeOptions& o, std::ostream& out) {
    RunRecorder rec("ae", o.out_dir);
    auto data = load_labeled(rec, o.in, o.schema);
    rec.arg("--latent-dim", std::to_string(o.latent_dim));
    rec.arg("--epochs", std::to_string(o.epochs));
    rec.arg("--batch-size", std::to_string(o.batch_size));
    rec.arg("--lr", o.learning_rate);
    rec.arg("--momentum", o.momentum);
    rec.arg("--head-epochs", std::to_string(o.head_epochs));
    rec.arg("--fine-tune-epochs", std::to_string(o.fine_tune_epochs));
    rec.arg("--test-frac", o.test_frac);
    rec.arg("--seed", o.seed);
    if (o.fine_tune) rec.flag("--fine-tune");

    LatentPipelineConfig cfg;
    cfg.latent_dim = o.latent_dim;
    cfg.autoencoder = TrainConfig{o.epochs, o.batch_size, o.learning_rate, o.momentum, 0, std::nullopt};
    cfg.head_epochs = o.head_epochs;
    cfg.fine_tune_epochs = o.fine_tune_epochs;
    cfg.test_fraction = o.test_frac;
    cfg.fine_tune = o.fine_tune;
    cfg.seed = o.seed;
    const auto res = run_latent_pipeline(data.encoded, data.labels, cfg);
    const auto& all = res.standardized.values;

    json metrics;
    metrics["reconstruction_mse_initial"] = res.autoencoder.initial_loss;
    metrics["reconstruction_mse_final"] = res.autoencoder.loss_trace.empty() ? res.autoencoder.initial_loss : res.autoencoder.loss_trace.back();
    metrics["reconstruction_loss_trace"] = res.autoencoder.loss_trace;
    metrics["head_loss_trace"] = res.head.loss_trace;
    metrics["frozen_head_test"] = metrics_json(res.frozen_test);
    rec.output("latent.csv", latent_csv(encode(res.autoencoder.model, all), data, res.split));
    if (res.tuned) {
        metrics["fine_tuned_test"] = metrics_json(*res.tuned_test);
        metrics["fine_tune_loss_trace"] = res.tuned->loss_trace;
        rec.output("latent_finetuned.csv", latent_csv(encode(res.tuned->model, all), data, res.split));
        rec.output("model.txt", format_model(res.tuned->model, res.tuned->head));
    } else {
        rec.output("model.txt", format_model(res.autoencoder.model, res.head.head));
    }
    rec.output("ae_metrics.json", metrics.dump(2) + "\n");
    rec.finish(out);
}

struct SelectOptions {
    std::string in, schema, out_dir;
    std::string method = "JMI";
    std::size_t bins = 0;
    std::size_t max_k = 0;
    std::size_t relief_k = 10;
    double mifs_beta = 1.0;
    std::uint64_t seed = 0;
};

inline void run_select(const SelectOptions& o, std::ostream& out) {
    RunRecorder rec("select", o.out_dir);
    auto data = load_labeled(rec, o.in, o.schema);
    rec.arg("--method", o.method);
    rec.arg("--bins", std::to_string(o.bins));
    rec.arg("--max-k", std::to_string(o.max_k));
    rec.arg("--relief-k", std::to_string(o.relief_k));
    rec.arg("--mifs-beta", o.mifs_beta);
    rec.arg("--seed", o.seed);
    SelectorKind kind{parse_selector(o.method), o.mifs_beta, o.relief_k};
    const auto x = standardize(data.encoded);
    const auto ranking = rank_features(kind, x, data.labels, MiConfig{o.bins}, o.max_k, o.seed);
    std::ostringstream csv;
    csv << "step,column,feature,score,within_stop\n";
    for (std::size_t s = 0; s < ranking.order.size(); ++s)
        csv << (s + 1) << ',' << ranking.order[s] << ',' << data.names[ranking.order[s]] << ',' << exact(ranking.scores[s]) << ','
            << (s < ranking.stop_k ? 1 : 0) << '\n';
    json summary = {{"method", std::string(to_string(kind.method))}, {"stop_k", ranking.stop_k}, {"order", ranking.order},
                    {"scores", ranking.scores}, {"warnings", ranking.warnings}};
    rec.output("ranking.csv", csv.str());
    rec.output("selection.json", summary.dump(2) + "\n");
    rec.finish(out);
}

struct CompareOptions {
    std::string in, schema, out_dir;
    std::vector<std::string> sets;
    std::string ivi_result;
    bool with_ivi = false;
    double test_frac = 0.3;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
};

inline std::vector<std::size_t> parse_index_list(const std::string& text, std::size_t limit) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    for (const auto& tok : ivikit::detail::split(text, ',')) {
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() || v >= limit) throw InvalidArgument("bad column index '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

inline void run_compare(const CompareOptions& o, std::ostream& out) {
    RunRecorder rec("compare", o.out_dir);
    auto data = load_labeled(rec, o.in, o.schema);
    std::vector<FeatureSet> sets;
    std::vector<std::size_t> all(data.encoded.cols());
    std::iota(all.begin(), all.end(), std::size_t{0});
    sets.push_back({"all", all});
    for (const auto& s : o.sets) {
        rec.arg("--set", s);
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects NAME=i,j,...");
        sets.push_back({s.substr(0, eq), parse_index_list(s.substr(eq + 1), data.encoded.cols())});
    }
    if (!o.ivi_result.empty()) {
        const auto parsed = json::parse(rec.input("--ivi-result", o.ivi_result));
        const auto& key = parsed.at("mode") == "probabilistic" ? parsed.at("stable_features") : parsed.at("informative");
        sets.push_back({"ivi-file", key.get<std::vector<std::size_t>>()});
    }
    rec.arg("--test-frac", o.test_frac);
    rec.arg("--folds", std::to_string(o.folds));
    rec.arg("--seed", o.seed);
    const SplitConfig split_cfg{o.test_frac, derive_seed(o.seed, 0)};
    CvConfig cv;
    cv.folds = o.folds;
    cv.seed = derive_seed(o.seed, 1);
    if (o.with_ivi) {
        rec.flag("--with-ivi");
        // selection sees the training rows only
        const auto split = train_test_split(data.encoded, data.labels, split_cfg.test_fraction, split_cfg.seed);
        IviConfig icfg;
        icfg.seed = derive_seed(o.seed, 2);
        const auto res = run_ivi(standardize(split.train.x).values, split.train.y, icfg);
        sets.push_back({"ivi", res.informative()});
    }
    const auto table = compare_feature_sets(sets, data.encoded, data.labels, split_cfg, cv);
    rec.output("comparison.csv", format_comparison_csv(table));
    rec.finish(out);
}

}  // namespace detail

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

inline int run_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    const auto manifest = json::parse(read_text_file(manifest_path));
    for (const auto& input : manifest.at("inputs")) {
        const auto path = input.at("path").get<std::string>();
        if (fnv1a_hex(read_text_file(path)) != input.at("fnv1a64").get<std::string>())
            throw DataError("replay: input '" + path + "' changed since the recorded run");
    }
    auto args = manifest.at("args").get<std::vector<std::string>>();
    args.push_back("--out-dir");
    args.push_back(out_dir);
    return dispatch(args, out, err);
}

}  // namespace detail

/// Runs one subcommand. Returns 0 on success, 2 for usage errors, 3 for I/O,
/// 4 for data and 5 for numeric failures.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"informative variable identification, autoencoder embeddings and baseline selectors", "ivikit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::size_t threads = 0;

    detail::SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic mixed dataset");
    synth_cmd->add_option("--preset", synth.preset, "appendix | null")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "random seed")->required();
    synth_cmd->add_option("--rows", synth.rows, "number of rows")->capture_default_str();
    synth_cmd->add_option("--out-dir,--out", synth.out_dir, "output directory")->required();

    detail::IviOptions ivi;
    auto* ivi_cmd = app.add_subcommand("ivi", "informative variable identification");
    ivi_cmd->add_option("--in", ivi.in, "input CSV")->required();
    ivi_cmd->add_option("--schema", ivi.schema, "schema sidecar")->required();
    ivi_cmd->add_option("--estimator", ivi.estimator, "corr-cme | cme | logistic")->capture_default_str();
    ivi_cmd->add_option("--cme-g", ivi.cme_g, "CME element-wise exponent")->capture_default_str();
    ivi_cmd->add_option("--b-reps", ivi.b_reps, "bootstrap replicates")->capture_default_str();
    ivi_cmd->add_option("--alpha", ivi.alpha, "1 - confidence level")->capture_default_str();
    ivi_cmd->add_option("--rho-th", ivi.rho_th, "redundancy threshold")->capture_default_str();
    ivi_cmd->add_option("--m-runs", ivi.m_runs, "repeated runs (1 = single run)")->capture_default_str();
    ivi_cmd->add_option("--keep-frac", ivi.keep_frac, "appearance fraction to keep a feature")->capture_default_str();
    ivi_cmd->add_option("--seed", ivi.seed, "master seed")->required();
    ivi_cmd->add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it");
    ivi_cmd->add_option("--out-dir,--out", ivi.out_dir, "output directory")->required();

    detail::AeOptions ae;
    auto* ae_cmd = app.add_subcommand("ae", "autoencoder latent embedding with logistic head");
    ae_cmd->add_option("--in", ae.in, "input CSV")->required();
    ae_cmd->add_option("--schema", ae.schema, "schema sidecar")->required();
    ae_cmd->add_option("--latent-dim", ae.latent_dim, "latent size")->capture_default_str();
    ae_cmd->add_option("--epochs", ae.epochs, "autoencoder epochs")->capture_default_str();
    ae_cmd->add_option("--batch-size", ae.batch_size, "mini-batch size")->capture_default_str();
    ae_cmd->add_option("--lr", ae.learning_rate, "learning rate")->capture_default_str();
    ae_cmd->add_option("--momentum", ae.momentum, "momentum")->capture_default_str();
    ae_cmd->add_option("--head-epochs", ae.head_epochs, "frozen-encoder head epochs")->capture_default_str();
    ae_cmd->add_option("--fine-tune-epochs", ae.fine_tune_epochs, "fine-tuning epochs")->capture_default_str();
    ae_cmd->add_option("--test-frac", ae.test_frac, "test fraction")->capture_default_str();
    ae_cmd->add_flag("--fine-tune", ae.fine_tune, "fine tune encoder and head jointly");
    ae_cmd->add_option("--seed", ae.seed, "master seed")->required();
    ae_cmd->add_option("--out-dir,--out", ae.out_dir, "output directory")->required();

    detail::SelectOptions sel;
    auto* sel_cmd = app.add_subcommand("select", "baseline feature ranking");
    sel_cmd->add_option("--in", sel.in, "input CSV")->required();
    sel_cmd->add_option("--schema", sel.schema, "schema sidecar")->required();
    sel_cmd->add_option("--method", sel.method, "MIM MIFS MRMR JMI CMIM CIFE ICAP DISR CondRed CMI Relief")->capture_default_str();
    sel_cmd->add_option("--bins", sel.bins, "metric bins (0 = min(10, sqrt(L)))")->capture_default_str();
    sel_cmd->add_option("--max-k", sel.max_k, "features to rank (0 = all)")->capture_default_str();
    sel_cmd->add_option("--relief-k", sel.relief_k, "Relief neighbors")->capture_default_str();
    sel_cmd->add_option("--mifs-beta", sel.mifs_beta, "MIFS redundancy weight")->capture_default_str();
    sel_cmd->add_option("--seed", sel.seed, "seed")->capture_default_str();
    sel_cmd->add_option("--out-dir,--out", sel.out_dir, "output directory")->required();

    detail::CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "classifier comparison over feature subsets");
    cmp_cmd->add_option("--in", cmp.in, "input CSV")->required();
    cmp_cmd->add_option("--schema", cmp.schema, "schema sidecar")->required();
    cmp_cmd->add_option("--set", cmp.sets, "NAME=i,j,... encoded column subset (repeatable)");
    cmp_cmd->add_option("--ivi-result", cmp.ivi_result, "add the informative/stable set of an ivi_result.json");
    cmp_cmd->add_flag("--with-ivi", cmp.with_ivi, "add a set chosen by IVI on the training split");
    cmp_cmd->add_option("--test-frac", cmp.test_frac, "test fraction")->capture_default_str();
    cmp_cmd->add_option("--folds", cmp.folds, "cross-validation folds")->capture_default_str();
    cmp_cmd->add_option("--seed", cmp.seed, "master seed")->required();
    cmp_cmd->add_option("--out-dir,--out", cmp.out_dir, "output directory")->required();

    std::string manifest_path, replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded run from its manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest.json of the run")->required();
    replay_cmd->add_option("--out-dir,--out", replay_out, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (*synth_cmd) detail::run_synth(synth, out);
        else if (*ivi_cmd) {
            ivi.threads = threads;
            detail::run_ivi_command(ivi, out);
        } else if (*ae_cmd) detail::run_ae(ae, out);
        else if (*sel_cmd) detail::run_select(sel, out);
        else if (*cmp_cmd) detail::run_compare(cmp, out);
        else if (*replay_cmd) return detail::run_replay(manifest_path, replay_out, out, err);
        return kOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace ivikit::cli
