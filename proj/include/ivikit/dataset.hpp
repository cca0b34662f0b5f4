#pragma once

// Mixed metric/categorical tables, their schema sidecar, one-hot encoding,
// z-scoring and stratified splitting.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ivikit/error.hpp"
#include "ivikit/rng.hpp"

namespace ivikit {

enum class FeatureKind { metric, categorical };

inline std::string_view to_string(FeatureKind kind) {
    return kind == FeatureKind::metric ? "metric" : "categorical";
}

struct ColumnSpec {
    std::string name;
    FeatureKind kind = FeatureKind::metric;
    std::vector<std::string> categories;  // categorical only, in encoding order

    bool operator==(const ColumnSpec&) const = default;
};

/// Ordered feature columns plus the optional label and row-id columns of a CSV.
struct FeatureSchema {
    std::vector<ColumnSpec> columns;
    std::string label_column;  // empty: unlabeled table
    std::string id_column;     // empty: rows are numbered

    bool operator==(const FeatureSchema&) const = default;

    void validate() const {
        std::set<std::string> seen;
        for (const auto& c : columns) {
            if (c.name.empty()) throw DataError("schema: empty column name");
            if (!seen.insert(c.name).second) throw DataError("schema: duplicate column name '" + c.name + "'");
            if (c.kind == FeatureKind::categorical) {
                if (c.categories.size() < 2)
                    throw DataError("schema: categorical column needs at least 2 categories", 0, c.name);
                std::set<std::string> cats(c.categories.begin(), c.categories.end());
                if (cats.size() != c.categories.size())
                    throw DataError("schema: duplicate category label", 0, c.name);
            } else if (!c.categories.empty()) {
                throw DataError("schema: metric column must not list categories", 0, c.name);
            }
        }
        for (const auto* extra : {&label_column, &id_column}) {
            if (!extra->empty() && seen.count(*extra)) throw DataError("schema: '" + *extra + "' is both a feature and label/id");
        }
        if (!label_column.empty() && label_column == id_column) throw DataError("schema: label and id column coincide");
    }

    std::size_t encoded_width() const {
        std::size_t n = 0;
        for (const auto& c : columns) n += c.kind == FeatureKind::metric ? 1 : c.categories.size();
        return n;
    }
};

/// Binary labels in {-1, +1}.
struct LabelVector {
    std::vector<int> values;

    std::size_t size() const { return values.size(); }
    int operator[](std::size_t i) const { return values[i]; }

    std::size_t count(int label) const { return static_cast<std::size_t>(std::count(values.begin(), values.end(), label)); }
    bool has_both_classes() const { return count(1) > 0 && count(-1) > 0; }

    Eigen::VectorXd as_vector() const {
        Eigen::VectorXd v(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
        return v;
    }

    LabelVector subset(const std::vector<std::size_t>& rows) const {
        LabelVector out;
        out.values.reserve(rows.size());
        for (auto r : rows) out.values.push_back(values[r]);
        return out;
    }

    void require_both_classes(std::string_view context) const {
        if (!has_both_classes()) throw DataError(std::string(context) + ": labels must contain both classes");
    }
};

/// Column-major raw table. Metric cells hold values, categorical cells hold the
/// category index into the schema's category list.
struct MixedTable {
    FeatureSchema schema;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> row_ids;
    std::optional<LabelVector> labels;

    std::size_t rows() const { return columns.empty() ? row_ids.size() : columns.front().size(); }
};

struct EncodedColumn {
    std::size_t source = 0;  // index into schema.columns
    std::string feature;
    FeatureKind kind = FeatureKind::metric;
    std::optional<std::string> category;

    std::string name() const { return category ? feature + "=" + *category : feature; }
};

struct ColumnStats {
    double mean = 0.0;
    double stddev = 1.0;
    bool constant = false;
};

/// L x N numeric matrix with provenance of every encoded column.
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<EncodedColumn> columns;
    std::vector<std::optional<ColumnStats>> stats;  // set for metric columns after standardize()
    std::vector<std::string> row_ids;
    std::vector<std::string> warnings;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    bool is_metric(std::size_t j) const { return columns[j].kind == FeatureKind::metric; }

    DesignMatrix select_rows(const std::vector<std::size_t>& rows) const {
        DesignMatrix out = *this;
        out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
        out.row_ids.clear();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
            if (!row_ids.empty()) out.row_ids.push_back(row_ids[rows[i]]);
        }
        return out;
    }

    DesignMatrix select_columns(const std::vector<std::size_t>& cols_) const {
        DesignMatrix out;
        out.values.resize(values.rows(), static_cast<Eigen::Index>(cols_.size()));
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (cols_[j] >= cols()) throw InvalidArgument("column index " + std::to_string(cols_[j]) + " out of range");
            out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(cols_[j]));
            out.columns.push_back(columns[cols_[j]]);
            out.stats.push_back(stats.empty() ? std::nullopt : stats[cols_[j]]);
        }
        out.row_ids = row_ids;
        out.warnings = warnings;
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<int> parse_label(std::string_view s) {
    if (s == "1" || s == "+1") return 1;
    if (s == "-1") return -1;
    return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Schema sidecar
//
//   # comment
//   version = 1
//   label = <column>          (optional)
//   id = <column>             (optional)
//   column <name> metric
//   column <name> categorical <cat1>,<cat2>,...
//
// Column lines are kept in file order, which fixes the encoded column order.

inline FeatureSchema parse_schema(std::string_view text) {
    FeatureSchema schema;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("column", 0) == 0 && line.size() > 6 && (line[6] == ' ' || line[6] == '\t')) {
            std::istringstream fields{std::string(line.substr(7))};
            std::string name, kind, cats;
            fields >> name >> kind >> cats;
            ColumnSpec spec{name, FeatureKind::metric, {}};
            if (kind == "metric") {
                if (!cats.empty()) throw DataError("schema: metric column takes no categories", line_no, name);
            } else if (kind == "categorical") {
                spec.kind = FeatureKind::categorical;
                spec.categories = detail::split(cats, ',');
            } else {
                throw DataError("schema: unknown column kind '" + kind + "'", line_no, name);
            }
            schema.columns.push_back(std::move(spec));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DataError("schema: unrecognized line", line_no);
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = std::string(detail::trim(line.substr(eq + 1)));
        if (key == "version") {
            if (value != "1") throw DataError("schema: unsupported version '" + value + "'", line_no);
        } else if (key == "label") {
            schema.label_column = value;
        } else if (key == "id") {
            schema.id_column = value;
        } else {
            throw DataError("schema: unknown key '" + std::string(key) + "'", line_no);
        }
    }
    schema.validate();
    return schema;
}

inline std::string format_schema(const FeatureSchema& schema) {
    std::ostringstream out;
    out << "# ivikit schema\nversion = 1\n";
    if (!schema.label_column.empty()) out << "label = " << schema.label_column << '\n';
    if (!schema.id_column.empty()) out << "id = " << schema.id_column << '\n';
    for (const auto& c : schema.columns) {
        out << "column " << c.name << ' ' << to_string(c.kind);
        for (std::size_t k = 0; k < c.categories.size(); ++k) out << (k == 0 ? ' ' : ',') << c.categories[k];
        out << '\n';
    }
    return out.str();
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline FeatureSchema load_schema(const std::string& path) { return parse_schema(read_text_file(path)); }

// ---------------------------------------------------------------------------
// CSV

/// Parses comma-separated text with a header row. Header names must be exactly
/// the schema's feature columns plus its label/id columns, in any order.
inline MixedTable parse_csv(std::string_view text, const FeatureSchema& schema) {
    schema.validate();
    std::istringstream in{std::string(text)};
    std::string raw;
    if (!std::getline(in, raw)) throw DataError("csv: missing header");
    const auto header = detail::split(raw, ',');

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!position.emplace(header[i], i).second) throw DataError("csv: duplicate header name", 1, header[i]);
    }
    std::set<std::string> expected;
    for (const auto& c : schema.columns) expected.insert(c.name);
    if (!schema.label_column.empty()) expected.insert(schema.label_column);
    if (!schema.id_column.empty()) expected.insert(schema.id_column);
    for (const auto& h : header) {
        if (!expected.count(h)) throw DataError("csv: header column not in schema", 1, h);
    }
    for (const auto& e : expected) {
        if (!position.count(e)) throw DataError("csv: schema column missing from header", 1, e);
    }

    MixedTable table;
    table.schema = schema;
    table.columns.resize(schema.columns.size());
    if (!schema.label_column.empty()) table.labels = LabelVector{};

    std::size_t line_no = 1;
    while (std::getline(in, raw)) {
        ++line_no;
        if (detail::trim(raw).empty()) continue;
        const auto cells = detail::split(raw, ',');
        if (cells.size() != header.size())
            throw DataError("csv: expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()), line_no);
        for (std::size_t j = 0; j < schema.columns.size(); ++j) {
            const auto& spec = schema.columns[j];
            const auto& cell = cells[position.at(spec.name)];
            if (cell.empty() || cell == "NA" || cell == "NaN")
                throw DataError("csv: missing value", line_no, spec.name);
            if (spec.kind == FeatureKind::metric) {
                auto v = detail::parse_double(cell);
                if (!v) throw DataError("csv: non-numeric metric value '" + cell + "'", line_no, spec.name);
                table.columns[j].push_back(*v);
            } else {
                auto it = std::find(spec.categories.begin(), spec.categories.end(), cell);
                if (it == spec.categories.end()) throw DataError("csv: unknown category '" + cell + "'", line_no, spec.name);
                table.columns[j].push_back(static_cast<double>(it - spec.categories.begin()));
            }
        }
        if (table.labels) {
            const auto& cell = cells[position.at(schema.label_column)];
            if (cell.empty()) throw DataError("csv: missing label", line_no, schema.label_column);
            auto label = detail::parse_label(cell);
            if (!label) throw DataError("csv: label must be -1 or +1, got '" + cell + "'", line_no, schema.label_column);
            table.labels->values.push_back(*label);
        }
        if (!schema.id_column.empty()) {
            const auto& cell = cells[position.at(schema.id_column)];
            if (cell.empty()) throw DataError("csv: missing row id", line_no, schema.id_column);
            table.row_ids.push_back(cell);
        } else {
            table.row_ids.push_back(std::to_string(table.row_ids.size() + 1));
        }
    }
    return table;
}

inline MixedTable load_csv(const std::string& path, const FeatureSchema& schema) {
    return parse_csv(read_text_file(path), schema);
}

/// Writes the table with header [id,] features..., [label]. Metric values use
/// the shortest round-trip representation.
inline std::string format_csv(const MixedTable& table) {
    const auto& schema = table.schema;
    std::ostringstream out;
    bool first = true;
    auto sep = [&] {
        if (!first) out << ',';
        first = false;
    };
    if (!schema.id_column.empty()) sep(), out << schema.id_column;
    for (const auto& c : schema.columns) sep(), out << c.name;
    if (!schema.label_column.empty()) sep(), out << schema.label_column;
    out << '\n';
    char buf[64];
    for (std::size_t i = 0; i < table.rows(); ++i) {
        first = true;
        if (!schema.id_column.empty()) sep(), out << table.row_ids[i];
        for (std::size_t j = 0; j < schema.columns.size(); ++j) {
            sep();
            const double v = table.columns[j][i];
            if (schema.columns[j].kind == FeatureKind::metric) {
                auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
                out << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
            } else {
                out << schema.columns[j].categories[static_cast<std::size_t>(v)];
            }
        }
        if (!schema.label_column.empty()) sep(), out << (table.labels->values[i] > 0 ? "1" : "-1");
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Encoding

/// Every categorical column with k categories becomes k indicator columns (no
/// reference category is dropped); metric columns are copied unchanged.
inline DesignMatrix one_hot_encode(const MixedTable& table) {
    const auto& schema = table.schema;
    const auto rows = static_cast<Eigen::Index>(table.rows());
    DesignMatrix out;
    out.values = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(schema.encoded_width()));
    out.row_ids = table.row_ids;
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < schema.columns.size(); ++j) {
        const auto& spec = schema.columns[j];
        const auto& data = table.columns[j];
        if (spec.kind == FeatureKind::metric) {
            for (Eigen::Index i = 0; i < rows; ++i) out.values(i, col) = data[static_cast<std::size_t>(i)];
            out.columns.push_back({j, spec.name, FeatureKind::metric, std::nullopt});
            out.stats.push_back(std::nullopt);
            ++col;
            continue;
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto k = static_cast<std::size_t>(data[static_cast<std::size_t>(i)]);
            if (k >= spec.categories.size()) throw DataError("category index out of range", static_cast<std::size_t>(i) + 1, spec.name);
            out.values(i, col + static_cast<Eigen::Index>(k)) = 1.0;
        }
        for (const auto& cat : spec.categories) {
            out.columns.push_back({j, spec.name, FeatureKind::categorical, cat});
            out.stats.push_back(std::nullopt);
        }
        col += static_cast<Eigen::Index>(spec.categories.size());
    }
    return out;
}

/// Rebuilds the feature columns of the source schema from a column map.
inline std::vector<ColumnSpec> decode_column_map(const std::vector<EncodedColumn>& columns) {
    std::vector<ColumnSpec> specs;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto& c = columns[j];
        if (j == 0 || columns[j - 1].source != c.source) specs.push_back({c.feature, c.kind, {}});
        if (c.category) specs.back().categories.push_back(*c.category);
    }
    return specs;
}

/// Sample statistics (n-1 normalization) of one column.
inline ColumnStats column_stats(const Eigen::Ref<const Eigen::VectorXd>& v) {
    ColumnStats s;
    const auto n = v.size();
    s.mean = v.mean();
    if (n < 2) {
        s.stddev = 0.0;
    } else {
        s.stddev = std::sqrt((v.array() - s.mean).square().sum() / static_cast<double>(n - 1));
    }
    s.constant = !(s.stddev > 0.0);
    return s;
}

/// Z-scores metric columns. With `stats` empty the statistics are computed from
/// `matrix` itself; otherwise the given per-column statistics are applied (use
/// this to transform test rows with training statistics). Constant columns are
/// left as-is and recorded in `warnings`.
inline DesignMatrix standardize(const DesignMatrix& matrix, const std::vector<std::optional<ColumnStats>>& stats = {}) {
    if (!stats.empty() && stats.size() != matrix.cols()) throw InvalidArgument("standardize: stats size does not match column count");
    DesignMatrix out = matrix;
    out.stats.assign(matrix.cols(), std::nullopt);
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        if (!matrix.is_metric(j)) continue;
        const auto col = static_cast<Eigen::Index>(j);
        ColumnStats s;
        if (stats.empty()) {
            s = column_stats(matrix.values.col(col));
        } else {
            if (!stats[j]) throw InvalidArgument("standardize: missing stats for metric column '" + matrix.columns[j].name() + "'");
            s = *stats[j];
        }
        out.stats[j] = s;
        if (s.constant) {
            out.warnings.push_back("constant metric column '" + matrix.columns[j].name() + "' left unscaled");
            continue;
        }
        out.values.col(col) = (matrix.values.col(col).array() - s.mean) / s.stddev;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stratified split

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Stratified split. The test size is round(test_fraction * L), allocated to
/// the classes by largest remainder (ties: class -1 first), then clamped so each
/// class keeps at least one row on each side. Within each class (-1 first, then
/// +1) row indices are shuffled with a single Rng(seed) stream and the first
/// n_test of them go to the test side.
inline SplitIndices stratified_split(const LabelVector& labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("train_test_split: test_fraction must lie in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y != 1 && y != -1) throw DataError("labels must be -1 or +1", i + 1);
        by_class[y > 0 ? 1 : 0].push_back(i);
    }
    for (const auto& members : by_class) {
        if (members.size() < 2) throw DataError("train_test_split: every class needs at least 2 members");
    }

    const double total = static_cast<double>(labels.size());
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * total));
    std::size_t alloc[2];
    double remainder[2];
    for (int c = 0; c < 2; ++c) {
        const double quota = static_cast<double>(n_test) * static_cast<double>(by_class[c].size()) / total;
        alloc[c] = static_cast<std::size_t>(std::floor(quota));
        remainder[c] = quota - std::floor(quota);
    }
    while (alloc[0] + alloc[1] < n_test) {
        const int c = remainder[1] > remainder[0] ? 1 : 0;
        ++alloc[c];
        remainder[c] = -1.0;
    }
    for (int c = 0; c < 2; ++c) alloc[c] = std::clamp<std::size_t>(alloc[c], 1, by_class[c].size() - 1);

    Rng rng(seed);
    SplitIndices split;
    for (int c = 0; c < 2; ++c) {
        auto members = by_class[c];
        rng.shuffle(std::span<std::size_t>(members));
        split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(alloc[c]));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(alloc[c]), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

struct LabeledMatrix {
    DesignMatrix x;
    LabelVector y;
};

struct TrainTestSplit {
    SplitIndices indices;
    LabeledMatrix train;
    LabeledMatrix test;
};

inline TrainTestSplit train_test_split(const DesignMatrix& matrix, const LabelVector& labels, double test_fraction, std::uint64_t seed) {
    if (labels.size() != matrix.rows()) throw InvalidArgument("train_test_split: label count does not match row count");
    TrainTestSplit out;
    out.indices = stratified_split(labels, test_fraction, seed);
    out.train = {matrix.select_rows(out.indices.train), labels.subset(out.indices.train)};
    out.test = {matrix.select_rows(out.indices.test), labels.subset(out.indices.test)};
    return out;
}

}  // namespace ivikit
