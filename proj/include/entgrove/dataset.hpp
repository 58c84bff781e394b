#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace entgrove {

enum class ColumnKind { numeric, categorical, label };

const char* column_kind_name(ColumnKind kind);
ColumnKind column_kind_from_name(const std::string& name);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // Categorical only; tokens in first-seen order. Cells index into this list.
    std::vector<std::string> observed_categories;
    std::size_t missing_count = 0;
};

enum class CellKind : std::uint8_t { missing, number, category };

struct Cell {
    CellKind kind = CellKind::missing;
    double number = 0.0;
    std::int32_t category = -1;

    static Cell missing_cell() { return Cell{}; }
    static Cell num(double v) { return Cell{CellKind::number, v, -1}; }
    static Cell cat(std::int32_t idx) { return Cell{CellKind::category, 0.0, idx}; }
    bool is_missing() const { return kind == CellKind::missing; }
};

// Columnar-schema tabular dataset. Immutable after load by convention; safe
// for concurrent reads.
struct DatasetTable {
    static constexpr std::size_t kNoLabel = static_cast<std::size_t>(-1);

    std::vector<ColumnSchema> schema;
    std::vector<std::vector<Cell>> rows;  // every row has schema.size() cells
    std::string source_path;
    std::size_t dropped_row_count = 0;
    std::size_t label_index = kNoLabel;

    bool has_label() const { return label_index != kNoLabel; }
    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return schema.size(); }

    // Throws std::runtime_error when the column does not exist.
    std::size_t column_index(const std::string& name) const;

    // Class token of a retained row; requires a label column.
    const std::string& label_token(std::size_t row) const;
    std::vector<std::string> labels() const;

    // Indices of all non-label columns, in schema order.
    std::vector<std::size_t> feature_indices() const;
};

struct ClassManifest {
    // (class name, count), sorted by class name; counts sum to `total`.
    std::vector<std::pair<std::string, std::size_t>> entries;
    std::size_t total = 0;
};

struct SplitResult {
    std::vector<std::size_t> train_indices;       // ascending
    std::vector<std::size_t> validation_indices;  // ascending
    std::uint64_t seed = 0;
    double train_fraction = 0.75;
};

// Loads a delimited file with a header row. RFC-4180 quoting is honored
// (quoted cells may contain the delimiter, doubled quotes, and newlines).
// A column is numeric iff every non-missing cell parses as a finite real;
// otherwise it is categorical. Empty cells and the literal "?" are missing.
// Rows with the wrong cell count or a missing label are dropped and counted.
// Throws on: missing file, header without label_column, zero retained rows.
DatasetTable load_csv(const std::string& path, const std::string& label_column,
                      char delimiter = ',');

// Loads a file against a known feature schema (deployment path). Columns are
// matched by header name; extra file columns are ignored. Column kinds come
// from `feature_schema`, not from inference: a forced-numeric cell that does
// not parse becomes missing. New tokens in a forced-categorical column are
// appended after the schema's categories. The label column is optional; when
// `label_column` is empty or absent from the header the result has no label.
// Rows with the wrong cell count (or, when labeled, a missing label) are
// dropped and counted. Throws when a schema column is absent from the header.
DatasetTable load_csv_with_schema(const std::string& path,
                                  const std::vector<ColumnSchema>& feature_schema,
                                  const std::string& label_column,
                                  char delimiter = ',');

// One entry per distinct label value, sorted by class name.
ClassManifest class_manifest(const DatasetTable& table);

// Per class: row indices are shuffled by a Fisher-Yates permutation over
// SplitMix64 (see rng.hpp), the first floor(n_c * train_fraction) go to
// train and the rest to validation. Classes are processed in sorted-name
// order from a single generator stream, so identical (table, fraction, seed)
// always reproduces identical index lists. Both sides are returned sorted
// ascending. Throws when a class has fewer than 2 rows.
SplitResult stratified_split(const DatasetTable& table, double train_fraction,
                             std::uint64_t seed);

// Row-subset copy preserving schema and label column; per-column
// missing_count is recomputed for the subset.
DatasetTable subset(const DatasetTable& table, const std::vector<std::size_t>& indices);

// Keeps the named feature columns (in the given order) plus the label column.
DatasetTable project(const DatasetTable& table, const std::vector<std::string>& features);

nlohmann::json manifest_to_json(const ClassManifest& manifest);
ClassManifest manifest_from_json(const nlohmann::json& j);

nlohmann::json split_to_json(const SplitResult& split);

// RFC-4180 quoting when the field contains the delimiter, a quote, or a
// newline.
std::string csv_escape(const std::string& field, char delimiter = ',');

// Header plus one line per row. Numeric cells render as shortest
// round-trip decimals, missing cells as empty fields.
void write_csv(const DatasetTable& table, const std::string& path, char delimiter = ',');

}  // namespace entgrove
