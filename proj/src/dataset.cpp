#include "entgrove/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "entgrove/rng.hpp"
#include "entgrove/serial.hpp"

namespace entgrove {

namespace {

bool is_missing_token(const std::string& token) {
    return token.empty() || token == "?";
}

bool parse_finite_double(const std::string& token, double& out) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
        return false;
    }
    out = value;
    return true;
}

// RFC-4180 tokenizer. Records are separated by LF or CRLF; quoted cells may
// contain the delimiter, doubled quotes, and line breaks.
std::vector<std::vector<std::string>> parse_delimited(const std::string& text, char delimiter) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool cell_started = false;

    auto end_cell = [&]() {
        record.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_record = [&]() {
        end_cell();
        // A completely blank line is not a record.
        if (!(record.size() == 1 && record[0].empty())) {
            records.push_back(std::move(record));
        }
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        if (c == '"' && !cell_started) {
            in_quotes = true;
            cell_started = true;
        } else if (c == delimiter) {
            end_cell();
        } else if (c == '\n') {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            end_record();
        } else {
            cell.push_back(c);
            cell_started = true;
        }
    }
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    if (cell_started || !cell.empty() || !record.empty()) {
        end_record();
    }
    return records;
}

std::int32_t intern_category(ColumnSchema& column,
                             std::unordered_map<std::string, std::int32_t>& index,
                             const std::string& token) {
    auto it = index.find(token);
    if (it != index.end()) return it->second;
    auto id = static_cast<std::int32_t>(column.observed_categories.size());
    column.observed_categories.push_back(token);
    index.emplace(token, id);
    return id;
}

}  // namespace

const char* column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::label: return "label";
    }
    return "numeric";
}

ColumnKind column_kind_from_name(const std::string& name) {
    if (name == "numeric") return ColumnKind::numeric;
    if (name == "categorical") return ColumnKind::categorical;
    if (name == "label") return ColumnKind::label;
    throw std::runtime_error("unknown column kind: " + name);
}

std::size_t DatasetTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == name) return i;
    }
    throw std::runtime_error("no such column: " + name);
}

const std::string& DatasetTable::label_token(std::size_t row) const {
    if (!has_label()) {
        throw std::runtime_error("table has no label column");
    }
    const Cell& cell = rows.at(row)[label_index];
    return schema[label_index].observed_categories.at(static_cast<std::size_t>(cell.category));
}

std::vector<std::string> DatasetTable::labels() const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.push_back(label_token(r));
    }
    return out;
}

std::vector<std::size_t> DatasetTable::feature_indices() const {
    std::vector<std::size_t> out;
    out.reserve(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i != label_index) out.push_back(i);
    }
    return out;
}

DatasetTable load_csv(const std::string& path, const std::string& label_column,
                      char delimiter) {
    const std::string text = read_text_file(path);
    auto records = parse_delimited(text, delimiter);
    if (records.empty()) {
        throw std::runtime_error("empty file: " + path);
    }

    const std::vector<std::string>& header = records.front();
    const std::size_t width = header.size();
    std::size_t label_col = DatasetTable::kNoLabel;
    for (std::size_t i = 0; i < width; ++i) {
        if (header[i] == label_column) {
            label_col = i;
            break;
        }
    }
    if (label_col == DatasetTable::kNoLabel) {
        throw std::runtime_error("header of " + path + " has no column '" + label_column + "'");
    }

    // Sanitize: keep only rows with the right arity and a non-missing label.
    std::vector<const std::vector<std::string>*> retained;
    std::size_t dropped = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != width || is_missing_token(rec[label_col])) {
            ++dropped;
            continue;
        }
        retained.push_back(&rec);
    }
    if (retained.empty()) {
        throw std::runtime_error("no usable rows in " + path +
                                 " (raw rows: " + std::to_string(records.size() - 1) + ")");
    }

    DatasetTable table;
    table.source_path = path;
    table.dropped_row_count = dropped;
    table.label_index = label_col;
    table.schema.resize(width);

    // A column is numeric iff every non-missing cell parses as a finite real.
    for (std::size_t c = 0; c < width; ++c) {
        ColumnSchema& col = table.schema[c];
        col.name = header[c];
        if (c == label_col) {
            col.kind = ColumnKind::label;
            continue;
        }
        col.kind = ColumnKind::numeric;
        double unused = 0.0;
        for (const auto* rec : retained) {
            const std::string& token = (*rec)[c];
            if (is_missing_token(token)) continue;
            if (!parse_finite_double(token, unused)) {
                col.kind = ColumnKind::categorical;
                break;
            }
        }
    }

    std::vector<std::unordered_map<std::string, std::int32_t>> category_index(width);
    table.rows.reserve(retained.size());
    for (const auto* rec : retained) {
        std::vector<Cell> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            const std::string& token = (*rec)[c];
            ColumnSchema& col = table.schema[c];
            if (c != label_col && is_missing_token(token)) {
                row[c] = Cell::missing_cell();
                ++col.missing_count;
                continue;
            }
            if (col.kind == ColumnKind::numeric) {
                double value = 0.0;
                parse_finite_double(token, value);
                row[c] = Cell::num(value);
            } else {
                row[c] = Cell::cat(intern_category(col, category_index[c], token));
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

DatasetTable load_csv_with_schema(const std::string& path,
                                  const std::vector<ColumnSchema>& feature_schema,
                                  const std::string& label_column,
                                  char delimiter) {
    const std::string text = read_text_file(path);
    auto records = parse_delimited(text, delimiter);
    if (records.empty()) {
        throw std::runtime_error("empty file: " + path);
    }
    const std::vector<std::string>& header = records.front();
    const std::size_t file_width = header.size();

    std::unordered_map<std::string, std::size_t> header_index;
    for (std::size_t i = 0; i < file_width; ++i) {
        header_index.emplace(header[i], i);
    }

    std::vector<std::size_t> source_col;  // file column for each output feature
    source_col.reserve(feature_schema.size());
    for (const ColumnSchema& col : feature_schema) {
        auto it = header_index.find(col.name);
        if (it == header_index.end()) {
            throw std::runtime_error("dataset " + path + " is missing required column '" +
                                     col.name + "'");
        }
        source_col.push_back(it->second);
    }

    std::size_t label_source = DatasetTable::kNoLabel;
    if (!label_column.empty()) {
        auto it = header_index.find(label_column);
        if (it != header_index.end()) label_source = it->second;
    }

    DatasetTable table;
    table.source_path = path;
    table.schema.reserve(feature_schema.size() + 1);
    for (const ColumnSchema& col : feature_schema) {
        ColumnSchema out;
        out.name = col.name;
        out.kind = col.kind;
        out.observed_categories = col.observed_categories;
        table.schema.push_back(std::move(out));
    }
    const bool labeled = label_source != DatasetTable::kNoLabel;
    if (labeled) {
        table.label_index = table.schema.size();
        ColumnSchema label;
        label.name = label_column;
        label.kind = ColumnKind::label;
        table.schema.push_back(std::move(label));
    }

    std::vector<std::unordered_map<std::string, std::int32_t>> category_index(table.schema.size());
    for (std::size_t c = 0; c < feature_schema.size(); ++c) {
        for (std::size_t i = 0; i < table.schema[c].observed_categories.size(); ++i) {
            category_index[c].emplace(table.schema[c].observed_categories[i],
                                      static_cast<std::int32_t>(i));
        }
    }

    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != file_width || (labeled && is_missing_token(rec[label_source]))) {
            ++table.dropped_row_count;
            continue;
        }
        std::vector<Cell> row(table.schema.size());
        for (std::size_t c = 0; c < feature_schema.size(); ++c) {
            const std::string& token = rec[source_col[c]];
            ColumnSchema& col = table.schema[c];
            if (is_missing_token(token)) {
                row[c] = Cell::missing_cell();
                ++col.missing_count;
                continue;
            }
            if (col.kind == ColumnKind::numeric) {
                double value = 0.0;
                if (parse_finite_double(token, value)) {
                    row[c] = Cell::num(value);
                } else {
                    // Forced-numeric cell that does not parse: treat as
                    // missing so the preprocess plan can impute it.
                    row[c] = Cell::missing_cell();
                    ++col.missing_count;
                }
            } else {
                row[c] = Cell::cat(intern_category(col, category_index[c], token));
            }
        }
        if (labeled) {
            row[table.label_index] = Cell::cat(intern_category(
                table.schema[table.label_index], category_index[table.label_index],
                rec[label_source]));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw std::runtime_error("no usable rows in " + path);
    }
    return table;
}

ClassManifest class_manifest(const DatasetTable& table) {
    if (table.rows.empty()) {
        throw std::runtime_error("class_manifest: empty table");
    }
    std::map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ++counts[table.label_token(r)];
    }
    ClassManifest manifest;
    manifest.total = table.rows.size();
    manifest.entries.assign(counts.begin(), counts.end());
    return manifest;
}

SplitResult stratified_split(const DatasetTable& table, double train_fraction,
                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must be in (0,1)");
    }
    // Class buckets in sorted-name order; indices within a bucket in file order.
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        buckets[table.label_token(r)].push_back(r);
    }
    for (const auto& [name, indices] : buckets) {
        if (indices.size() < 2) {
            throw std::runtime_error("class '" + name + "' has " +
                                     std::to_string(indices.size()) +
                                     " row(s); need at least 2 to appear on both sides");
        }
    }

    SplitResult split;
    split.seed = seed;
    split.train_fraction = train_fraction;
    SplitMix64 rng(seed);
    for (auto& [name, indices] : buckets) {
        fisher_yates_shuffle(indices, rng);
        const auto n_train = static_cast<std::size_t>(
            std::floor(static_cast<double>(indices.size()) * train_fraction));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            (i < n_train ? split.train_indices : split.validation_indices).push_back(indices[i]);
        }
    }
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.validation_indices.begin(), split.validation_indices.end());
    return split;
}

DatasetTable subset(const DatasetTable& table, const std::vector<std::size_t>& indices) {
    DatasetTable out;
    out.schema = table.schema;
    out.source_path = table.source_path;
    out.label_index = table.label_index;
    for (auto& col : out.schema) col.missing_count = 0;
    out.rows.reserve(indices.size());
    for (std::size_t idx : indices) {
        const auto& row = table.rows.at(idx);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c].is_missing()) ++out.schema[c].missing_count;
        }
        out.rows.push_back(row);
    }
    return out;
}

DatasetTable project(const DatasetTable& table, const std::vector<std::string>& features) {
    std::vector<std::size_t> keep;
    keep.reserve(features.size() + 1);
    for (const auto& name : features) {
        std::size_t idx = table.column_index(name);
        if (idx == table.label_index) {
            throw std::runtime_error("project: '" + name + "' is the label column");
        }
        keep.push_back(idx);
    }
    DatasetTable out;
    out.source_path = table.source_path;
    out.dropped_row_count = table.dropped_row_count;
    for (std::size_t idx : keep) out.schema.push_back(table.schema[idx]);
    if (table.has_label()) {
        out.label_index = out.schema.size();
        out.schema.push_back(table.schema[table.label_index]);
        keep.push_back(table.label_index);
    }
    out.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<Cell> projected;
        projected.reserve(keep.size());
        for (std::size_t idx : keep) projected.push_back(row[idx]);
        out.rows.push_back(std::move(projected));
    }
    return out;
}

nlohmann::json manifest_to_json(const ClassManifest& manifest) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& [name, count] : manifest.entries) {
        classes.push_back({{"name", name}, {"count", count}});
    }
    return nlohmann::json{{"classes", classes}, {"total", manifest.total}};
}

ClassManifest manifest_from_json(const nlohmann::json& j) {
    ClassManifest manifest;
    manifest.total = j.at("total").get<std::size_t>();
    for (const auto& entry : j.at("classes")) {
        manifest.entries.emplace_back(entry.at("name").get<std::string>(),
                                      entry.at("count").get<std::size_t>());
    }
    return manifest;
}

nlohmann::json split_to_json(const SplitResult& split) {
    return nlohmann::json{{"seed", split.seed},
                          {"train_fraction", split.train_fraction},
                          {"train_indices", split.train_indices},
                          {"validation_indices", split.validation_indices}};
}

std::string csv_escape(const std::string& field, char delimiter) {
    const bool needs_quotes = field.find_first_of("\"\r\n") != std::string::npos ||
                              field.find(delimiter) != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const DatasetTable& table, const std::string& path, char delimiter) {
    std::string text;
    for (std::size_t c = 0; c < table.schema.size(); ++c) {
        if (c > 0) text += delimiter;
        text += csv_escape(table.schema[c].name, delimiter);
    }
    text += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) text += delimiter;
            const Cell& cell = row[c];
            if (cell.is_missing()) continue;
            if (cell.kind == CellKind::number) {
                text += double_to_string(cell.number);
            } else {
                text += csv_escape(
                    table.schema[c].observed_categories[static_cast<std::size_t>(cell.category)],
                    delimiter);
            }
        }
        text += '\n';
    }
    write_text_file(path, text);
}

}  // namespace entgrove
