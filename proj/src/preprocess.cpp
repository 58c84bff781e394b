#include "entgrove/preprocess.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "entgrove/serial.hpp"

namespace entgrove {

std::vector<ColumnSchema> PreprocessPlan::feature_schema() const {
    std::vector<ColumnSchema> out;
    out.reserve(columns.size());
    for (const PlanColumn& col : columns) {
        ColumnSchema schema;
        schema.name = col.name;
        schema.kind = col.kind;
        schema.observed_categories = col.categories;
        out.push_back(std::move(schema));
    }
    return out;
}

PreprocessPlan fit_plan(const DatasetTable& train) {
    if (train.rows.empty()) {
        throw std::runtime_error("fit_plan: empty training table");
    }
    PreprocessPlan plan;
    plan.fitted_on_rows = train.rows.size();
    if (train.has_label()) {
        plan.label_column = train.schema[train.label_index].name;
    }

    for (std::size_t c : train.feature_indices()) {
        const ColumnSchema& col = train.schema[c];
        PlanColumn out;
        out.name = col.name;
        out.kind = col.kind;

        if (col.kind == ColumnKind::numeric) {
            std::vector<double> values;
            values.reserve(train.rows.size());
            for (const auto& row : train.rows) {
                if (!row[c].is_missing()) values.push_back(row[c].number);
            }
            if (values.empty()) {
                throw std::runtime_error("fit_plan: numeric column '" + col.name +
                                         "' has no non-missing training values");
            }
            std::sort(values.begin(), values.end());
            out.min = values.front();
            out.max = values.back();
            const std::size_t n = values.size();
            out.impute = (n % 2 == 1) ? values[n / 2]
                                      : (values[n / 2 - 1] + values[n / 2]) / 2.0;
        } else {
            // First-seen enumeration and mode over the training subset only;
            // the table's own category list may hold tokens this subset
            // never uses.
            std::unordered_map<std::string, std::size_t> freq;
            std::size_t best_count = 0;
            for (const auto& row : train.rows) {
                if (row[c].is_missing()) continue;
                const std::string& token =
                    col.observed_categories.at(static_cast<std::size_t>(row[c].category));
                auto it = freq.find(token);
                if (it == freq.end()) {
                    out.categories.push_back(token);
                    it = freq.emplace(token, 0).first;
                }
                ++it->second;
                if (it->second > best_count) best_count = it->second;
            }
            for (const std::string& token : out.categories) {
                if (freq[token] == best_count) {
                    out.impute_token = token;  // earliest-seen among the most frequent
                    break;
                }
            }
        }
        plan.columns.push_back(std::move(out));
    }
    return plan;
}

DatasetTable apply_plan(const PreprocessPlan& plan, const DatasetTable& table) {
    std::vector<std::size_t> source_col;
    source_col.reserve(plan.columns.size());
    for (const PlanColumn& col : plan.columns) {
        std::size_t idx = table.column_index(col.name);
        if (table.schema[idx].kind != col.kind) {
            throw std::runtime_error("apply_plan: column '" + col.name + "' is " +
                                     column_kind_name(table.schema[idx].kind) +
                                     " but the plan fitted it as " + column_kind_name(col.kind));
        }
        source_col.push_back(idx);
    }

    DatasetTable out;
    out.source_path = table.source_path;
    out.dropped_row_count = table.dropped_row_count;
    for (const PlanColumn& col : plan.columns) {
        ColumnSchema schema;
        schema.name = col.name;
        schema.kind = col.kind;
        schema.observed_categories = col.categories;
        out.schema.push_back(std::move(schema));
    }
    if (table.has_label()) {
        out.label_index = out.schema.size();
        out.schema.push_back(table.schema[table.label_index]);
    }

    // Token -> plan index, resolved per source column once. Unseen tokens and
    // missing cells both land on the imputation token's index.
    std::vector<std::vector<std::int32_t>> remap(plan.columns.size());
    std::vector<std::int32_t> impute_index(plan.columns.size(), 0);
    for (std::size_t p = 0; p < plan.columns.size(); ++p) {
        const PlanColumn& col = plan.columns[p];
        if (col.kind != ColumnKind::categorical) continue;
        std::unordered_map<std::string, std::int32_t> plan_index;
        for (std::size_t i = 0; i < col.categories.size(); ++i) {
            plan_index.emplace(col.categories[i], static_cast<std::int32_t>(i));
        }
        if (auto it = plan_index.find(col.impute_token); it != plan_index.end()) {
            impute_index[p] = it->second;
        }
        const auto& tokens = table.schema[source_col[p]].observed_categories;
        remap[p].resize(tokens.size(), impute_index[p]);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (auto it = plan_index.find(tokens[i]); it != plan_index.end()) {
                remap[p][i] = it->second;
            }
        }
    }

    out.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<Cell> cells(out.schema.size());
        for (std::size_t p = 0; p < plan.columns.size(); ++p) {
            const PlanColumn& col = plan.columns[p];
            const Cell& cell = row[source_col[p]];
            if (col.kind == ColumnKind::numeric) {
                double x = cell.is_missing() ? col.impute : cell.number;
                double scaled = 0.0;
                if (col.max > col.min) {
                    scaled = std::clamp((x - col.min) / (col.max - col.min), 0.0, 1.0);
                }
                cells[p] = Cell::num(scaled);
            } else {
                std::int32_t plan_cat =
                    cell.is_missing() ? impute_index[p]
                                      : remap[p].at(static_cast<std::size_t>(cell.category));
                cells[p] = Cell::cat(plan_cat);
            }
        }
        if (table.has_label()) {
            cells[out.label_index] = row[table.label_index];
        }
        out.rows.push_back(std::move(cells));
    }
    return out;
}

nlohmann::json plan_to_json(const PreprocessPlan& plan) {
    nlohmann::json columns = nlohmann::json::array();
    for (const PlanColumn& col : plan.columns) {
        nlohmann::json entry{{"name", col.name}, {"kind", column_kind_name(col.kind)}};
        if (col.kind == ColumnKind::numeric) {
            entry["min"] = double_to_string(col.min);
            entry["max"] = double_to_string(col.max);
            entry["impute"] = double_to_string(col.impute);
        } else {
            entry["categories"] = col.categories;
            entry["impute_token"] = col.impute_token;
        }
        columns.push_back(std::move(entry));
    }
    return nlohmann::json{{"columns", columns},
                          {"fitted_on_rows", plan.fitted_on_rows},
                          {"label_column", plan.label_column}};
}

PreprocessPlan plan_from_json(const nlohmann::json& j) {
    PreprocessPlan plan;
    plan.fitted_on_rows = j.at("fitted_on_rows").get<std::size_t>();
    plan.label_column = j.at("label_column").get<std::string>();
    for (const auto& entry : j.at("columns")) {
        PlanColumn col;
        col.name = entry.at("name").get<std::string>();
        col.kind = column_kind_from_name(entry.at("kind").get<std::string>());
        if (col.kind == ColumnKind::numeric) {
            col.min = double_from_string(entry.at("min").get<std::string>());
            col.max = double_from_string(entry.at("max").get<std::string>());
            col.impute = double_from_string(entry.at("impute").get<std::string>());
        } else {
            col.categories = entry.at("categories").get<std::vector<std::string>>();
            col.impute_token = entry.at("impute_token").get<std::string>();
        }
        plan.columns.push_back(std::move(col));
    }
    return plan;
}

}  // namespace entgrove
