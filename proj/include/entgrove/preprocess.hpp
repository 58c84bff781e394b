#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entgrove/dataset.hpp"

namespace entgrove {

struct PlanColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    // Numeric: training min/max and median used for imputation.
    double min = 0.0;
    double max = 0.0;
    double impute = 0.0;
    // Categorical: token -> index map in training first-seen order, and the
    // training mode used for imputation and for unseen tokens.
    std::vector<std::string> categories;
    std::string impute_token;
};

// Fitted, replayable data-quality transformation. Immutable once fitted.
struct PreprocessPlan {
    std::vector<PlanColumn> columns;  // feature columns, fitted order
    std::size_t fitted_on_rows = 0;
    std::string label_column;  // name of the label column seen at fit time ("" if none)

    bool empty() const { return columns.empty(); }

    // Feature schema for load_csv_with_schema.
    std::vector<ColumnSchema> feature_schema() const;
};

// Statistics are computed over non-missing training values only. Numeric
// imputation value is the training median (even count: mean of the middle
// two); categorical imputation token is the training mode (ties broken by
// first-seen order). Throws on an empty table or on a numeric column with
// zero non-missing values.
PreprocessPlan fit_plan(const DatasetTable& train);

// Numeric: impute missing, then x -> (x - min) / (max - min) clipped to
// [0,1]; a constant column (max == min) maps to 0. Categorical: impute
// missing, then map tokens to plan indices; unseen tokens map to the
// imputation token's index. The label column, when present, passes through.
// Throws when the table lacks a plan column or a kind disagrees.
DatasetTable apply_plan(const PreprocessPlan& plan, const DatasetTable& table);

nlohmann::json plan_to_json(const PreprocessPlan& plan);
PreprocessPlan plan_from_json(const nlohmann::json& j);

}  // namespace entgrove
