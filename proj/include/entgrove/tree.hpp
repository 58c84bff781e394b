#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entgrove/dataset.hpp"
#include "entgrove/feature_select.hpp"
#include "entgrove/preprocess.hpp"

namespace entgrove {

enum class Criterion { gain, gain_ratio };

const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

struct TrainConfig {
    Criterion criterion = Criterion::gain_ratio;
    std::optional<std::size_t> max_depth;  // unset: unlimited
    std::size_t min_samples_split = 2;
    double min_gain = 0.0;
    // Pipeline flag: reduced-error pruning runs as a separate pass over a
    // held-out set (see prune_reduced_error); induction itself never prunes.
    bool prune = false;
    std::uint64_t seed = 0;  // provenance echo; induction is deterministic
};

// Every node carries the class distribution of the training rows that
// reached it; internal nodes keep it so a pruned subtree can collapse into a
// leaf and so empty partitions can inherit the parent distribution.
struct TreeNode {
    std::map<std::string, std::uint64_t> class_counts;
    std::string majority;  // argmax of class_counts, ties to smallest token

    std::string feature;            // internal only
    std::int32_t feature_index = -1;  // position in selected_features
    bool threshold_split = false;
    double threshold = 0.0;  // value <= threshold goes to children[0]
    std::vector<std::vector<std::int32_t>> category_sets;  // one set per child
    std::vector<TreeNode> children;  // empty => leaf

    bool is_leaf() const { return children.empty(); }
    std::uint64_t total_count() const;
};

std::size_t node_count(const TreeNode& node);

struct TrainedModel {
    TreeNode root;
    TrainConfig config;
    PreprocessPlan plan;  // identity when induced on an already-transformed table
    std::vector<std::string> selected_features;
    std::vector<ColumnKind> feature_kinds;                   // aligned
    std::vector<std::vector<std::string>> feature_categories;  // aligned; empty for numeric
    std::vector<std::string> class_order;                    // sorted class tokens
    ClassManifest training_manifest;
};

struct SplitChoice {
    std::size_t column;  // table column index of the chosen feature
    bool threshold_split = false;
    double threshold = 0.0;
    double score = 0.0;  // criterion value
};

// Evaluates every candidate split over the given rows: for a numeric column,
// each midpoint between consecutive distinct values; for a categorical
// column, the multiway partition over its category list (candidate only when
// at least two buckets are nonempty). Rows missing the candidate's value are
// left out of that candidate's scoring. The argmax is taken under the tie
// order (higher score, earlier feature position, lower threshold).
//
// Returns nullopt when the rows are label-pure, when no candidate exists, or
// when min_gain > 0 and the best score does not exceed it. With min_gain = 0
// an impure node always splits on the best candidate, even at score 0; this
// is what lets unlimited induction fit parity-style data exactly.
std::optional<SplitChoice> best_split(const DatasetTable& table,
                                      const std::vector<std::size_t>& row_indices,
                                      const std::vector<std::size_t>& feature_columns,
                                      Criterion criterion, double min_gain = 0.0);

// Recursive induction: a node becomes a leaf when its labels are pure, the
// depth limit is reached, it holds fewer than min_samples_split rows, or
// best_split returns nullopt. Numeric splits are binary (<= t left);
// categorical splits fan out one child per category of the column, and a
// category with no rows at the node becomes a leaf carrying the parent
// distribution. Training rows missing the split value follow the child with
// the larger row count (ties to the earlier child), the same rule prediction
// uses. Throws on an empty or unlabeled table.
TrainedModel induce_tree(const DatasetTable& train, const TrainConfig& config);

// Probability vector over model.class_order for a feature row aligned to
// model.selected_features. Missing values at a split follow the child with
// the larger training count (ties to the first child); a value equal to a
// threshold goes to the <= child. Throws on a row of the wrong arity or a
// cell whose kind contradicts the split.
std::vector<double> predict_proba(const TrainedModel& model, const std::vector<Cell>& row);

// Argmax of predict_proba, ties to the lexicographically smallest class.
std::string predict_label(const TrainedModel& model, const std::vector<Cell>& row);

struct TablePredictions {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> probas;
};

// Routes every row of a table whose columns are matched to
// model.selected_features by name.
TablePredictions predict_table(const TrainedModel& model, const DatasetTable& table);

// Materializes one Cell row per table row, columns matched to
// model.selected_features by name (throws if one is absent). This is the row
// layout predict_proba expects.
std::vector<std::vector<Cell>> model_feature_rows(const TrainedModel& model,
                                                  const DatasetTable& table);

// Bottom-up reduced-error pruning: an internal node collapses into a leaf of
// its own class distribution whenever that does not decrease accuracy on the
// pruning set (equal accuracy collapses). The returned model's accuracy on
// the pruning set is >= the input model's, and its node count never
// increases. Throws on an empty pruning set.
TrainedModel prune_reduced_error(const TrainedModel& model, const DatasetTable& pruning_set);

}  // namespace entgrove
