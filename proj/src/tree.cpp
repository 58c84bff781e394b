#include "entgrove/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace entgrove {

namespace {

// Class tokens of a table's label column, sorted, plus a per-row dense id.
// All counting below runs in this order so induction is order-canonical.
struct LabelSpace {
    std::vector<std::string> tokens;
    std::vector<std::size_t> row_class;

    explicit LabelSpace(const DatasetTable& table) {
        const ColumnSchema& label = table.schema[table.label_index];
        tokens = label.observed_categories;
        std::sort(tokens.begin(), tokens.end());
        std::vector<std::size_t> remap(label.observed_categories.size());
        for (std::size_t i = 0; i < remap.size(); ++i) {
            auto it = std::lower_bound(tokens.begin(), tokens.end(),
                                       label.observed_categories[i]);
            remap[i] = static_cast<std::size_t>(it - tokens.begin());
        }
        row_class.reserve(table.rows.size());
        for (const auto& row : table.rows) {
            row_class.push_back(remap[static_cast<std::size_t>(row[table.label_index].category)]);
        }
    }
};

std::vector<std::size_t> class_counts_at(const LabelSpace& labels,
                                         const std::vector<std::size_t>& rows,
                                         std::size_t n_classes) {
    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t r : rows) ++counts[labels.row_class[r]];
    return counts;
}

void fill_node_distribution(TreeNode& node, const std::vector<std::size_t>& counts,
                            const std::vector<std::string>& tokens) {
    node.class_counts.clear();
    std::size_t best = 0;
    std::size_t best_index = tokens.size();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        node.class_counts.emplace(tokens[i], counts[i]);
        if (counts[i] > best) {
            best = counts[i];
            best_index = i;  // tokens sorted: first max is the smallest token
        }
    }
    node.majority = best_index < tokens.size() ? tokens[best_index] : std::string{};
}

double criterion_value(const PartitionScore& score, Criterion criterion) {
    return criterion == Criterion::gain ? score.gain : score.gain_ratio;
}

std::size_t heavier_child(const TreeNode& node) {
    std::size_t best = 0;
    std::uint64_t best_count = node.children[0].total_count();
    for (std::size_t i = 1; i < node.children.size(); ++i) {
        std::uint64_t c = node.children[i].total_count();
        if (c > best_count) {
            best = i;
            best_count = c;
        }
    }
    return best;
}

std::size_t route_child(const TreeNode& node, const Cell& cell) {
    if (cell.is_missing()) return heavier_child(node);
    if (node.threshold_split) {
        if (cell.kind != CellKind::number) {
            throw std::invalid_argument("row has a non-numeric value for feature '" +
                                        node.feature + "'");
        }
        return cell.number <= node.threshold ? 0 : 1;
    }
    if (cell.kind != CellKind::category) {
        throw std::invalid_argument("row has a non-categorical value for feature '" +
                                    node.feature + "'");
    }
    for (std::size_t i = 0; i < node.category_sets.size(); ++i) {
        const auto& set = node.category_sets[i];
        if (std::find(set.begin(), set.end(), cell.category) != set.end()) return i;
    }
    // Category index outside every set; fall back to the missing-value rule.
    return heavier_child(node);
}

struct Inducer {
    const DatasetTable& table;
    const TrainConfig& config;
    const LabelSpace labels;
    std::vector<std::size_t> feature_columns;

    Inducer(const DatasetTable& t, const TrainConfig& c)
        : table(t), config(c), labels(t), feature_columns(t.feature_indices()) {}

    TreeNode build(const std::vector<std::size_t>& rows, std::size_t depth) {
        TreeNode node;
        const auto counts = class_counts_at(labels, rows, labels.tokens.size());
        fill_node_distribution(node, counts, labels.tokens);

        if (node.class_counts.size() <= 1) return node;
        if (config.max_depth && depth >= *config.max_depth) return node;
        if (rows.size() < config.min_samples_split) return node;

        auto choice = best_split(table, rows, feature_columns, config.criterion, config.min_gain);
        if (!choice) return node;

        const ColumnSchema& column = table.schema[choice->column];
        node.feature = column.name;
        node.feature_index = static_cast<std::int32_t>(
            std::find(feature_columns.begin(), feature_columns.end(), choice->column) -
            feature_columns.begin());

        std::vector<std::vector<std::size_t>> buckets;
        std::vector<std::size_t> deferred;  // rows missing the split value
        if (choice->threshold_split) {
            node.threshold_split = true;
            node.threshold = choice->threshold;
            buckets.resize(2);
            for (std::size_t r : rows) {
                const Cell& cell = table.rows[r][choice->column];
                if (cell.is_missing()) {
                    deferred.push_back(r);
                } else {
                    buckets[cell.number <= node.threshold ? 0 : 1].push_back(r);
                }
            }
        } else {
            const std::size_t arity = column.observed_categories.size();
            buckets.resize(arity);
            node.category_sets.reserve(arity);
            for (std::size_t i = 0; i < arity; ++i) {
                node.category_sets.push_back({static_cast<std::int32_t>(i)});
            }
            for (std::size_t r : rows) {
                const Cell& cell = table.rows[r][choice->column];
                if (cell.is_missing()) {
                    deferred.push_back(r);
                } else {
                    buckets[static_cast<std::size_t>(cell.category)].push_back(r);
                }
            }
        }
        if (!deferred.empty()) {
            std::size_t target = 0;
            for (std::size_t i = 1; i < buckets.size(); ++i) {
                if (buckets[i].size() > buckets[target].size()) target = i;
            }
            for (std::size_t r : deferred) buckets[target].push_back(r);
        }

        node.children.reserve(buckets.size());
        for (const auto& bucket : buckets) {
            if (bucket.empty()) {
                // Empty partition: leaf carrying the parent distribution.
                TreeNode child;
                child.class_counts = node.class_counts;
                child.majority = node.majority;
                node.children.push_back(std::move(child));
            } else {
                node.children.push_back(build(bucket, depth + 1));
            }
        }
        return node;
    }
};

std::uint64_t prune_node(TreeNode& node, const std::vector<std::vector<Cell>>& rows,
                         const std::vector<std::string>& row_labels,
                         const std::vector<std::size_t>& hits) {
    std::uint64_t as_leaf = 0;
    for (std::size_t h : hits) {
        if (row_labels[h] == node.majority) ++as_leaf;
    }
    if (node.is_leaf()) return as_leaf;

    std::vector<std::vector<std::size_t>> buckets(node.children.size());
    for (std::size_t h : hits) {
        buckets[route_child(node, rows[h][static_cast<std::size_t>(node.feature_index)])]
            .push_back(h);
    }
    std::uint64_t subtree = 0;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        subtree += prune_node(node.children[i], rows, row_labels, buckets[i]);
    }
    if (as_leaf >= subtree) {
        node.children.clear();
        node.category_sets.clear();
        node.feature.clear();
        node.feature_index = -1;
        node.threshold_split = false;
        node.threshold = 0.0;
        return as_leaf;
    }
    return subtree;
}

}  // namespace

const char* criterion_name(Criterion c) {
    return c == Criterion::gain ? "gain" : "gain_ratio";
}

Criterion criterion_from_name(const std::string& name) {
    if (name == "gain") return Criterion::gain;
    if (name == "gain_ratio" || name == "gain-ratio") return Criterion::gain_ratio;
    throw std::runtime_error("unknown criterion: " + name);
}

std::uint64_t TreeNode::total_count() const {
    std::uint64_t total = 0;
    for (const auto& [token, count] : class_counts) total += count;
    return total;
}

std::size_t node_count(const TreeNode& node) {
    std::size_t n = 1;
    for (const TreeNode& child : node.children) n += node_count(child);
    return n;
}

std::optional<SplitChoice> best_split(const DatasetTable& table,
                                      const std::vector<std::size_t>& row_indices,
                                      const std::vector<std::size_t>& feature_columns,
                                      Criterion criterion, double min_gain) {
    if (row_indices.size() < 2 || feature_columns.empty()) return std::nullopt;

    const LabelSpace labels(table);
    const std::size_t n_classes = labels.tokens.size();
    {
        std::size_t first = labels.row_class[row_indices.front()];
        bool pure = true;
        for (std::size_t r : row_indices) {
            if (labels.row_class[r] != first) {
                pure = false;
                break;
            }
        }
        if (pure) return std::nullopt;
    }

    std::optional<SplitChoice> best;
    for (std::size_t column : feature_columns) {
        const ColumnSchema& schema = table.schema[column];
        if (schema.kind == ColumnKind::numeric) {
            std::vector<std::pair<double, std::size_t>> present;
            present.reserve(row_indices.size());
            for (std::size_t r : row_indices) {
                const Cell& cell = table.rows[r][column];
                if (!cell.is_missing()) present.emplace_back(cell.number, labels.row_class[r]);
            }
            if (present.size() < 2) continue;
            std::sort(present.begin(), present.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::vector<std::size_t> left(n_classes, 0);
            std::vector<std::size_t> right(n_classes, 0);
            for (const auto& [value, cls] : present) ++right[cls];
            const double subset_entropy = entropy_from_counts(right, present.size());

            std::size_t i = 0;
            while (i < present.size()) {
                const double value = present[i].first;
                while (i < present.size() && present[i].first == value) {
                    ++left[present[i].second];
                    --right[present[i].second];
                    ++i;
                }
                if (i == present.size()) break;
                const double threshold = (value + present[i].first) / 2.0;
                PartitionScore part = score_partition({left, right}, present.size(), subset_entropy);
                const double score = criterion_value(part, criterion);
                if (!best || score > best->score) {
                    best = SplitChoice{column, true, threshold, score};
                }
            }
        } else {
            const std::size_t arity = schema.observed_categories.size();
            if (arity < 2) continue;
            std::vector<std::vector<std::size_t>> buckets(arity,
                                                          std::vector<std::size_t>(n_classes, 0));
            std::vector<std::size_t> subset(n_classes, 0);
            std::size_t nonmissing = 0;
            for (std::size_t r : row_indices) {
                const Cell& cell = table.rows[r][column];
                if (cell.is_missing()) continue;
                ++buckets[static_cast<std::size_t>(cell.category)][labels.row_class[r]];
                ++subset[labels.row_class[r]];
                ++nonmissing;
            }
            std::size_t nonempty = 0;
            for (const auto& bucket : buckets) {
                if (std::accumulate(bucket.begin(), bucket.end(), std::size_t{0}) > 0) ++nonempty;
            }
            if (nonempty < 2) continue;
            PartitionScore part =
                score_partition(buckets, nonmissing, entropy_from_counts(subset, nonmissing));
            const double score = criterion_value(part, criterion);
            if (!best || score > best->score) {
                best = SplitChoice{column, false, 0.0, score};
            }
        }
    }

    if (!best) return std::nullopt;
    if (min_gain > 0.0 && best->score <= min_gain) return std::nullopt;
    return best;
}

TrainedModel induce_tree(const DatasetTable& train, const TrainConfig& config) {
    if (train.rows.empty()) {
        throw std::runtime_error("induce_tree: empty training table");
    }
    if (!train.has_label()) {
        throw std::runtime_error("induce_tree: table has no label column");
    }
    if (config.min_samples_split < 2) {
        throw std::invalid_argument("min_samples_split must be at least 2");
    }

    TrainedModel model;
    model.config = config;
    model.training_manifest = class_manifest(train);
    for (const auto& [name, count] : model.training_manifest.entries) {
        model.class_order.push_back(name);
    }
    for (std::size_t c : train.feature_indices()) {
        model.selected_features.push_back(train.schema[c].name);
        model.feature_kinds.push_back(train.schema[c].kind);
        model.feature_categories.push_back(train.schema[c].observed_categories);
    }

    Inducer inducer(train, config);
    std::vector<std::size_t> all(train.rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    model.root = inducer.build(all, 0);
    return model;
}

std::vector<double> predict_proba(const TrainedModel& model, const std::vector<Cell>& row) {
    if (row.size() != model.selected_features.size()) {
        throw std::invalid_argument("row has " + std::to_string(row.size()) +
                                    " cells; model expects " +
                                    std::to_string(model.selected_features.size()));
    }
    const TreeNode* node = &model.root;
    while (!node->is_leaf()) {
        node = &node->children[route_child(*node, row[static_cast<std::size_t>(node->feature_index)])];
    }
    std::vector<double> p(model.class_order.size(), 0.0);
    const double total = static_cast<double>(node->total_count());
    for (std::size_t i = 0; i < model.class_order.size(); ++i) {
        auto it = node->class_counts.find(model.class_order[i]);
        if (it != node->class_counts.end()) {
            p[i] = static_cast<double>(it->second) / total;
        }
    }
    return p;
}

std::string predict_label(const TrainedModel& model, const std::vector<Cell>& row) {
    const std::vector<double> p = predict_proba(model, row);
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] > p[best] || (p[i] == p[best] && model.class_order[i] < model.class_order[best])) {
            best = i;
        }
    }
    return model.class_order[best];
}

std::vector<std::vector<Cell>> model_feature_rows(const TrainedModel& model,
                                                  const DatasetTable& table) {
    std::vector<std::size_t> columns;
    columns.reserve(model.selected_features.size());
    for (const std::string& name : model.selected_features) {
        columns.push_back(table.column_index(name));
    }
    std::vector<std::vector<Cell>> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<Cell> cells;
        cells.reserve(columns.size());
        for (std::size_t c : columns) cells.push_back(row[c]);
        out.push_back(std::move(cells));
    }
    return out;
}

TablePredictions predict_table(const TrainedModel& model, const DatasetTable& table) {
    TablePredictions out;
    const auto rows = model_feature_rows(model, table);
    out.labels.reserve(rows.size());
    out.probas.reserve(rows.size());
    for (const auto& row : rows) {
        out.probas.push_back(predict_proba(model, row));
        const auto& p = out.probas.back();
        std::size_t best = 0;
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (p[i] > p[best] ||
                (p[i] == p[best] && model.class_order[i] < model.class_order[best])) {
                best = i;
            }
        }
        out.labels.push_back(model.class_order[best]);
    }
    return out;
}

TrainedModel prune_reduced_error(const TrainedModel& model, const DatasetTable& pruning_set) {
    if (pruning_set.rows.empty()) {
        throw std::runtime_error("prune_reduced_error: empty pruning set");
    }
    if (!pruning_set.has_label()) {
        throw std::runtime_error("prune_reduced_error: pruning set has no label column");
    }
    TrainedModel pruned = model;
    const auto rows = model_feature_rows(model, pruning_set);
    const auto labels = pruning_set.labels();
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    prune_node(pruned.root, rows, labels, all);
    return pruned;
}

}  // namespace entgrove
