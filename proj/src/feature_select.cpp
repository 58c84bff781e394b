#include "entgrove/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "entgrove/serial.hpp"

namespace entgrove {

namespace {

// Class tokens -> dense ids in sorted-token order, so every downstream sum
// runs in a canonical order regardless of row permutation.
struct ClassIndex {
    std::vector<std::string> tokens;  // sorted

    explicit ClassIndex(const std::vector<std::string>& labels) {
        std::map<std::string, std::size_t> seen;
        for (const auto& token : labels) seen.emplace(token, 0);
        tokens.reserve(seen.size());
        for (const auto& [token, _] : seen) tokens.push_back(token);
    }
    std::size_t id(const std::string& token) const {
        auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
        return static_cast<std::size_t>(it - tokens.begin());
    }
    std::size_t size() const { return tokens.size(); }
};

std::vector<std::size_t> count_classes(const std::vector<std::string>& labels,
                                       const ClassIndex& classes) {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (const auto& token : labels) ++counts[classes.id(token)];
    return counts;
}

// Sentinel key for the missing bucket; real categories loaded from CSV can
// never be the empty string (empty cells parse as missing).
const std::string kMissingBucket{};

FeatureScore score_categorical(const std::vector<std::string>& values,
                               const std::vector<std::string>& labels,
                               const ClassIndex& classes, double label_entropy,
                               const std::string& feature_name) {
    std::map<std::string, std::vector<std::size_t>> buckets;  // sorted by token
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto& counts = buckets[values[i]];
        if (counts.empty()) counts.resize(classes.size(), 0);
        ++counts[classes.id(labels[i])];
    }
    std::vector<std::vector<std::size_t>> bucket_counts;
    bucket_counts.reserve(buckets.size());
    for (auto& [token, counts] : buckets) bucket_counts.push_back(std::move(counts));

    PartitionScore score = score_partition(bucket_counts, values.size(), label_entropy);
    FeatureScore out;
    out.feature = feature_name;
    out.entropy_of_labels = label_entropy;
    out.information_gain = score.gain;
    out.gain_ratio = score.gain_ratio;
    return out;
}

FeatureScore score_numeric(const std::vector<double>& values,
                           const std::vector<std::string>& labels,
                           const ClassIndex& classes, double label_entropy,
                           const std::string& feature_name) {
    FeatureScore out;
    out.feature = feature_name;
    out.entropy_of_labels = label_entropy;

    const std::size_t n = values.size();
    std::vector<std::pair<double, std::size_t>> present;  // (value, class id)
    std::vector<std::size_t> missing_counts(classes.size(), 0);
    present.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(values[i])) {
            ++missing_counts[classes.id(labels[i])];
        } else {
            present.emplace_back(values[i], classes.id(labels[i]));
        }
    }
    std::sort(present.begin(), present.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::size_t> left(missing_counts);  // missing always routes left
    std::vector<std::size_t> right(classes.size(), 0);
    for (const auto& [value, cls] : present) ++right[cls];

    double best_gain = -1.0;
    double best_ratio = 0.0;
    double best_threshold = 0.0;
    std::size_t i = 0;
    while (i < present.size()) {
        double value = present[i].first;
        while (i < present.size() && present[i].first == value) {
            ++left[present[i].second];
            --right[present[i].second];
            ++i;
        }
        if (i == present.size()) break;  // no next distinct value
        double threshold = (value + present[i].first) / 2.0;
        PartitionScore score = score_partition({left, right}, n, label_entropy);
        if (score.gain > best_gain) {
            best_gain = score.gain;
            best_ratio = score.gain_ratio;
            best_threshold = threshold;
        }
    }

    if (best_gain >= 0.0) {
        out.information_gain = best_gain;
        out.gain_ratio = best_ratio;
        out.best_threshold = best_threshold;
    }
    return out;
}

std::vector<std::string> column_tokens(const DatasetTable& table, std::size_t column) {
    const ColumnSchema& schema = table.schema[column];
    std::vector<std::string> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const Cell& cell = row[column];
        out.push_back(cell.is_missing()
                          ? kMissingBucket
                          : schema.observed_categories.at(static_cast<std::size_t>(cell.category)));
    }
    return out;
}

std::vector<double> column_numbers(const DatasetTable& table, std::size_t column) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const Cell& cell = row[column];
        out.push_back(cell.is_missing() ? std::nan("") : cell.number);
    }
    return out;
}

void check_lengths(std::size_t values, std::size_t labels) {
    if (values != labels) {
        throw std::invalid_argument("feature column and labels differ in length (" +
                                    std::to_string(values) + " vs " + std::to_string(labels) + ")");
    }
    if (labels == 0) {
        throw std::invalid_argument("cannot score an empty column");
    }
}

}  // namespace

double entropy_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    const double n = static_cast<double>(total);
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double entropy(const std::vector<std::string>& labels) {
    if (labels.empty()) {
        throw std::invalid_argument("entropy: empty label set");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& token : labels) ++counts[token];
    std::vector<std::size_t> dense;
    dense.reserve(counts.size());
    for (const auto& [token, count] : counts) dense.push_back(count);
    return entropy_from_counts(dense, labels.size());
}

PartitionScore score_partition(const std::vector<std::vector<std::size_t>>& bucket_class_counts,
                               std::size_t total, double label_entropy) {
    PartitionScore score;
    if (total == 0) return score;
    const double n = static_cast<double>(total);
    double weighted_child_entropy = 0.0;
    for (const auto& counts : bucket_class_counts) {
        std::size_t bucket_total = 0;
        for (std::size_t c : counts) bucket_total += c;
        if (bucket_total == 0) continue;
        const double w = static_cast<double>(bucket_total) / n;
        weighted_child_entropy += w * entropy_from_counts(counts, bucket_total);
        score.split_info -= w * std::log2(w);
    }
    score.gain = std::max(0.0, label_entropy - weighted_child_entropy);
    score.gain_ratio = score.split_info > 0.0 ? score.gain / score.split_info : 0.0;
    return score;
}

FeatureScore information_gain(const std::vector<std::string>& values,
                              const std::vector<std::string>& labels,
                              const std::string& feature_name) {
    check_lengths(values.size(), labels.size());
    ClassIndex classes(labels);
    return score_categorical(values, labels, classes,
                             entropy_from_counts(count_classes(labels, classes), labels.size()),
                             feature_name);
}

FeatureScore information_gain(const std::vector<double>& values,
                              const std::vector<std::string>& labels,
                              const std::string& feature_name) {
    check_lengths(values.size(), labels.size());
    ClassIndex classes(labels);
    return score_numeric(values, labels, classes,
                         entropy_from_counts(count_classes(labels, classes), labels.size()),
                         feature_name);
}

double gain_ratio(const std::vector<std::string>& values, const std::vector<std::string>& labels) {
    return information_gain(values, labels).gain_ratio;
}

double gain_ratio(const std::vector<double>& values, const std::vector<std::string>& labels) {
    return information_gain(values, labels).gain_ratio;
}

FeatureScore score_column(const DatasetTable& table, std::size_t column) {
    if (column == table.label_index) {
        throw std::invalid_argument("score_column: cannot score the label column");
    }
    const std::vector<std::string> labels = table.labels();
    if (table.schema[column].kind == ColumnKind::numeric) {
        return information_gain(column_numbers(table, column), labels, table.schema[column].name);
    }
    return information_gain(column_tokens(table, column), labels, table.schema[column].name);
}

SelectionReport rank_and_select(const DatasetTable& table, SelectionPolicy policy, RankKey key) {
    const auto features = table.feature_indices();
    if (features.empty()) {
        throw std::runtime_error("rank_and_select: table has no feature columns");
    }

    SelectionReport report;
    report.policy = policy;
    report.rank_key = key;
    report.scores.reserve(features.size());
    for (std::size_t column : features) {
        report.scores.push_back(score_column(table, column));
    }

    auto rank_value = [key](const FeatureScore& s) {
        return key == RankKey::gain ? s.information_gain : s.gain_ratio;
    };
    std::sort(report.scores.begin(), report.scores.end(),
              [&](const FeatureScore& a, const FeatureScore& b) {
                  if (rank_value(a) != rank_value(b)) return rank_value(a) > rank_value(b);
                  return a.feature < b.feature;
              });

    if (policy.kind == SelectionPolicy::Kind::top_k) {
        const std::size_t keep = std::min(policy.k, report.scores.size());
        for (std::size_t i = 0; i < keep; ++i) report.selected.push_back(report.scores[i].feature);
    } else {
        for (const FeatureScore& s : report.scores) {
            if (rank_value(s) > policy.threshold) report.selected.push_back(s.feature);
        }
    }
    return report;
}

nlohmann::json selection_to_json(const SelectionReport& report) {
    nlohmann::json scores = nlohmann::json::array();
    for (const FeatureScore& s : report.scores) {
        nlohmann::json entry{{"feature", s.feature},
                             {"entropy_of_labels", s.entropy_of_labels},
                             {"information_gain", s.information_gain},
                             {"gain_ratio", s.gain_ratio}};
        entry["best_threshold"] =
            s.best_threshold ? nlohmann::json(double_to_string(*s.best_threshold))
                             : nlohmann::json(nullptr);
        scores.push_back(std::move(entry));
    }
    nlohmann::json policy;
    if (report.policy.kind == SelectionPolicy::Kind::top_k) {
        policy = {{"kind", "top_k"}, {"k", report.policy.k}};
    } else {
        policy = {{"kind", "min_gain"}, {"threshold", double_to_string(report.policy.threshold)}};
    }
    return nlohmann::json{{"scores", scores},
                          {"selected", report.selected},
                          {"policy", policy},
                          {"rank_key", report.rank_key == RankKey::gain ? "gain" : "gain_ratio"}};
}

SelectionReport selection_from_json(const nlohmann::json& j) {
    SelectionReport report;
    for (const auto& entry : j.at("scores")) {
        FeatureScore s;
        s.feature = entry.at("feature").get<std::string>();
        s.entropy_of_labels = entry.at("entropy_of_labels").get<double>();
        s.information_gain = entry.at("information_gain").get<double>();
        s.gain_ratio = entry.at("gain_ratio").get<double>();
        if (!entry.at("best_threshold").is_null()) {
            s.best_threshold = double_from_string(entry.at("best_threshold").get<std::string>());
        }
        report.scores.push_back(std::move(s));
    }
    report.selected = j.at("selected").get<std::vector<std::string>>();
    const auto& policy = j.at("policy");
    if (policy.at("kind") == "top_k") {
        report.policy = SelectionPolicy::top_k(policy.at("k").get<std::size_t>());
    } else {
        report.policy =
            SelectionPolicy::min_gain(double_from_string(policy.at("threshold").get<std::string>()));
    }
    report.rank_key = j.at("rank_key") == "gain" ? RankKey::gain : RankKey::gain_ratio;
    return report;
}

}  // namespace entgrove
