#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entgrove/dataset.hpp"

namespace entgrove {

struct FeatureScore {
    std::string feature;
    double entropy_of_labels = 0.0;  // H of the label set, bits
    double information_gain = 0.0;   // bits, clamped to >= 0
    double gain_ratio = 0.0;         // 0 when split information is 0
    std::optional<double> best_threshold;  // numeric features only
};

enum class RankKey { gain, gain_ratio };

struct SelectionPolicy {
    enum class Kind { top_k, min_gain };
    Kind kind = Kind::min_gain;
    std::size_t k = 0;
    double threshold = 0.0;

    static SelectionPolicy top_k(std::size_t k) { return {Kind::top_k, k, 0.0}; }
    // Keeps features whose ranking score is strictly greater than t.
    static SelectionPolicy min_gain(double t) { return {Kind::min_gain, 0, t}; }
};

struct SelectionReport {
    // Sorted by the ranking key descending, ties by ascending feature name.
    std::vector<FeatureScore> scores;
    std::vector<std::string> selected;  // respects the sort order
    SelectionPolicy policy;
    RankKey rank_key = RankKey::gain;
};

// H = -sum_c p_c log2 p_c with 0*log2(0) = 0. Summation runs over classes in
// sorted-token order so the result is independent of row order. Throws on
// empty input.
double entropy(const std::vector<std::string>& labels);
double entropy_from_counts(const std::vector<std::size_t>& counts, std::size_t total);

struct PartitionScore {
    double gain = 0.0;
    double split_info = 0.0;
    double gain_ratio = 0.0;
};

// Gain and split information for a completed partition, given per-bucket
// class counts. Buckets must be supplied in a canonical order; empty buckets
// contribute nothing. `label_entropy` is H over all `total` rows.
PartitionScore score_partition(const std::vector<std::vector<std::size_t>>& bucket_class_counts,
                               std::size_t total, double label_entropy);

// Categorical feature: one bucket per distinct token, scanned in sorted-token
// order. Numeric feature: binary thresholds at midpoints between consecutive
// distinct sorted values; the reported threshold maximizes gain (ties go to
// the lower threshold) and the gain ratio is evaluated at that threshold.
// Missing values (NaN for numeric) sort below every real value and always
// route to the <= side; a missing categorical token forms its own bucket.
// Throws on a length mismatch or empty input.
FeatureScore information_gain(const std::vector<std::string>& values,
                              const std::vector<std::string>& labels,
                              const std::string& feature_name = "");
FeatureScore information_gain(const std::vector<double>& values,
                              const std::vector<std::string>& labels,
                              const std::string& feature_name = "");

double gain_ratio(const std::vector<std::string>& values, const std::vector<std::string>& labels);
double gain_ratio(const std::vector<double>& values, const std::vector<std::string>& labels);

// Per-table column scoring used by the pipeline; equivalent to extracting the
// column and calling information_gain.
FeatureScore score_column(const DatasetTable& table, std::size_t column);

// Scores every feature column and applies the policy to the ranked list.
// top_k with k greater than the number of features reduces to all features.
SelectionReport rank_and_select(const DatasetTable& table, SelectionPolicy policy,
                                RankKey key = RankKey::gain);

nlohmann::json selection_to_json(const SelectionReport& report);
SelectionReport selection_from_json(const nlohmann::json& j);

}  // namespace entgrove
