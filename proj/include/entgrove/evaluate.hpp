#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entgrove/tree.hpp"

namespace entgrove {

// Row index = true class, column index = predicted class, both in
// class_order's order.
struct ConfusionMatrix {
    std::vector<std::string> class_order;
    std::vector<std::vector<std::uint64_t>> counts;

    std::uint64_t total() const;
    std::uint64_t diagonal() const;
};

struct RateSet {
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;

    bool operator==(const RateSet&) const = default;
};

// Everything the eval pipeline reports for one run. Rates live in [0, 1];
// rendering converts to percent. loss and apt_ms are filled by the callers
// that compute them (metrics_from_confusion leaves them at 0).
struct MetricsReport {
    double accuracy = 0.0;
    std::vector<std::string> class_order;
    std::map<std::string, RateSet> per_class;
    RateSet macro;
    // Micro-averaged rates are kept alongside the macro ones because a single
    // scalar per metric hides the averaging scheme; micro recall always
    // equals accuracy.
    RateSet micro;
    double loss = 0.0;
    double apt_ms = 0.0;
    nlohmann::json model_meta = nlohmann::json::object();

    bool operator==(const MetricsReport&) const = default;
};

// Throws on empty or mismatched inputs, or a token absent from class_order.
ConfusionMatrix confusion(const std::vector<std::string>& truth,
                          const std::vector<std::string>& predicted,
                          const std::vector<std::string>& class_order);

// One-vs-rest per class: precision TP/(TP+FP), recall TP/(TP+FN),
// specificity TN/(TN+FP), F1 = harmonic mean; any 0/0 is 0. macro is the
// unweighted class mean, micro aggregates TP/FP/FN/TN first. Throws if the
// matrix is empty.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

// Mean over rows of -ln(max(p_true, 1e-12)). Each probability vector is
// aligned with class_order. Throws on length mismatches or a truth token
// absent from class_order.
double cross_entropy_loss(const std::vector<std::vector<double>>& probas,
                          const std::vector<std::string>& truth,
                          const std::vector<std::string>& class_order);

// Wall-clock milliseconds per prediction: all rows predicted `repetitions`
// times single-threaded, preceded by one untimed warm-up pass. Throws on
// empty rows or repetitions < 1.
double measure_apt(const TrainedModel& model, const std::vector<std::vector<Cell>>& rows,
                   std::size_t repetitions);

// Published baseline figures the report table can display next to a run.
// Values are display-ready (percents / ms), never asserted against.
struct ReferenceRow {
    std::string name;
    double specificity_pct = 0.0;
    double f1_pct = 0.0;
    double accuracy_pct = 0.0;
    double loss = 0.0;
    double apt_ms = 0.0;
};

const std::vector<ReferenceRow>& reference_rows();

// Training-rig settings echoed into model_meta as inert provenance; nothing
// in this codebase consumes them.
nlohmann::json reference_hyperparameters();

// Fixed-width text table with columns Spec(%) | F1-Score(%) | Acc(%) | Loss |
// APT(ms). The run's row uses macro specificity / macro F1 / accuracy.
// Optional reference rows are appended verbatim.
std::string render_report(const MetricsReport& report,
                          const std::vector<ReferenceRow>* reference = nullptr);

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace entgrove
