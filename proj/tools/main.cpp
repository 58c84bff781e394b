// entgrove command line: split / select / train / eval / predict / bench.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "entgrove/dataset.hpp"
#include "entgrove/evaluate.hpp"
#include "entgrove/feature_select.hpp"
#include "entgrove/model_io.hpp"
#include "entgrove/preprocess.hpp"
#include "entgrove/serial.hpp"
#include "entgrove/tree.hpp"

namespace fs = std::filesystem;
using namespace entgrove;

namespace {

struct CommonOptions {
    std::string data;
    std::string label;
    std::string delimiter = ",";
    std::string out = ".";
};

struct TrainOptions : CommonOptions {
    std::uint64_t seed = 0;
    double train_fraction = 0.75;
    std::string criterion = "gain-ratio";
    std::string select;          // "", "top-k=N", or "min-gain=T"
    std::string rank_by = "gain";
    bool prune = false;
    std::int64_t max_depth = -1;  // -1: unlimited
    std::size_t min_samples_split = 2;
    double min_gain = 0.0;
};

struct ModelOptions : CommonOptions {
    std::string model;
    bool reference = false;
    std::size_t repetitions = 3;
};

char delimiter_char(const std::string& flag) { return flag[0]; }

// ENTGROVE_SEED, when set and non-empty, overrides --seed.
std::uint64_t resolve_seed(std::uint64_t flag_seed, std::string& source) {
    const char* env = std::getenv("ENTGROVE_SEED");
    if (env == nullptr || *env == '\0') {
        source = "--seed";
        return flag_seed;
    }
    std::uint64_t value = 0;
    const char* end = env + std::strlen(env);
    auto res = std::from_chars(env, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw std::runtime_error("ENTGROVE_SEED is not an unsigned integer: '" +
                                 std::string(env) + "'");
    }
    source = "ENTGROVE_SEED";
    return value;
}

SelectionPolicy parse_policy(const std::string& text) {
    if (text.empty()) {
        // Keep every feature: top-k saturates at the feature count.
        return SelectionPolicy::top_k(static_cast<std::size_t>(-1));
    }
    if (text.rfind("top-k=", 0) == 0) {
        const std::string arg = text.substr(6);
        std::size_t k = 0;
        const char* end = arg.data() + arg.size();
        auto res = std::from_chars(arg.data(), end, k);
        if (res.ec != std::errc() || res.ptr != end || arg.empty()) {
            throw std::runtime_error("--select top-k wants an unsigned integer, got '" + arg +
                                     "'");
        }
        return SelectionPolicy::top_k(k);
    }
    if (text.rfind("min-gain=", 0) == 0) {
        return SelectionPolicy::min_gain(double_from_string(text.substr(9)));
    }
    throw std::runtime_error("--select must be top-k=N or min-gain=T, got '" + text + "'");
}

RankKey parse_rank_key(const std::string& text) {
    return text == "gain" ? RankKey::gain : RankKey::gain_ratio;
}

void warn_dropped(const DatasetTable& table) {
    if (table.dropped_row_count > 0) {
        std::cerr << "warning: dropped " << table.dropped_row_count
                  << " malformed row(s) from " << table.source_path << "\n";
    }
}

void write_run_manifest(const std::string& out, nlohmann::json manifest) {
    write_json_file((fs::path(out) / "run_manifest.json").string(), std::move(manifest));
}

nlohmann::json common_manifest(const std::string& subcommand, const CommonOptions& o) {
    return nlohmann::json{{"subcommand", subcommand},
                          {"data", o.data},
                          {"label", o.label},
                          {"delimiter", o.delimiter},
                          {"out", o.out}};
}

// Loads a dataset the way a stored model expects it: the plan's input schema,
// the plan's label column (optional in the file), then the plan itself.
DatasetTable load_for_model(const TrainedModel& model, const std::string& path,
                            char delimiter) {
    if (model.plan.empty()) {
        throw std::runtime_error("model carries no preprocess plan; cannot ingest raw data");
    }
    DatasetTable raw = load_csv_with_schema(path, model.plan.feature_schema(),
                                            model.plan.label_column, delimiter);
    warn_dropped(raw);
    return apply_plan(model.plan, raw);
}

nlohmann::json model_meta_json(const TrainedModel& model) {
    nlohmann::json meta{{"classes", model.class_order},
                        {"criterion", criterion_name(model.config.criterion)},
                        {"min_gain", model.config.min_gain},
                        {"min_samples_split", model.config.min_samples_split},
                        {"prune", model.config.prune},
                        {"seed", model.config.seed},
                        {"selected_features", model.selected_features},
                        {"tree_nodes", node_count(model.root)},
                        {"reference_hyperparameters", reference_hyperparameters()}};
    meta["max_depth"] = model.config.max_depth ? nlohmann::json(*model.config.max_depth)
                                               : nlohmann::json();
    return meta;
}

int cmd_split(const TrainOptions& o) {
    fs::create_directories(o.out);
    std::string seed_source;
    const std::uint64_t seed = resolve_seed(o.seed, seed_source);

    DatasetTable table = load_csv(o.data, o.label, delimiter_char(o.delimiter));
    warn_dropped(table);
    const ClassManifest manifest = class_manifest(table);
    const SplitResult split = stratified_split(table, o.train_fraction, seed);

    const fs::path out(o.out);
    write_csv(subset(table, split.train_indices), (out / "train.csv").string(),
              delimiter_char(o.delimiter));
    write_csv(subset(table, split.validation_indices), (out / "validation.csv").string(),
              delimiter_char(o.delimiter));
    write_json_file((out / "manifest.json").string(), manifest_to_json(manifest));
    write_json_file((out / "split.json").string(), split_to_json(split));

    nlohmann::json run = common_manifest("split", o);
    run["seed"] = seed;
    run["seed_source"] = seed_source;
    run["train_fraction"] = o.train_fraction;
    write_run_manifest(o.out, std::move(run));

    std::cout << "split " << table.rows.size() << " rows into " << split.train_indices.size()
              << " train / " << split.validation_indices.size() << " validation across "
              << manifest.entries.size() << " classes\n";
    return 0;
}

int cmd_select(const TrainOptions& o) {
    fs::create_directories(o.out);
    DatasetTable table = load_csv(o.data, o.label, delimiter_char(o.delimiter));
    warn_dropped(table);

    // Standalone selection normalizes over the whole file; the train
    // pipeline instead fits its plan on the training split only.
    const PreprocessPlan plan = fit_plan(table);
    const DatasetTable prepped = apply_plan(plan, table);
    const SelectionReport report =
        rank_and_select(prepped, parse_policy(o.select), parse_rank_key(o.rank_by));

    write_json_file((fs::path(o.out) / "selection.json").string(), selection_to_json(report));

    nlohmann::json run = common_manifest("select", o);
    run["select"] = o.select;
    run["rank_by"] = o.rank_by;
    write_run_manifest(o.out, std::move(run));

    std::cout << "feature | gain | gain_ratio | threshold\n";
    for (const FeatureScore& score : report.scores) {
        std::cout << score.feature << " | " << score.information_gain << " | "
                  << score.gain_ratio << " | ";
        if (score.best_threshold) {
            std::cout << *score.best_threshold;
        } else {
            std::cout << "-";
        }
        std::cout << "\n";
    }
    std::cout << "selected " << report.selected.size() << " of " << report.scores.size()
              << " features\n";
    return 0;
}

int cmd_train(const TrainOptions& o) {
    fs::create_directories(o.out);
    std::string seed_source;
    const std::uint64_t seed = resolve_seed(o.seed, seed_source);

    DatasetTable table = load_csv(o.data, o.label, delimiter_char(o.delimiter));
    warn_dropped(table);
    const ClassManifest manifest = class_manifest(table);
    const SplitResult split = stratified_split(table, o.train_fraction, seed);
    const DatasetTable train_rows = subset(table, split.train_indices);
    const DatasetTable val_rows = subset(table, split.validation_indices);

    const PreprocessPlan plan = fit_plan(train_rows);
    const DatasetTable train_prep = apply_plan(plan, train_rows);
    const SelectionReport selection =
        rank_and_select(train_prep, parse_policy(o.select), parse_rank_key(o.rank_by));

    TrainConfig config;
    config.criterion = criterion_from_name(o.criterion);
    if (o.max_depth >= 0) config.max_depth = static_cast<std::size_t>(o.max_depth);
    config.min_samples_split = o.min_samples_split;
    config.min_gain = o.min_gain;
    config.prune = o.prune;
    config.seed = seed;

    TrainedModel model = induce_tree(project(train_prep, selection.selected), config);
    model.plan = plan;
    if (o.prune) {
        model = prune_reduced_error(model, apply_plan(plan, val_rows));
    }

    const fs::path out(o.out);
    const ModelArtifact artifact = save_model(model, (out / "model.json").string());
    write_json_file((out / "selection.json").string(), selection_to_json(selection));
    write_json_file((out / "plan.json").string(), plan_to_json(plan));
    write_json_file((out / "manifest.json").string(), manifest_to_json(manifest));
    write_json_file((out / "split.json").string(), split_to_json(split));

    nlohmann::json run = common_manifest("train", o);
    run["seed"] = seed;
    run["seed_source"] = seed_source;
    run["train_fraction"] = o.train_fraction;
    run["criterion"] = o.criterion;
    run["select"] = o.select;
    run["rank_by"] = o.rank_by;
    run["prune"] = o.prune;
    run["max_depth"] = o.max_depth >= 0 ? nlohmann::json(o.max_depth) : nlohmann::json();
    run["min_samples_split"] = o.min_samples_split;
    run["min_gain"] = o.min_gain;
    run["model_digest"] = artifact.content_digest;
    write_run_manifest(o.out, std::move(run));

    std::cout << "trained on " << train_rows.rows.size() << " rows, "
              << selection.selected.size() << " features; tree has "
              << node_count(model.root) << " nodes\n"
              << "model digest: " << artifact.content_digest << "\n";
    return 0;
}

int cmd_eval(const ModelOptions& o) {
    fs::create_directories(o.out);
    const TrainedModel model = load_model(o.model);
    const DatasetTable prepped = load_for_model(model, o.data, delimiter_char(o.delimiter));
    if (!prepped.has_label()) {
        throw std::runtime_error("eval needs labeled data: column '" +
                                 model.plan.label_column + "' missing from " + o.data);
    }

    const TablePredictions predictions = predict_table(model, prepped);
    const std::vector<std::string> truth = prepped.labels();
    MetricsReport report =
        metrics_from_confusion(confusion(truth, predictions.labels, model.class_order));
    report.loss = cross_entropy_loss(predictions.probas, truth, model.class_order);
    report.apt_ms = measure_apt(model, model_feature_rows(model, prepped), 1);
    report.model_meta = model_meta_json(model);

    write_json_file((fs::path(o.out) / "report.json").string(), report_to_json(report));

    nlohmann::json run = common_manifest("eval", o);
    run["model"] = o.model;
    run["reference"] = o.reference;
    write_run_manifest(o.out, std::move(run));

    std::cout << render_report(report, o.reference ? &reference_rows() : nullptr);
    return 0;
}

int cmd_predict(const ModelOptions& o) {
    fs::create_directories(o.out);
    const TrainedModel model = load_model(o.model);
    const DatasetTable prepped = load_for_model(model, o.data, delimiter_char(o.delimiter));
    const TablePredictions predictions = predict_table(model, prepped);

    const char delim = delimiter_char(o.delimiter);
    std::string text = "prediction";
    for (const std::string& token : model.class_order) {
        text += delim;
        text += csv_escape("p_" + token, delim);
    }
    text += '\n';
    for (std::size_t i = 0; i < predictions.labels.size(); ++i) {
        text += csv_escape(predictions.labels[i], delim);
        for (double p : predictions.probas[i]) {
            text += delim;
            text += double_to_string(p);
        }
        text += '\n';
    }
    const std::string path = (fs::path(o.out) / "predictions.csv").string();
    write_text_file(path, text);

    nlohmann::json run = common_manifest("predict", o);
    run["model"] = o.model;
    write_run_manifest(o.out, std::move(run));

    std::cout << "wrote " << predictions.labels.size() << " predictions to " << path << "\n";
    return 0;
}

int cmd_bench(const ModelOptions& o) {
    fs::create_directories(o.out);
    const TrainedModel model = load_model(o.model);
    const DatasetTable prepped = load_for_model(model, o.data, delimiter_char(o.delimiter));
    const auto rows = model_feature_rows(model, prepped);
    const double apt = measure_apt(model, rows, o.repetitions);

    write_json_file((fs::path(o.out) / "report.json").string(),
                    nlohmann::json{{"apt_ms", apt},
                                   {"repetitions", o.repetitions},
                                   {"rows", rows.size()}});

    nlohmann::json run = common_manifest("bench", o);
    run["model"] = o.model;
    run["repetitions"] = o.repetitions;
    write_run_manifest(o.out, std::move(run));

    std::cout << "APT: " << apt << " ms/sample over " << rows.size() << " rows x "
              << o.repetitions << " repetitions\n";
    return 0;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_label) {
    cmd->add_option("--data", o.data, "input CSV with header row")->required();
    auto* label = cmd->add_option("--label", o.label, "label column name");
    if (needs_label) label->required();
    cmd->add_option("--delimiter", o.delimiter, "field delimiter (single character)")
        ->check([](const std::string& s) {
            return s.size() == 1 ? std::string{} : std::string{"delimiter must be one character"};
        });
    cmd->add_option("--out", o.out, "output directory (created if absent)");
}

void add_selection(CLI::App* cmd, TrainOptions& o) {
    cmd->add_option("--select", o.select, "feature policy: top-k=N or min-gain=T (default: all)")
        ->check([](const std::string& s) {
            try {
                parse_policy(s);
                return std::string{};
            } catch (const std::exception& e) {
                return std::string{e.what()};
            }
        });
    cmd->add_option("--rank-by", o.rank_by, "ranking key")
        ->check(CLI::IsMember({"gain", "gain-ratio"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-grove decision-tree intrusion detection pipeline"};
    app.require_subcommand(1);

    TrainOptions split_opts, select_opts, train_opts;
    ModelOptions eval_opts, predict_opts, bench_opts;

    CLI::App* split_cmd = app.add_subcommand("split", "stratified train/validation split");
    add_common(split_cmd, split_opts, true);
    split_cmd->add_option("--seed", split_opts.seed, "shuffle seed");
    split_cmd->add_option("--train-fraction", split_opts.train_fraction, "train share")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));

    CLI::App* select_cmd = app.add_subcommand("select", "rank features by entropy scores");
    add_common(select_cmd, select_opts, true);
    add_selection(select_cmd, select_opts);

    CLI::App* train_cmd = app.add_subcommand("train", "induce (and optionally prune) a tree");
    add_common(train_cmd, train_opts, true);
    train_cmd->add_option("--seed", train_opts.seed, "split seed");
    train_cmd->add_option("--train-fraction", train_opts.train_fraction, "train share")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 1.0));
    train_cmd->add_option("--criterion", train_opts.criterion, "split criterion")
        ->check(CLI::IsMember({"gain", "gain-ratio"}));
    add_selection(train_cmd, train_opts);
    train_cmd->add_flag("--prune", train_opts.prune, "reduced-error pruning on the validation split");
    train_cmd->add_option("--max-depth", train_opts.max_depth, "depth limit (default: none)")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--min-samples-split", train_opts.min_samples_split,
                          "smallest splittable node");
    train_cmd->add_option("--min-gain", train_opts.min_gain,
                          "required criterion score for a split");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a model on labeled data");
    add_common(eval_cmd, eval_opts, false);
    eval_cmd->add_option("--model", eval_opts.model, "model.json path")->required();
    eval_cmd->add_flag("--reference", eval_opts.reference,
                       "append published baseline rows to the table");

    CLI::App* predict_cmd = app.add_subcommand("predict", "emit per-row predictions");
    add_common(predict_cmd, predict_opts, false);
    predict_cmd->add_option("--model", predict_opts.model, "model.json path")->required();

    CLI::App* bench_cmd = app.add_subcommand("bench", "measure prediction latency");
    add_common(bench_cmd, bench_opts, false);
    bench_cmd->add_option("--model", bench_opts.model, "model.json path")->required();
    bench_cmd->add_option("--repetitions", bench_opts.repetitions, "timed passes over the data")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (split_cmd->parsed()) return cmd_split(split_opts);
        if (select_cmd->parsed()) return cmd_select(select_opts);
        if (train_cmd->parsed()) return cmd_train(train_opts);
        if (eval_cmd->parsed()) return cmd_eval(eval_opts);
        if (predict_cmd->parsed()) return cmd_predict(predict_opts);
        if (bench_cmd->parsed()) return cmd_bench(bench_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
