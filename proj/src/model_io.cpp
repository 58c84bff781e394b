#include "entgrove/model_io.hpp"

#include <stdexcept>

#include "entgrove/preprocess.hpp"
#include "entgrove/serial.hpp"

namespace entgrove {

namespace {

nlohmann::json config_to_json(const TrainConfig& config) {
    nlohmann::json j{{"criterion", criterion_name(config.criterion)},
                     {"min_samples_split", config.min_samples_split},
                     {"min_gain", double_to_string(config.min_gain)},
                     {"prune", config.prune},
                     {"seed", config.seed}};
    j["max_depth"] = config.max_depth ? nlohmann::json(*config.max_depth) : nlohmann::json();
    return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig config;
    config.criterion = criterion_from_name(j.at("criterion").get<std::string>());
    if (!j.at("max_depth").is_null()) {
        config.max_depth = j.at("max_depth").get<std::size_t>();
    }
    config.min_samples_split = j.at("min_samples_split").get<std::size_t>();
    config.min_gain = double_from_string(j.at("min_gain").get<std::string>());
    config.prune = j.at("prune").get<bool>();
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

nlohmann::json node_to_json(const TreeNode& node) {
    nlohmann::json j;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [token, count] : node.class_counts) counts[token] = count;
    j["class_counts"] = std::move(counts);
    j["majority"] = node.majority;
    if (!node.is_leaf()) {
        j["feature"] = node.feature;
        j["feature_index"] = node.feature_index;
        if (node.threshold_split) {
            j["split"] = nlohmann::json{{"kind", "threshold"},
                                        {"threshold", double_to_string(node.threshold)}};
        } else {
            j["split"] = nlohmann::json{{"kind", "categories"}, {"sets", node.category_sets}};
        }
        nlohmann::json children = nlohmann::json::array();
        for (const TreeNode& child : node.children) children.push_back(node_to_json(child));
        j["children"] = std::move(children);
    }
    return j;
}

TreeNode node_from_json(const nlohmann::json& j) {
    TreeNode node;
    for (const auto& [token, count] : j.at("class_counts").items()) {
        node.class_counts.emplace(token, count.get<std::uint64_t>());
    }
    node.majority = j.at("majority").get<std::string>();
    if (!j.contains("children")) return node;

    node.feature = j.at("feature").get<std::string>();
    node.feature_index = j.at("feature_index").get<std::int32_t>();
    const nlohmann::json& split = j.at("split");
    if (split.at("kind").get<std::string>() == "threshold") {
        node.threshold_split = true;
        node.threshold = double_from_string(split.at("threshold").get<std::string>());
    } else {
        node.category_sets = split.at("sets").get<std::vector<std::vector<std::int32_t>>>();
    }
    for (const nlohmann::json& child : j.at("children")) {
        node.children.push_back(node_from_json(child));
    }
    return node;
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& model) {
    nlohmann::json kinds = nlohmann::json::array();
    for (ColumnKind kind : model.feature_kinds) kinds.push_back(column_kind_name(kind));
    return nlohmann::json{{"class_order", model.class_order},
                          {"config", config_to_json(model.config)},
                          {"feature_categories", model.feature_categories},
                          {"feature_kinds", std::move(kinds)},
                          {"plan", plan_to_json(model.plan)},
                          {"selected_features", model.selected_features},
                          {"training_manifest", manifest_to_json(model.training_manifest)},
                          {"tree", node_to_json(model.root)}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
    TrainedModel model;
    model.class_order = j.at("class_order").get<std::vector<std::string>>();
    model.config = config_from_json(j.at("config"));
    model.feature_categories =
        j.at("feature_categories").get<std::vector<std::vector<std::string>>>();
    for (const nlohmann::json& kind : j.at("feature_kinds")) {
        model.feature_kinds.push_back(column_kind_from_name(kind.get<std::string>()));
    }
    model.plan = plan_from_json(j.at("plan"));
    model.selected_features = j.at("selected_features").get<std::vector<std::string>>();
    model.training_manifest = manifest_from_json(j.at("training_manifest"));
    model.root = node_from_json(j.at("tree"));
    return model;
}

std::string model_digest(const TrainedModel& model) {
    return sha256_hex(canonical_dump(model_to_json(model)));
}

ModelArtifact save_model(const TrainedModel& model, const std::string& path) {
    ModelArtifact artifact;
    artifact.model = model;
    nlohmann::json body = model_to_json(model);
    artifact.content_digest = sha256_hex(canonical_dump(body));
    nlohmann::json file{{"content_digest", artifact.content_digest},
                        {"format_version", artifact.format_version},
                        {"model", std::move(body)}};
    write_json_file(path, file);
    return artifact;
}

TrainedModel load_model(const std::string& path) {
    const nlohmann::json file = read_json_file(path);
    const int version = file.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
        throw std::runtime_error("unsupported model format_version " + std::to_string(version) +
                                 " in " + path);
    }
    const std::string digest = sha256_hex(canonical_dump(file.at("model")));
    if (digest != file.at("content_digest").get<std::string>()) {
        throw std::runtime_error("model digest mismatch in " + path + " (corrupted file?)");
    }
    return model_from_json(file.at("model"));
}

}  // namespace entgrove
