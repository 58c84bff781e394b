#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "entgrove/tree.hpp"

namespace entgrove {

inline constexpr int kModelFormatVersion = 1;

// On-disk form: {"format_version", "model", "content_digest"} where
// content_digest is SHA-256 over the compact key-sorted dump of "model".
// Every floating-point value inside "model" is stored as the shortest
// decimal string that round-trips to the same binary64, so two saves of one
// model are byte-identical and loads are bit-exact across platforms.
struct ModelArtifact {
    int format_version = kModelFormatVersion;
    TrainedModel model;
    std::string content_digest;
};

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

// Digest of the canonical "model" body.
std::string model_digest(const TrainedModel& model);

// Throws on I/O failure.
ModelArtifact save_model(const TrainedModel& model, const std::string& path);

// Re-verifies the digest and the format version; throws on mismatch, unknown
// version, unreadable file, or malformed JSON.
TrainedModel load_model(const std::string& path);

}  // namespace entgrove
