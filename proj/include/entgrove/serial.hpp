#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace entgrove {

// Shortest decimal string that parses back to the identical IEEE-754 double.
// Model files carry floating-point values in this form so that artifacts are
// byte-stable and predictions survive a save/load round trip bit-exactly.
std::string double_to_string(double value);
double double_from_string(std::string_view text);

// SHA-256 hex digest of a byte string.
std::string sha256_hex(std::string_view data);

// Canonical JSON body: compact dump of an nlohmann::json value. Object keys
// are already lexicographically sorted by the default json type; this is the
// exact byte string digests are computed over.
std::string canonical_dump(const nlohmann::json& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Pretty-printed (indent 2) with trailing newline; key order sorted.
void write_json_file(const std::string& path, const nlohmann::json& value);
nlohmann::json read_json_file(const std::string& path);

}  // namespace entgrove
