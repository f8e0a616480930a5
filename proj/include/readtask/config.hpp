#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace readtask {

// Key/value configuration files (grammar in docs/config.md):
//
//   # comment
//   seed = 7
//   [eval]
//   features = "sent_gaze_sacc"
//   exclude = ["S03", "S11"]
//
// Tables nest keys, so the example yields {"seed": 7, "eval": {...}}.
// Throws ParseError with the line number on malformed input or duplicate keys.
nlohmann::json parse_config(std::string_view text, const std::string& origin = "<config>");
nlohmann::json load_config(const std::filesystem::path& path);

// Parses a single value as it would appear on the right of '='. Bare words
// that are not numbers or booleans are taken as strings.
nlohmann::json parse_config_value(std::string_view text);

// Sets "a.b.c" inside `cfg`, creating intermediate tables.
void set_config_path(nlohmann::json& cfg, std::string_view dotted_key, nlohmann::json value);

}  // namespace readtask
