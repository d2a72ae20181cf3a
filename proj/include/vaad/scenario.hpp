#pragma once

// Scenario files: strict JSON descriptions of a simulation run. Unknown keys,
// wrong types and out-of-range values raise ConfigError naming the field.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "vaad/sim.hpp"

namespace vaad {

struct Scenario {
  SimConfig config;
  std::optional<std::string> output_dir;
  bool trace = false;
};

Scenario parse_scenario(const nlohmann::json& doc);

/// Reads and parses a scenario file. Unreadable files and JSON syntax errors
/// are ConfigErrors with an empty path.
Scenario load_scenario(const std::filesystem::path& path);

AdversaryStrategy parse_strategy(const nlohmann::json& spec, const std::string& path, std::size_t m);

/// Equivocation payloads: {"kind": "init_value", "v": [...]}, {"kind": "enough",
/// "e": N} or {"kind": "hex", "bytes": "..."} holding an encoded message.
ProtocolMessage parse_payload(const nlohmann::json& spec, const std::string& path);

}  // namespace vaad
