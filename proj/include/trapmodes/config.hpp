#pragma once

// Run configuration: JSON schema checks and conversion to library types.

#include <json.hpp>
#include <optional>
#include <string>

#include "trapmodes/fdsolver.hpp"
#include "trapmodes/geometry.hpp"

namespace trapmodes {

/// Keys: variant, wall_bc, n, a, profile, budget, grid{hx, hy, l, truncation}, k.
/// Only n is required. profile is "zero" or {kind, amplitude?, values?}.
struct RunConfig {
  WaveguideSpec spec;
  GridSpec grid;
  int budget = 2000;
  int k = 2;
  nlohmann::json normalized;  ///< the config with every default filled in
};

/// Throws SpecError with a schema message on any violation.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a file; SpecError also for unreadable or malformed JSON.
RunConfig load_config(const std::string& path);

/// Rebuilds `normalized` after a field was overridden.
void renormalize(RunConfig& cfg);

nlohmann::json to_json(const GapProfile& profile);
nlohmann::json to_json(const WaveguideSpec& spec);
nlohmann::json to_json(const GridSpec& grid);

}  // namespace trapmodes
