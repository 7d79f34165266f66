#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "coaforge/scenario.hpp"

namespace coaforge {

/// Parses and validates a scenario document. Throws ValidationError listing
/// every schema and invariant violation found.
Scenario load_scenario(std::string_view source);

/// Canonical document text; load_scenario(serialize_scenario(s)) == s for any
/// scenario with integer elevations.
std::string serialize_scenario(const Scenario& scenario);

/// Rows of single characters, one per cell, '\n'-terminated.
std::string terrain_raster(const GridMap& map);

/// Rows of space-separated integer elevations, '\n'-terminated.
std::string elevation_raster(const GridMap& map);

// Shared JSON helpers for other document formats.
nlohmann::ordered_json to_json(Coord c);
nlohmann::ordered_json to_json(const Zone& z);
nlohmann::ordered_json to_json(const Unit& u);
Coord coord_from_json(const nlohmann::json& j);
Unit unit_from_json(const nlohmann::json& j);

} // namespace coaforge
