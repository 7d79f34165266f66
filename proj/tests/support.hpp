#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace testing {

inline std::string fixture_path(const std::string& name)
{
    return std::string(COAFORGE_FIXTURES) + "/" + name;
}

inline std::string read_fixture(const std::string& name)
{
    std::ifstream in(fixture_path(name));
    if (!in)
        throw std::runtime_error("missing fixture " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 10x10 square map, one friendly infantry company, one objective.
inline nlohmann::json minimal_scenario()
{
    nlohmann::json terrain = nlohmann::json::array();
    nlohmann::json elevation = nlohmann::json::array();
    for (int r = 0; r < 10; ++r) {
        terrain.push_back(std::string(10, '.'));
        elevation.push_back("0 0 0 0 0 0 0 0 0 0");
    }
    return {
        {"name", "minimal"},
        {"own_unit_name", "A Company"},
        {"map", {{"topology", "square-8-neighbor"}, {"terrain", terrain}, {"elevation", elevation}}},
        {"weather", {{"precipitation", 0}, {"visibility", 10000}, {"wind_speed", 0}}},
        {"units",
            {{{"id", "A Company"}, {"side", "friendly"}, {"echelon", "company"}, {"role", "infantry"},
                {"combat_power", 10}, {"position", {0, 0}}, {"posture", "attack"}}}},
        {"objectives", {{{"id", "OBJ 1"}, {"location", {5, 5}}, {"kind", "seize"}, {"label", "Objective 1"}}}},
        {"entry_zones", {{"friendly", {{{"rect", {0, 0, 1, 1}}}}}, {"enemy", nlohmann::json::array()}}},
        {"template", {{"entries", nlohmann::json::array()}}},
        {"time_limit", 20},
    };
}

} // namespace testing
