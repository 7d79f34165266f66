#include <doctest.h>

#include <random>

#include "coaforge/errors.hpp"
#include "coaforge/scenario_io.hpp"
#include "support.hpp"

using namespace coaforge;
using testing::minimal_scenario;

namespace {

std::vector<std::string> issues_of(const std::string& doc)
{
    try {
        load_scenario(doc);
    } catch (const ValidationError& e) {
        return e.issues();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, std::string_view needle)
{
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

} // namespace

TEST_CASE("minimal document loads with derived troop count")
{
    auto s = load_scenario(minimal_scenario().dump());
    CHECK(s.mettc.troops_available == 1);
    CHECK(s.mettc.troops_combat_power == 10.0);
    CHECK(s.map.width() == 10);
    CHECK(s.friendly_units.size() == 1);
    CHECK(s.objectives.size() == 1);
    CHECK(s.metadata.cell_size_km == 1.0);
    CHECK(s.metadata.tick_minutes == 10.0);
}

TEST_CASE("unit out of bounds is reported")
{
    auto doc = minimal_scenario();
    doc["units"][0]["position"] = {12, 3};
    auto issues = issues_of(doc.dump());
    REQUIRE(issues.size() == 1);
    CHECK(any_contains(issues, "position out of bounds"));
}

TEST_CASE("every violation is reported, not just the first")
{
    auto doc = minimal_scenario();
    doc["units"][0]["position"] = {12, 3};
    doc["units"][0]["role"] = "cavalry";
    doc["objectives"][0]["location"] = {-1, 0};
    doc["time_limit"] = 0;
    doc.erase("weather");
    auto issues = issues_of(doc.dump());
    CHECK(any_contains(issues, "units[0].role"));
    CHECK(any_contains(issues, "objectives"));
    CHECK(any_contains(issues, "time_limit"));
    CHECK(any_contains(issues, "weather"));
    CHECK(issues.size() == 4);

    // Bounds checks need a readable map; schema issues are still collected together.
    doc["map"]["terrain"][3] = "....X.....";
    doc["map"]["elevation"][5] = "0 0 0 x 0 0 0 0 0 0";
    issues = issues_of(doc.dump());
    CHECK(any_contains(issues, "map.terrain(4,3)"));
    CHECK(any_contains(issues, "map.elevation(3,5)"));
    CHECK(any_contains(issues, "units[0].role"));
}

TEST_CASE("malformed text is a validation error")
{
    CHECK_THROWS_AS(load_scenario("{\"map\": "), ValidationError);
    CHECK_THROWS_AS(load_scenario("[1,2]"), ValidationError);
}

TEST_CASE("serialize then load is the identity")
{
    std::mt19937 rng(11);
    const char surfaces[] = {'.', 'F', 'U', 'R', '~', 'M', '#'};
    for (int trial = 0; trial < 25; ++trial) {
        auto doc = minimal_scenario();
        std::uniform_int_distribution<int> pick(0, 6), elev(-20, 900);
        for (int r = 0; r < 10; ++r) {
            std::string row, e;
            for (int c = 0; c < 10; ++c) {
                row += surfaces[pick(rng)];
                e += (c ? " " : "") + std::to_string(elev(rng));
            }
            doc["map"]["terrain"][r] = row;
            doc["map"]["elevation"][r] = e;
        }
        doc["map"]["topology"] = trial % 2 ? "hex-odd-row" : "square-8-neighbor";
        doc["weather"]["precipitation"] = trial * 0.5;
        doc["units"].push_back({{"id", "E1"}, {"side", "enemy"}, {"echelon", "platoon"}, {"role", "armor"},
            {"combat_power", 3.25}, {"position", {trial % 10, 9}}, {"posture", "defend_prepared"}});
        doc["template"]["entries"].push_back({{"role", "artillery"}, {"count", 2},
            {"constraints",
                {{{"kind", "within_range"}, {"hard", false}, {"other_role", "infantry"}, {"distance", 4}},
                    {{"kind", "in_depth"}, {"min_depth", 2}, {"max_depth", 6}}}}});
        doc["civil_considerations"] = {{{"location", {3, 3}}, {"kind", "hospital"}}};
        doc["mission"] = "Seize OBJ 1.";
        auto s = load_scenario(doc.dump());
        auto text = serialize_scenario(s);
        auto again = load_scenario(text);
        CHECK(again == s);
        CHECK(serialize_scenario(again) == text);
    }
}

TEST_CASE("rasters are bit-exact")
{
    auto doc = minimal_scenario();
    doc["map"]["terrain"][0] = ".FURR~M#..";
    doc["map"]["elevation"][0] = "1 2 3 4 5 6 7 8 9 -10";
    auto s = load_scenario(doc.dump());
    auto t = terrain_raster(s.map);
    CHECK(t.substr(0, 11) == ".FURR~M#..\n");
    CHECK(elevation_raster(s.map).substr(0, 22) == "1 2 3 4 5 6 7 8 9 -10\n");
}
