#include <doctest.h>

#include "coaforge/errors.hpp"
#include "coaforge/mission.hpp"
#include "coaforge/pathfinding.hpp"
#include "coaforge/scenario_io.hpp"
#include "support.hpp"

using namespace coaforge;

namespace {

struct Table2 {
    Scenario scenario = load_scenario(testing::read_fixture("table2.scn"));
    OpOrder order = parse_opord(testing::read_fixture("table2.opord"));
};

std::vector<std::string> texts(const std::vector<Task>& tasks)
{
    std::vector<std::string> out;
    for (const auto& t : tasks)
        out.push_back(t.text);
    return out;
}

} // namespace

TEST_CASE("table2 mission analysis reproduces every row")
{
    Table2 f;
    auto ma = analyze_mission(f.order, f.scenario);
    CHECK(texts(ma.specified_tasks) == std::vector<std::string>{"Secure Objective Area 00"});
    CHECK(ma.operation_purpose == "Ensure maneuver conditions for follow-on forces");
    CHECK(texts(ma.implied_tasks) == std::vector<std::string>{"Secure Route 00 to enable seizure of Objective Area 00"});
    CHECK(ma.constraints == std::vector<std::string>{"River flowing from east to west"});
    CHECK(ma.end_state == "Enemy neutralized within the operational area");
    CHECK(ma.mission_statement == "Secure Objective 00 and ensure maneuver conditions for follow-on forces");

    REQUIRE(ma.specified_tasks.size() == 1);
    CHECK(ma.specified_tasks[0].object == "Objective 00");
    CHECK(ma.specified_tasks[0].source == TaskSource::specified);
    CHECK(ma.specified_tasks[0].reference == "3.c line 11");
    CHECK(ma.implied_tasks[0].source == TaskSource::implied);
    CHECK(ma.implied_tasks[0].reference == "rule: reachability");
}

TEST_CASE("table2 implied task agrees with a reachability oracle")
{
    Table2 f;
    // Without road cells neither infantry nor armor can reach the objective; with them both can.
    std::vector<Coord> roads;
    for (std::size_t i = 0; i < f.scenario.map.size(); ++i)
        if (f.scenario.map.cells()[i].surface == Surface::road)
            roads.push_back(f.scenario.map.coord(i));
    const Zone target({f.scenario.objectives[0].location});
    for (Role r : {Role::infantry, Role::armor}) {
        MobilityGraph open(f.scenario.map, f.scenario.weather, r);
        CHECK(shortest_path(open, f.scenario.friendly_entry(), target));
        MobilityGraph blocked(f.scenario.map, f.scenario.weather, r);
        blocked.block(roads);
        CHECK_FALSE(shortest_path(blocked, f.scenario.friendly_entry(), target));
    }
}

TEST_CASE("analysis is deterministic")
{
    Table2 f;
    CHECK(analyze_mission(f.order, f.scenario) == analyze_mission(f.order, f.scenario));
}

TEST_CASE("objective next to the entry zone has no implied tasks")
{
    auto doc = testing::minimal_scenario();
    doc["objectives"][0]["location"] = {2, 2};
    doc["own_unit_name"] = "a company";
    auto s = load_scenario(doc.dump());
    auto order = parse_opord(testing::read_fixture("table1.opord"));
    order.execution.tasks_to_subordinates = {{"A Company", "Seize OBJ 1.", 11}};
    order.execution.coordination = "Do not enter the village. Report when complete.";
    auto ma = analyze_mission(order, s);
    CHECK(ma.implied_tasks.empty());
    CHECK(texts(ma.specified_tasks) == std::vector<std::string>{"Seize OBJ 1"});
    CHECK(ma.constraints == std::vector<std::string>{"Do not enter the village"});
    CHECK(ma.operation_purpose == "Prevent enemy advance");
}

TEST_CASE("river without a bridge yields a crossing task; flanking enemy yields a screen")
{
    auto doc = testing::minimal_scenario();
    doc["map"]["terrain"][5] = "~~~~~~~~~~";
    doc["objectives"][0]["location"] = {5, 8};
    doc["units"].push_back({{"id", "E9"}, {"side", "enemy"}, {"echelon", "platoon"}, {"role", "recon"},
        {"combat_power", 3}, {"position", {0, 3}}, {"posture", "defend_hasty"}});
    auto s = load_scenario(doc.dump());
    auto order = parse_opord(testing::read_fixture("table1.opord"));
    order.execution.tasks_to_subordinates = {{"A Company", "Seize Objective 1", 11}};
    auto ma = analyze_mission(order, s);
    REQUIRE(ma.implied_tasks.size() == 1);
    CHECK(ma.implied_tasks[0].text == "Cross the river to enable seizure of Objective 1");
    CHECK(ma.implied_tasks[0].reference == "rule: river-crossing");

    // Add a ford-free road bridge: the crossing becomes a route-security task.
    doc["map"]["terrain"][5] = "~~~R~~~~~~";
    doc["routes"] = {{{"name", "Route 9"}, {"anchor", {3, 5}}}};
    s = load_scenario(doc.dump());
    ma = analyze_mission(order, s);
    REQUIRE(ma.implied_tasks.size() == 2);
    CHECK(ma.implied_tasks[0].text == "Secure Route 9 to enable seizure of Objective 1");
    CHECK(ma.implied_tasks[1].text == "Screen against enemy E9 at (0,3)");
    CHECK(ma.implied_tasks[1].verb == TaskVerb::support);
    CHECK(ma.implied_tasks[1].function == WarfightingFunction::protection);
    CHECK(ma.constraints == std::vector<std::string>{"River running east-west"});
}

TEST_CASE("own unit without a task line is an error")
{
    Table2 f;
    f.scenario.metadata.own_unit_name = "3rd Battalion";
    CHECK_THROWS_WITH_AS(analyze_mission(f.order, f.scenario), "no specified task addressed to unit '3rd Battalion'",
        PlanningError);
}
