#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>

#include <doctest.h>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/scenario_io.hpp"
#include "map_support.hpp"
#include "placement_oracle.hpp"

using namespace coaforge;
using nlohmann::json;

namespace {

using testing::flat;
using testing::template_entry;
using testing::terrain_of;
using testing::with_map;

Observation obs(Coord at, Role role, double size, double conf, std::string id = {})
{
    Observation o;
    o.location = at;
    o.role_guess = role;
    o.size_estimate = size;
    o.confidence = conf;
    o.unit_id = std::move(id);
    return o;
}

} // namespace

TEST_CASE("flat map: avenues follow the grid geodesic and high ground is constant")
{
    auto s = load_scenario(testing::minimal_scenario().dump());
    auto t = terrain_of(s);
    REQUIRE(!t.avenues().empty());
    const Zone entry = s.friendly_entry();
    for (const auto& a : t.avenues()) {
        int geodesic = 1 << 30;
        for (Coord c : entry.cells())
            geodesic = std::min(geodesic, s.map.distance(c, {5, 5}));
        if (&a == &t.avenues().front())
            CHECK(a.path.cost == doctest::Approx(geodesic));
        CHECK(a.path.cells.back() == Coord{5, 5});
    }
    const auto& high = t.layer(LayerKind::high_ground).scores;
    for (double v : high)
        CHECK(v == high.front());
}

TEST_CASE("single corridor through impassable ridges: one avenue, corridor is the chokepoint")
{
    // Ridge on rows 2-9 pierced by a road along column 5.
    std::vector<std::string> rows(12, std::string(12, '.'));
    for (int r = 2; r <= 9; ++r)
        for (int c = 0; c < 12; ++c)
            rows[r][c] = c == 5 ? 'R' : '#';
    auto doc = with_map(testing::minimal_scenario(), rows, flat(12, 12));
    doc["units"][0]["position"] = {5, 11};
    doc["entry_zones"]["friendly"] = {{{"rect", {4, 10, 6, 11}}}};
    doc["objectives"][0]["location"] = {5, 0};
    auto s = load_scenario(doc.dump());
    auto t = terrain_of(s);

    REQUIRE(t.avenues().size() == 1);
    const auto& route = t.avenues()[0].path.cells;
    CHECK(std::count(route.begin(), route.end(), Coord{5, 4}) == 1);
    CHECK(std::count(route.begin(), route.end(), Coord{5, 5}) == 1);

    const Zone entry = s.friendly_entry();
    // Exhaustive oracle: a cell lies on every entry-to-objective path iff
    // removing it disconnects the two. Those cells must score the maximum.
    auto connected_without = [&](Coord removed) {
        std::vector<bool> seen(s.map.size(), false);
        std::queue<Coord> q;
        for (Coord c : entry.cells())
            if (c != removed && s.map.at(c).surface != Surface::impassable) {
                seen[s.map.index(c)] = true;
                q.push(c);
            }
        while (!q.empty()) {
            Coord c = q.front();
            q.pop();
            if (c == Coord{5, 0})
                return true;
            for (Coord n : s.map.neighbors(c))
                if (n != removed && !seen[s.map.index(n)] && s.map.at(n).surface != Surface::impassable) {
                    seen[s.map.index(n)] = true;
                    q.push(n);
                }
        }
        return false;
    };
    const double peak = *std::max_element(t.chokepoint.begin(), t.chokepoint.end());
    CHECK(peak == 1.0);
    for (Coord c : {Coord{5, 4}, Coord{5, 5}}) {
        CHECK_FALSE(connected_without(c));
        CHECK(t.chokepoint[s.map.index(c)] == peak);
    }
    CHECK(t.chokepoint[s.map.index({0, 8})] == 0.0);
}

TEST_CASE("layer scores and combined overlay stay in [0,1]")
{
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> rows(10, std::string(10, '.'));
        auto elev = flat(10, 10);
        for (int r = 0; r < 10; ++r)
            for (int c = 0; c < 10; ++c) {
                elev[r][c] = static_cast<int>(rng() % 40);
                if (rng() % 8 == 0 && r > 2)
                    rows[r][c] = "F#MU"[rng() % 4];
            }
        auto s = load_scenario(with_map(testing::minimal_scenario(), rows, elev).dump());
        auto t = terrain_of(s);
        for (const auto& l : t.layers)
            for (double v : l.scores)
                CHECK((v >= 0.0 && v <= 1.0));
        for (double v : t.combined_overlay)
            CHECK((v >= 0.0 && v <= 1.0 + 1e-12));
    }
}

TEST_CASE("unique qualifying cell receives the inferred command post")
{
    auto elev = flat(10, 10);
    elev[3][3] = 50;
    auto doc = with_map(testing::minimal_scenario(), std::vector<std::string>(10, std::string(10, '.')), elev);
    doc["template"]["entries"] = {template_entry("command_post", 1,
        {{{"kind", "on_high_ground"}, {"hard", true}, {"percentile", 1.0}},
            {{"kind", "on_main_axis"}, {"hard", true}, {"distance", 1}}})};
    auto s = load_scenario(doc.dump());
    auto t = terrain_of(s);
    auto esm = assess_enemy_capability(t, s.enemy_template, {});
    REQUIRE(esm.units.size() == 1);
    CHECK(esm.count(Provenance::inferred) == 1);
    CHECK(esm.units[0].unit.position == Coord{3, 3});
    CHECK(esm.units[0].unit.role == Role::command_post);
    CHECK(esm.units[0].confidence == 0.5);
    CHECK(esm.version == 1);
}

TEST_CASE("an observation matching a template entry is observed, not inferred")
{
    auto doc = testing::minimal_scenario();
    doc["template"]["entries"] = {template_entry("artillery", 2), template_entry("infantry", 1)};
    auto s = load_scenario(doc.dump());
    auto t = terrain_of(s);
    auto esm = assess_enemy_capability(t, s.enemy_template, {obs({7, 7}, Role::artillery, 4, 0.9, "ARTY")});
    CHECK(esm.count(Provenance::observed) == 1);
    CHECK(esm.count(Provenance::inferred) == 3 - 1);
    CHECK(esm.units[0].unit.id == "ARTY");
    CHECK(esm.units[0].template_entry == 0);
    CHECK(esm.units[0].unit.echelon == Echelon::platoon);
    for (const auto& e : esm.units)
        if (e.provenance == Provenance::inferred)
            CHECK(e.confidence <= 0.5);
}

TEST_CASE("fusion merges same-role observations within one cell by noisy-OR")
{
    auto s = load_scenario(testing::minimal_scenario().dump());
    auto t = terrain_of(s);
    auto esm = assess_enemy_capability(t, s.enemy_template,
        {obs({6, 6}, Role::infantry, 8, 0.5), obs({7, 6}, Role::infantry, 5, 0.6, "E2"),
            obs({8, 6}, Role::armor, 3, 0.4), obs({3, 8}, Role::infantry, 2, 0.3)});
    REQUIRE(esm.units.size() == 3);
    const auto& fused = esm.units[0];
    CHECK(fused.confidence == doctest::Approx(1 - 0.5 * 0.4));
    CHECK(fused.unit.position == Coord{7, 6});
    CHECK(fused.unit.combat_power == 8);
    CHECK(fused.unit.id == "E2");
    CHECK(esm.units[1].unit.role == Role::armor);
    CHECK(esm.units[2].unit.id == "OBS-2");
    CHECK(esm.units[2].confidence == doctest::Approx(0.3));
}

TEST_CASE("observations outside the area of interest or with bad confidence are rejected")
{
    auto doc = testing::minimal_scenario();
    doc["enemy_weapon_reach"] = 0;
    auto s = load_scenario(doc.dump());
    auto t = terrain_of(s);
    CHECK_FALSE(t.frame.area_of_interest.contains({9, 9}));
    CHECK_THROWS_AS(assess_enemy_capability(t, s.enemy_template, {obs({9, 9}, Role::infantry, 1, 0.5)}),
        ValidationError);
    try {
        assess_enemy_capability(t, s.enemy_template, {obs({9, 9}, Role::infantry, 1, 1.5)});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.issues().size() == 2);
    }
}

TEST_CASE("unsatisfiable hard constraints omit the unit with a diagnostic")
{
    auto doc = testing::minimal_scenario();
    doc["template"]["entries"] = {template_entry("artillery", 1,
        {{{"kind", "reverse_slope"}, {"hard", true}, {"percentile", 0.5}}})};
    auto s = load_scenario(doc.dump());
    auto esm = assess_enemy_capability(terrain_of(s), s.enemy_template, {});
    CHECK(esm.units.empty());
    REQUIRE(esm.diagnostics.size() == 1);
    CHECK(esm.diagnostics[0].find("unsatisfiable") != std::string::npos);
}

TEST_CASE("assessment is deterministic, versioned, and monotone in observations")
{
    std::mt19937 rng(11);
    auto doc = testing::minimal_scenario();
    doc["template"]["entries"] = {template_entry("infantry", 3), template_entry("armor", 2),
        template_entry("artillery", 1, {{{"kind", "in_depth"}, {"hard", false}, {"min_depth", 4}, {"max_depth", 6}}})};
    auto s = load_scenario(doc.dump());
    auto t = terrain_of(s);
    const Role roles[] = {Role::infantry, Role::armor, Role::artillery, Role::recon};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Observation> list;
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i)
            list.push_back(obs({static_cast<int>(rng() % 10), static_cast<int>(rng() % 10)}, roles[rng() % 4], 3,
                0.1 * static_cast<double>(1 + rng() % 10)));
        auto a = assess_enemy_capability(t, s.enemy_template, list);
        auto b = assess_enemy_capability(t, s.enemy_template, list);
        CHECK(a == b);
        auto chained = assess_enemy_capability(t, s.enemy_template, list, &a);
        CHECK(chained.version == a.version + 1);
        chained.version = a.version;
        CHECK(chained == a);

        auto more = list;
        more.push_back(obs({static_cast<int>(rng() % 10), static_cast<int>(rng() % 10)}, roles[rng() % 4], 3, 0.7));
        auto c = assess_enemy_capability(t, s.enemy_template, more);
        CHECK(c.count(Provenance::observed) >= a.count(Provenance::observed));
        CHECK(c.count(Provenance::inferred) <= a.count(Provenance::inferred));
        // Observed units are never displaced.
        for (std::size_t i = 0; i < a.units.size(); ++i)
            if (a.units[i].provenance == Provenance::observed && c.units[i].unit.id == a.units[i].unit.id)
                CHECK(c.units[i].provenance == Provenance::observed);
    }
}

// Exhaustive placement oracle ------------------------------------------------

TEST_CASE("greedy placement against the exhaustive optimum on 50 random 8x8 instances")
{
    auto r = testing::run_placement_oracle(50, 2024);
    CHECK(r.instances == 50);
    CHECK(r.hard_violations == 0);
    CHECK(r.worst_ratio >= 0.85);
    MESSAGE("worst greedy/optimum ratio ", r.worst_ratio);
}
