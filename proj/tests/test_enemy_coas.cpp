#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/scenario_io.hpp"
#include "map_support.hpp"

using namespace coaforge;
using nlohmann::json;
using testing::flat;
using testing::terrain_of;
using testing::with_map;

namespace {

json enemy(const std::string& id, Coord at, const std::string& posture, double cp = 10)
{
    return {{"id", id}, {"side", "enemy"}, {"echelon", "company"}, {"role", "infantry"}, {"combat_power", cp},
        {"position", {at.col, at.row}}, {"posture", posture}};
}

// 12x12, ridge on rows 4-5, friendly entry in the south, enemy entry row 0.
Scenario ridge_scenario(const std::vector<json>& enemies, bool ridge = true)
{
    auto elevation = flat(12, 12);
    if (ridge)
        for (int c = 0; c < 12; ++c)
            elevation[4][c] = elevation[5][c] = 10;
    auto doc = with_map(testing::minimal_scenario(), std::vector<std::string>(12, std::string(12, '.')), elevation);
    json units = json::array();
    units.push_back({{"id", "A Company"}, {"side", "friendly"}, {"echelon", "company"}, {"role", "infantry"},
        {"combat_power", 30}, {"position", {6, 11}}, {"posture", "attack"}});
    for (const auto& e : enemies)
        units.push_back(e);
    doc["units"] = units;
    doc["objectives"] = {{{"id", "OBJ 1"}, {"location", {6, 1}}, {"kind", "seize"}, {"label", "Objective 1"}}};
    doc["entry_zones"]["friendly"] = {{{"rect", {0, 10, 11, 11}}}};
    doc["entry_zones"]["enemy"] = {{{"rect", {0, 0, 11, 0}}}};
    doc["time_limit"] = 40;
    return load_scenario(doc.dump());
}

EnemySituationMap esm_of(const TerrainAnalysisMap& t, const Scenario& s)
{
    return assess_enemy_capability(t, s.enemy_template, observations_from(s));
}

} // namespace

TEST_CASE("prepared enemy on a ridge with no reserve: defend_forward ranks first")
{
    const Scenario s = ridge_scenario({enemy("E1", {3, 5}, "defend_prepared"), enemy("E2", {6, 5}, "defend_prepared"),
        enemy("E3", {9, 5}, "defend_prepared")});
    const auto t = terrain_of(s);
    const auto esm = esm_of(t, s);

    // By hand: all three are forward and prepared, none in reserve or mobile.
    const auto df = archetype_fit(EnemyArchetype::defend_forward, esm, t);
    const auto did = archetype_fit(EnemyArchetype::defend_in_depth, esm, t);
    const auto ca = archetype_fit(EnemyArchetype::counterattack_main_avenue, esm, t);
    const auto wd = archetype_fit(EnemyArchetype::withdraw_delay, esm, t);
    const double hg = t.layer(LayerKind::high_ground).scores[t.map.index({6, 5})];
    CHECK(hg == doctest::Approx(1.0));
    CHECK(df.terrain == doctest::Approx(0.5 * hg + 0.5));
    CHECK(df.posture == doctest::Approx(1.0));
    CHECK(did.terrain == doctest::Approx(0.5 * hg));
    CHECK(did.posture == doctest::Approx(1.0));
    CHECK(ca.posture == doctest::Approx(0.0));
    CHECK(wd.terrain == doctest::Approx(0.0));
    CHECK(wd.posture == doctest::Approx(0.0));

    const auto set = generate_enemy_coas(esm, t, s, 4, {10, 3});
    REQUIRE_FALSE(set.coas.empty());
    CHECK(set.coas[0].archetype == EnemyArchetype::defend_forward);
    double sum = 0;
    for (std::size_t i = 0; i < set.coas.size(); ++i) {
        sum += set.coas[i].likelihood;
        CHECK(set.coas[i].likelihood >= 0);
        CHECK(set.coas[i].threat >= 0);
        CHECK(set.coas[i].threat <= 1);
        if (i > 0)
            CHECK(set.coas[i - 1].likelihood >= set.coas[i].likelihood);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("k = 1 gives exactly one enemy CoA with likelihood 1")
{
    const Scenario s = ridge_scenario({enemy("E1", {3, 5}, "defend_prepared"), enemy("E2", {6, 5}, "defend_hasty")});
    const auto t = terrain_of(s);
    const auto set = generate_enemy_coas(esm_of(t, s), t, s, 1, {10, 3});
    REQUIRE(set.coas.size() == 1);
    CHECK(set.coas[0].likelihood == 1.0);
}

TEST_CASE("equal archetype scores keep the fixed archetype order")
{
    // Two forward, one deep, all prepared, flat ground: forward fit 0.5*h + 1/3
    // equals depth fit 0.5*h + min(2/3, 1/3).
    const Scenario s = ridge_scenario({enemy("E1", {3, 6}, "defend_prepared"), enemy("E2", {8, 6}, "defend_prepared"),
                                          enemy("E3", {6, 1}, "defend_prepared")},
        false);
    const auto t = terrain_of(s);
    const auto esm = esm_of(t, s);
    const auto df = archetype_fit(EnemyArchetype::defend_forward, esm, t);
    const auto did = archetype_fit(EnemyArchetype::defend_in_depth, esm, t);
    REQUIRE(df.terrain == did.terrain);
    REQUIRE(df.posture == did.posture);
    const auto set = generate_enemy_coas(esm, t, s, 4, {10, 3});
    REQUIRE(set.coas.size() >= 2);
    CHECK(set.coas[0].archetype == EnemyArchetype::defend_forward);
    CHECK(set.coas[1].archetype == EnemyArchetype::defend_in_depth);
    CHECK(set.coas[0].likelihood == set.coas[1].likelihood);
}

TEST_CASE("k beyond the instantiable archetypes returns all of them with a diagnostic")
{
    // Without an enemy entry zone withdraw cannot be scripted.
    auto s = ridge_scenario({enemy("E1", {3, 5}, "defend_prepared"), enemy("E2", {6, 2}, "reserve")});
    s.enemy_entry_zones.clear();
    const auto t = terrain_of(s);
    const auto set = generate_enemy_coas(esm_of(t, s), t, s, 10, {10, 3});
    CHECK(set.coas.size() == 3);
    CHECK_FALSE(set.diagnostics.empty());
    double sum = 0;
    for (const auto& c : set.coas)
        sum += c.likelihood;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("preconditions: k >= 1 and a non-empty situation map")
{
    const Scenario s = ridge_scenario({enemy("E1", {3, 5}, "defend_prepared")});
    const auto t = terrain_of(s);
    CHECK_THROWS_AS(generate_enemy_coas(esm_of(t, s), t, s, 0), ContractViolation);
    CHECK_THROWS_AS(generate_enemy_coas(EnemySituationMap{}, t, s, 2), ContractViolation);
}

TEST_CASE("likelihoods: non-negative, sum to 1, argmax invariant under positive affine rescaling")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> score(0.0, 1.0), scale(0.01, 100.0), shift(-50.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> s(4);
        for (auto& v : s)
            v = score(rng);
        const auto l = archetype_likelihoods(s);
        REQUIRE(l.size() == 4);
        CHECK(std::accumulate(l.begin(), l.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : l)
            CHECK(v >= 0);
        const double a = scale(rng), b = shift(rng);
        std::vector<double> r = s;
        for (auto& v : r)
            v = a * v + b;
        const auto lr = archetype_likelihoods(r);
        CHECK(std::max_element(l.begin(), l.end()) - l.begin() == std::max_element(lr.begin(), lr.end()) - lr.begin());
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(lr[i] == doctest::Approx(l[i]).epsilon(1e-9));
    }
    const auto eq = archetype_likelihoods({0.3, 0.3, 0.3, 0.3});
    for (double v : eq)
        CHECK(v == doctest::Approx(0.25));
}
