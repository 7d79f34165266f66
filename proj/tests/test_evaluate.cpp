#include <algorithm>
#include <regex>

#include <doctest.h>

#include "coaforge/errors.hpp"
#include "coaforge/evaluate.hpp"
#include "coaforge/scenario_io.hpp"
#include "evaluate_properties.hpp"
#include "wargame_support.hpp"

using namespace coaforge;
using testing::result_of;

TEST_CASE("single CoA: ranking is that CoA with total 1")
{
    const auto m = build_decision_matrix({result_of("COA-1", {0.7, 0.2, 0.3, 12, 0.9})}, default_weights());
    REQUIRE(m.ranking == std::vector<std::string>{"COA-1"});
    CHECK(m.totals[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : m.normalized[0])
        CHECK(v == 1.0);
}

TEST_CASE("three CoAs: totals match the hand computation")
{
    // success, loss, attrition, duration, reliability
    const std::vector<CoaResult> rs{result_of("COA-A", {0.9, 0.1, 0.5, 20, 0.95}),
        result_of("COA-B", {0.6, 0.3, 0.7, 10, 0.90}), result_of("COA-C", {0.75, 0.2, 0.3, 30, 0.85})};
    const auto m = build_decision_matrix(rs, {0.4, 0.2, 0.2, 0.1, 0.1});
    // Normalized rows: A (1, 1, 0.5, 0.5, 1), B (0, 0, 1, 1, 0.5), C (0.5, 0.5, 0, 0, 0).
    const std::array<std::array<double, 5>, 3> expected{
        {{1, 1, 0.5, 0.5, 1}, {0, 0, 1, 1, 0.5}, {0.5, 0.5, 0, 0, 0}}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t c = 0; c < 5; ++c)
            CHECK(m.normalized[i][c] == doctest::Approx(expected[i][c]).epsilon(1e-12));
    CHECK(std::abs(m.totals[0] - 0.85) < 1e-9);
    CHECK(std::abs(m.totals[1] - 0.35) < 1e-9);
    CHECK(std::abs(m.totals[2] - 0.30) < 1e-9);
    CHECK(m.ranking == std::vector<std::string>{"COA-A", "COA-B", "COA-C"});
}

TEST_CASE("matrix contracts")
{
    CHECK_THROWS_AS(build_decision_matrix({}, default_weights()), ContractViolation);
    CHECK_THROWS_AS(
        build_decision_matrix({result_of("X", {1, 0, 0, 1, 1}), result_of("X", {1, 0, 0, 1, 1})}, default_weights()),
        ContractViolation);
    CHECK_THROWS_AS(build_decision_matrix({result_of("X", {1, 0, 0, 1, 1})}, {0.5, 0.5, 0.5, 0, 0}), ContractViolation);
    CHECK_THROWS_AS(build_decision_matrix({result_of("X", {1, 0, 0, 1, 1})}, {1.2, -0.2, 0, 0, 0}), ContractViolation);
}

TEST_CASE("weights parse from the command-line form")
{
    const auto w = parse_weights("0.4,0.2,0.2,0.1,0.1");
    CHECK(w == default_weights());
    CHECK_THROWS_AS(parse_weights("0.5,0.5"), ValidationError);
    CHECK_THROWS_AS(parse_weights("0.4,0.2,x,0.1,0.1"), ValidationError);
    CHECK_THROWS_AS(parse_weights("0.5,0.2,0.2,0.1,0.1"), ValidationError);
}

TEST_CASE("permuting the input leaves the ranking unchanged")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CoaResult> rs;
        for (int i = 0; i < 5; ++i)
            rs.push_back(result_of("COA-" + std::to_string(i), testing::random_row(rng)));
        const auto w = testing::random_weights(rng);
        const auto ranking = build_decision_matrix(rs, w).ranking;
        std::shuffle(rs.begin(), rs.end(), rng);
        CHECK(build_decision_matrix(rs, w).ranking == ranking);
    }
}

TEST_CASE("dominance: rank 1 under all weights of the 11^3 grid")
{
    const auto t = testing::dominance_property(20, 11);
    CHECK(t.checks == 20 * 1331);
    CHECK(t.failures == 0);
}

TEST_CASE("single-criterion improvement never lowers rank (1000 trials)")
{
    const auto t = testing::monotonicity_property(1000, 12);
    CHECK(t.checks == 1000);
    CHECK(t.failures == 0);
}

TEST_CASE("positive affine rescaling of one column leaves the ranking unchanged")
{
    const auto t = testing::affine_property(1000, 13);
    CHECK(t.checks == 1000);
    CHECK(t.failures == 0);
}

// Selection -------------------------------------------------------------------

TEST_CASE("dominance: recommended with no sensitivity flips")
{
    const std::vector<CoaResult> rs{
        result_of("COA-B", {0.5, 0.3, 0.2, 30, 0.8}), result_of("COA-A", {0.9, 0.1, 0.6, 10, 0.95})};
    const auto m = build_decision_matrix(rs, default_weights());
    const auto sel = select_coa(m, rs, {}, GridMap{});
    CHECK(sel.recommended == "COA-A");
    CHECK_FALSE(sel.tie);
    REQUIRE(sel.explanations.size() == 2);
    CHECK(sel.explanations[0].coa_id == "COA-A");
    CHECK(sel.explanations[0].sensitivity.size() == 10);
    for (const auto& s : sel.explanations[0].sensitivity)
        CHECK_FALSE(s.flips);
    CHECK_FALSE(sel.explanations[0].weight_sensitive);
}

TEST_CASE("near-tie: a perturbation flips the ranking and the recommendation is flagged")
{
    // Normalized: A (1, 0, 0, 1, 0.05) -> 0.505; B (0, 1, 1, 0, 1) -> 0.5; C all 0.
    const std::vector<CoaResult> rs{result_of("COA-A", {0.9, 0.3, 0.2, 10, 0.805}),
        result_of("COA-B", {0.5, 0.1, 0.6, 20, 0.9}), result_of("COA-C", {0.5, 0.3, 0.2, 20, 0.8})};
    const auto m = build_decision_matrix(rs, default_weights());
    CHECK(m.totals[0] == doctest::Approx(0.505).epsilon(1e-9));
    CHECK(m.totals[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m.totals[0] - m.totals[1] < 0.01);
    const auto sel = select_coa(m, rs, {}, GridMap{});
    CHECK(sel.recommended == "COA-A");
    const auto& e = sel.explanations[0];
    CHECK(e.weight_sensitive);
    // Loss weight +0.1: A = (0.4 + 0.1 + 0.005) / 1.1, B = (0.3 + 0.2 + 0.1) / 1.1.
    const auto loss_up = std::find_if(e.sensitivity.begin(), e.sensitivity.end(), [](const SensitivityCase& s) {
        return s.criterion == Criterion::friendly_loss_rate && s.perturbation > 0;
    });
    REQUIRE(loss_up != e.sensitivity.end());
    CHECK(loss_up->flips);
    CHECK(loss_up->rank == 2);
    CHECK(e.verdict.find("weight-sensitive") != std::string::npos);
}

TEST_CASE("tie in totals: lower id recommended and the tie noted")
{
    // Normalized A (1, 0, 0, 1, 0) = 0.5, B (0, 1, 1, 0, 1) = 0.5.
    const std::vector<CoaResult> rs{
        result_of("COA-2", {0.5, 0.1, 0.6, 20, 0.9}), result_of("COA-1", {0.9, 0.3, 0.2, 10, 0.8})};
    const auto m = build_decision_matrix(rs, default_weights());
    REQUIRE(m.totals[0] == m.totals[1]);
    const auto sel = select_coa(m, rs, {}, GridMap{});
    CHECK(sel.recommended == "COA-1");
    CHECK(sel.tie);
    CHECK(sel.explanations[0].verdict.find("tied with COA-2") != std::string::npos);
}

// Explanations ----------------------------------------------------------------

namespace {

std::vector<double> numbers_in(const std::string& text)
{
    static const std::regex num(R"([-+]?\d+(\.\d+)?)");
    std::vector<double> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), num); it != std::sregex_iterator(); ++it)
        out.push_back(std::stod(it->str()));
    return out;
}

} // namespace

TEST_CASE("unopposed advance: every phase an advantage with friendly delta 0")
{
    auto doc = testing::minimal_scenario();
    doc["objectives"][0]["location"] = {5, 0};
    const Scenario s = load_scenario(doc.dump());
    CourseOfAction coa = testing::idle("COA-1");
    UnitTask t;
    t.unit_id = "A Company";
    t.route = {{0, 0}, {1, 0}, {2, 0}};
    UnitTask t2 = t;
    t2.route = {{2, 0}, {3, 0}, {4, 0}, {5, 0}};
    coa.phases = {{0, {t}}, {1, {t2}}};
    coa.synchronization = {{1, TriggerKind::time_tick, 3, ""}};
    const auto stats = monte_carlo_evaluate(s, coa, testing::holding(s), 20, 1);
    const std::vector<std::vector<Event>> traces{simulate(s, coa, testing::holding(s), hash64(1, 0)).state.event_log};
    const auto e = explain(coa, stats, traces, {}, s.map);
    REQUIRE(e.per_phase.size() == 2);
    for (const auto& f : e.per_phase) {
        CHECK(f.kind == FindingKind::advantage);
        CHECK(f.friendly_delta == 0.0);
    }
    CHECK(e.per_phase[1].narrative.find("began at tick 3") != std::string::npos);
    CHECK(e.assumptions.empty());
}

TEST_CASE("a phase losing 8 friendly CP against 3 enemy CP is a disadvantage")
{
    WargameStats st;
    st.replications = 50;
    st.per_phase = {{0, -8.0, -3.0}, {1, -1.0, -4.5}};
    const auto e = explain(testing::idle("COA-1"), st, {}, {}, GridMap{});
    REQUIRE(e.per_phase.size() == 2);
    CHECK(e.per_phase[0].kind == FindingKind::disadvantage);
    CHECK(e.per_phase[0].narrative.find("-8.00") != std::string::npos);
    CHECK(e.per_phase[0].narrative.find("-3.00") != std::string::npos);
    CHECK(e.per_phase[1].kind == FindingKind::advantage);

    // Every number in a narrative is the phase, a delta, or the replication count.
    for (const auto& f : e.per_phase) {
        const auto nums = numbers_in(f.narrative);
        REQUIRE(nums.size() == 4);
        CHECK(nums[0] == f.phase);
        CHECK(nums[1] == doctest::Approx(f.friendly_delta).epsilon(0.005));
        CHECK(nums[2] == doctest::Approx(f.enemy_delta).epsilon(0.005));
        CHECK(nums[3] == st.replications);
    }
    CHECK_THROWS_AS(explain(testing::idle(), WargameStats{}, {}, {}, GridMap{}), ContractViolation);
}

TEST_CASE("assumptions list the inferred units near the routes")
{
    auto doc = testing::minimal_scenario();
    const Scenario s = load_scenario(doc.dump());
    CourseOfAction coa = testing::idle("COA-1");
    UnitTask t;
    t.unit_id = "A Company";
    t.route = {{0, 0}, {1, 1}, {2, 2}};
    coa.phases[0].tasks = {t};
    WargameStats st;
    st.per_phase = {{0, 0, 0}};

    EnemySituationMap esm;
    EnemyEntry near, far, observed;
    near.unit.id = "INF-artillery-1";
    near.unit.role = Role::artillery;
    near.unit.position = {4, 2};
    near.provenance = Provenance::inferred;
    near.confidence = 0.4;
    far = near;
    far.unit.id = "INF-artillery-2";
    far.unit.position = {8, 8};
    observed = near;
    observed.unit.id = "E1";
    observed.provenance = Provenance::observed;
    esm.units = {near, far, observed};

    const auto e = explain(coa, st, {}, esm, s.map);
    REQUIRE(e.assumptions.size() == 1);
    CHECK(e.assumptions[0].unit_id == "INF-artillery-1");
    CHECK(e.assumptions[0].confidence == 0.4);
    CHECK(e.assumptions[0].distance == 2);

    esm.units = {far, observed};
    CHECK(explain(coa, st, {}, esm, s.map).assumptions.empty());
}
