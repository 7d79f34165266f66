#include <doctest.h>

#include <filesystem>

#include "coaforge/session.hpp"
#include "coaforge/wargame.hpp"
#include "support.hpp"

using namespace coaforge;
using nlohmann::json;
using testing::read_fixture;

namespace {

PlanningSession pass_session(PlanningConfig config = {})
{
    return PlanningSession::create(
        "S-test", read_fixture("pass_company.scn"), read_fixture("pass_company.opord"), config);
}

Observation sighting(Coord at, Role role, double size, double confidence)
{
    Observation o;
    o.time = 5;
    o.location = at;
    o.role_guess = role;
    o.size_estimate = size;
    o.confidence = confidence;
    return o;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("coaforge-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("a new session holds the analysis at esm version 1")
{
    auto s = pass_session();
    CHECK(s.status() == SessionStatus::fresh);
    CHECK(s.esm().version == 1);
    CHECK_FALSE(s.report());
    REQUIRE(s.history().size() == 1);
    CHECK(s.history()[0].kind == "created");
    CHECK(s.mission().mission_statement == "Seize Gold and open the pass");
}

TEST_CASE("injecting an observation bumps the version and marks the session stale")
{
    auto s = pass_session();
    s.replan();
    CHECK(s.status() == SessionStatus::planned);
    CHECK(s.inject_observation(sighting({4, 3}, Role::armor, 5, 0.95)) == 2);
    CHECK(s.esm().version == 2);
    CHECK(s.status() == SessionStatus::stale);
    CHECK(s.history().back().kind == "observation");
    CHECK(s.history().back().esm_version == 2);
    // The old report stays readable until the commander replans.
    REQUIRE(s.report());
    CHECK(s.report()->esm_version == 1);
}

TEST_CASE("an observation on an inferred unit's cell and role confirms it")
{
    auto s = PlanningSession::create(
        "S-fig5", read_fixture("fig5_battalion.scn"), read_fixture("fig5.opord"));
    const int observed = s.esm().count(Provenance::observed);
    const int inferred = s.esm().count(Provenance::inferred);
    REQUIRE(inferred > 0);
    const EnemyEntry* guess = nullptr;
    for (const auto& e : s.esm().units)
        if (e.provenance == Provenance::inferred) {
            guess = &e;
            break;
        }
    REQUIRE(guess);
    const Observation o = sighting(guess->unit.position, guess->unit.role, guess->unit.combat_power, 0.9);
    s.inject_observation(o);
    CHECK(s.esm().count(Provenance::observed) == observed + 1);
    CHECK(s.esm().count(Provenance::inferred) == inferred - 1);
}

TEST_CASE("a duplicate observation fuses with the unit it repeats")
{
    auto s = pass_session();
    const auto before = s.esm().units.size();
    const Unit& outpost = s.esm().units.front().unit;
    Observation o = sighting(outpost.position, outpost.role, outpost.combat_power, 1.0);
    o.time = 0;
    s.inject_observation(o);
    CHECK(s.esm().units.size() == before);
    CHECK(s.esm().count(Provenance::observed) == 1);
}

TEST_CASE("bad observations and selections leave the session untouched")
{
    auto s = pass_session();
    CHECK_THROWS_AS(s.inject_observation(sighting({40, 40}, Role::armor, 5, 0.9)), ValidationError);
    CHECK_THROWS_AS(s.inject_observation(sighting({4, 3}, Role::armor, 5, 1.5)), ValidationError);
    CHECK(s.esm().version == 1);
    CHECK(s.history().size() == 1);
    CHECK_THROWS_AS(s.select("COA-000"), ContractViolation);
    s.replan();
    CHECK_THROWS_AS(s.select("COA-999"), NotFound);
    CHECK_THROWS_AS(s.replan({{"k", 0}}), ValidationError);
    CHECK_THROWS_AS(s.replan({{"colour", "red"}}), ValidationError);
    CHECK(s.history().size() == 2);
}

TEST_CASE("replanning an unchanged session repeats the report")
{
    auto s = pass_session();
    const std::string first = render_report_json(s.replan());
    const int misses = s.cache_misses();
    const std::string second = render_report_json(s.replan());
    CHECK(first == second);
    CHECK(s.cache_misses() == misses);
}

TEST_CASE("a weight override reuses the cached wargame runs")
{
    auto s = pass_session();
    const auto& r1 = s.replan();
    const auto stats_before = r1.matrix.raw;
    const int misses = s.cache_misses();
    const int hits = s.cache_hits();
    CHECK(misses > 0);

    const auto& r2 = s.replan({{"weights", {0.1, 0.1, 0.1, 0.6, 0.1}}});
    CHECK(s.cache_misses() == misses);
    CHECK(s.cache_hits() == hits + misses);
    CHECK(r2.matrix.raw == stats_before);
    CHECK(r2.matrix.weights == Weights{0.1, 0.1, 0.1, 0.6, 0.1});
    CHECK(r2.config.weights == Weights{0.1, 0.1, 0.1, 0.6, 0.1});

    // A new seed is a different experiment.
    s.replan({{"seed", 7}});
    CHECK(s.cache_misses() > misses);
}

TEST_CASE("a revealed reserve on the leading axis lowers that CoA's success")
{
    PlanningConfig config;
    config.replications = 1000;
    auto s = pass_session(config);
    const RankedCoa lead = s.replan().coas.front();

    s.inject_observation(sighting({4, 3}, Role::armor, 5, 0.95));
    const auto& after = s.replan();
    const RankedCoa* same = nullptr;
    for (const auto& c : after.coas)
        if (c.coa.id == lead.coa.id)
            same = &c;
    REQUIRE(same);
    CHECK(same->coa == lead.coa);
    CHECK(same->stats.success_probability <= lead.stats.success_probability - 0.05);
}

TEST_CASE("two runs of the pipeline give byte-identical reports")
{
    const auto scn = read_fixture("table2.scn");
    const auto ord = read_fixture("table2.opord");
    CHECK(render_report_json(run_pipeline(scn, ord)) == render_report_json(run_pipeline(scn, ord)));
    CHECK(render_report_text(run_pipeline(scn, ord)) == render_report_text(run_pipeline(scn, ord)));
}

TEST_CASE("a report regenerates from its config snapshot")
{
    PlanningConfig config;
    config.k = 2;
    config.replications = 64;
    config.seed = 9;
    config.weights = {0.2, 0.2, 0.2, 0.2, 0.2};
    const auto scn = read_fixture("pass_company.scn");
    const auto ord = read_fixture("pass_company.opord");
    const auto report = run_pipeline(scn, ord, config);
    const json snapshot = json::parse(render_report_json(report)).at("config");

    PlanningConfig restored;
    restored.apply(snapshot);
    CHECK(restored == config);
    CHECK(render_report_json(run_pipeline(scn, ord, restored)) == render_report_json(report));
}

TEST_CASE("unreachable objectives fail at CoA generation naming the checks")
{
    auto doc = json::parse(read_fixture("pass_company.scn"));
    doc["map"]["terrain"][5] = std::string(9, '#');
    try {
        run_pipeline(doc.dump(), read_fixture("pass_company.opord"));
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "generate_friendly_coas");
        const std::string msg = e.what();
        CHECK(msg.find("suitability") != std::string::npos);
        CHECK(msg.find("feasibility") != std::string::npos);
        REQUIRE(e.details().size() == 2);
        CHECK(e.details()[0].rfind("suitability failed", 0) == 0);
    }
}

TEST_CASE("document errors are reported against their stage")
{
    try {
        run_pipeline("{\"name\": 3}", read_fixture("pass_company.opord"));
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK_FALSE(e.details().empty());
    }
    try {
        run_pipeline(read_fixture("pass_company.scn"), "1. Situation\nnothing else\n");
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "parse");
    }
}

TEST_CASE("replaying the history rebuilds the same session")
{
    auto s = pass_session({.k = 2, .replications = 50});
    s.replan();
    s.inject_observation(sighting({4, 3}, Role::armor, 3, 0.8));
    s.replan({{"weights", "0.5,0.2,0.1,0.1,0.1"}});
    s.select(s.report()->coas.back().coa.id);

    auto r = PlanningSession::replay(s.id(), s.history());
    CHECK(r.esm() == s.esm());
    CHECK(r.status() == s.status());
    CHECK(r.selected() == s.selected());
    CHECK(r.config() == s.config());
    REQUIRE(r.report());
    CHECK(render_report_json(*r.report()) == render_report_json(*s.report()));
    CHECK(r.state_json() == s.state_json());
}

TEST_CASE("a failed replan is part of the replayed history")
{
    auto s = pass_session({.replications = 20});
    s.inject_observation(sighting({4, 3}, Role::armor, 40, 1.0));
    CHECK_THROWS_AS(s.replan(), StageError);
    REQUIRE(s.last_error());
    CHECK((*s.last_error())["stage"] == "generate_friendly_coas");
    CHECK(s.history().back().kind == "error");
    auto r = PlanningSession::replay(s.id(), s.history());
    CHECK(r.state_json() == s.state_json());
}

TEST_CASE("the store persists sessions as event logs and reloads them")
{
    const auto dir = scratch_dir("store");
    std::string id;
    std::string report;
    {
        SessionStore store(dir);
        id = store.create(read_fixture("pass_company.scn"), read_fixture("pass_company.opord"),
            {.k = 1, .replications = 20});
        CHECK(id == "S-0001");
        report = store.with_session(id, [](PlanningSession& s) { return render_report_json(s.replan()); });
        store.with_session(id, [](PlanningSession& s) { s.inject_observation(sighting({4, 3}, Role::armor, 2, 0.7)); });
        CHECK_THROWS_AS(store.with_session("S-0404", [](PlanningSession&) { return 0; }), NotFound);
    }
    const auto log = read_event_log(dir / id / "events.jsonl");
    REQUIRE(log.size() == 3);
    CHECK(log[0].kind == "created");
    CHECK(log[1].kind == "replan");
    CHECK(log[2].kind == "observation");
    CHECK(log[2].esm_version == 2);

    SessionStore reopened(dir);
    CHECK(reopened.ids() == std::vector<std::string>{id});
    reopened.with_session(id, [&](PlanningSession& s) {
        CHECK(s.esm().version == 2);
        CHECK(s.status() == SessionStatus::stale);
        REQUIRE(s.report());
        CHECK(render_report_json(*s.report()) == report);
    });
    CHECK(reopened.create(read_fixture("table2.scn"), read_fixture("table2.opord")) == "S-0002");
    std::filesystem::remove_all(dir);
}

TEST_CASE("report json carries the decision inputs")
{
    const auto r = run_pipeline(read_fixture("table2.scn"), read_fixture("table2.opord"), {.k = 2, .replications = 30});
    const json j = json::parse(render_report_json(r));
    CHECK(j["config"]["k"] == 2);
    CHECK(j["config"]["replications"] == 30);
    CHECK(j["esm_version"] == 1);
    CHECK(j["mission"]["mission_statement"] == "Secure Objective 00 and ensure maneuver conditions for follow-on forces");
    CHECK(j["coas"].size() == r.coas.size());
    CHECK(j["recommended"] == j["coas"][0]["id"]);
    for (const auto& c : j["coas"]) {
        CHECK(c.contains("stats"));
        CHECK(c.contains("explanation"));
        CHECK(c["robustness"].is_object());
    }
    CHECK(j["decision_matrix"]["criteria"].size() == 5);
    const auto rows = mission_rows(r.mission);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == std::pair<std::string, std::string>{"Specified task", "Secure Objective Area 00"});
}
