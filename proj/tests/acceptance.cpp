// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <fmt/format.h>

#include "coaforge/coa_gen.hpp"
#include "coaforge/opord.hpp"
#include "coaforge/session.hpp"
#include "evaluate_properties.hpp"
#include "pathfinding_oracle.hpp"
#include "placement_oracle.hpp"
#include "support.hpp"
#include "wargame_support.hpp"

using namespace coaforge;
using nlohmann::json;
using testing::fixture_path;
using testing::read_fixture;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Verdict table2_via_cli()
{
    const std::string cmd = fmt::format("\"{}\" plan \"{}\" \"{}\" 2>&1", COAFORGE_CLI, fixture_path("table2.opord"),
        fixture_path("table2.scn"));
    const auto t0 = Clock::now();
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return {false, "cannot start the CLI"};
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
        out.append(buf.data(), n);
    const int status = pclose(pipe);
    const double elapsed = seconds_since(t0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

    const std::vector<std::pair<std::string, std::string>> expected = {
        {"Specified task", "Secure Objective Area 00"},
        {"Operation purpose", "Ensure maneuver conditions for follow-on forces"},
        {"Implied task", "Secure Route 00 to enable seizure of Objective Area 00"},
        {"Constraint", "River flowing from east to west"},
        {"End-state", "Enemy neutralized within the operational area"},
        {"Mission", "Secure Objective 00 and ensure maneuver conditions for follow-on forces"},
    };
    std::map<std::string, std::string> rows;
    std::istringstream lines(out);
    bool in_mission = false;
    for (std::string line; std::getline(lines, line);) {
        if (line == "MISSION ANALYSIS") {
            in_mission = true;
            continue;
        }
        if (!in_mission)
            continue;
        if (line.empty())
            break;
        for (const auto& [label, _] : expected)
            if (line.rfind("  " + label + "  ", 0) == 0) {
                const auto start = line.find_first_not_of(' ', label.size() + 2);
                rows[label] = start == std::string::npos ? "" : line.substr(start);
            }
    }
    int matched = 0;
    std::string first_miss;
    for (const auto& [label, value] : expected) {
        if (rows[label] == value)
            ++matched;
        else if (first_miss.empty())
            first_miss = fmt::format("; {} was '{}'", label, rows[label]);
    }
    return {code == 0 && matched == 6 && elapsed < 5.0,
        fmt::format("exit {}, {}/6 rows exact, {:.2f} s (limit 5 s){}", code, matched, elapsed, first_miss)};
}

Verdict opord_round_trip()
{
    int total = 0, fixpoints = 0;
    bool has_table1 = false;
    for (const auto& entry : std::filesystem::directory_iterator(fixture_path("corpus"))) {
        const std::string name = entry.path().filename().string();
        has_table1 = has_table1 || read_fixture("corpus/" + name) == read_fixture("table1.opord");
        ++total;
        try {
            const auto first = parse_opord(read_fixture("corpus/" + name));
            const auto rendered = render_opord(first);
            const auto second = parse_opord(rendered);
            if (second == first && render_opord(second) == rendered)
                ++fixpoints;
        } catch (const std::exception&) {
        }
    }
    return {total == 20 && fixpoints == total && has_table1,
        fmt::format("{}/{} orders are fixpoints, Table I example {}", fixpoints, total, has_table1 ? "included" : "missing")};
}

Verdict pathfinding_oracle()
{
    const auto t0 = Clock::now();
    const auto t = testing::run_path_oracle(100, 20250320);
    const double elapsed = seconds_since(t0);
    return {t.mismatches == 0 && t.compared > 0 && elapsed < 10.0,
        fmt::format("{} exact matches, {} agreed unreachable, {} mismatches over 100 maps x 4 role/weather combos, "
                    "{:.2f} s (limit 10 s)",
            t.compared, t.unreachable_agree, t.mismatches, elapsed)};
}

Verdict placement_oracle()
{
    const auto r = testing::run_placement_oracle(50, 2024);
    return {r.instances == 50 && r.hard_violations == 0 && r.worst_ratio >= 0.85,
        fmt::format("{} instances, {} hard-constraint violations, worst greedy/optimum {:.3f} (floor 0.85)",
            r.instances, r.hard_violations, r.worst_ratio)};
}

bool stats_close(const WargameStats& a, const WargameStats& b)
{
    auto near = [](double x, double y) { return std::abs(x - y) <= 1e-12; };
    if (a.replications != b.replications || a.per_phase.size() != b.per_phase.size())
        return false;
    for (std::size_t i = 0; i < a.per_phase.size(); ++i)
        if (a.per_phase[i].phase != b.per_phase[i].phase
            || !near(a.per_phase[i].friendly_cp_delta, b.per_phase[i].friendly_cp_delta)
            || !near(a.per_phase[i].enemy_cp_delta, b.per_phase[i].enemy_cp_delta))
            return false;
    return near(a.success_probability, b.success_probability) && near(a.friendly_loss_rate, b.friendly_loss_rate)
        && near(a.enemy_attrition_rate, b.enemy_attrition_rate) && near(a.mean_duration, b.mean_duration)
        && near(a.reliability, b.reliability);
}

Verdict wargame_determinism()
{
    PlanningConfig config;
    config.k = 2;
    config.replications = 20;
    auto s = PlanningSession::create("det", read_fixture("fig5_battalion.scn"), read_fixture("fig5.opord"), config);
    const auto& report = s.replan();
    const CourseOfAction& coa = report.coas.front().coa;
    const EnemyCoA& enemy = report.enemy_coas.front();

    const std::string reference = trace_jsonl(simulate(s.scenario(), coa, enemy, 4242).trace());
    int identical = 0;
    for (int i = 0; i < 100; ++i)
        identical += trace_jsonl(simulate(s.scenario(), coa, enemy, 4242).trace()) == reference;

    const auto one = monte_carlo_evaluate(s.scenario(), coa, enemy, 200, 42, {.threads = 1});
    int agreeing = 0;
    for (int threads : {4, 8})
        agreeing += stats_close(monte_carlo_evaluate(s.scenario(), coa, enemy, 200, 42, {.threads = threads}), one);
    return {identical == 100 && agreeing == 2 && !reference.empty(),
        fmt::format("{}/100 repeated traces bit-identical ({} events); 4- and 8-way stats within 1e-12 of 1-way: {}/2",
            identical, std::count(reference.begin(), reference.end(), '\n'), agreeing)};
}

Verdict conservation()
{
    std::mt19937 rng(31);
    int increases = 0, negatives = 0, boundary = 0, late = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto k = testing::random_skirmish(rng);
        const auto out = simulate(k.scenario, k.coa, k.enemy, static_cast<std::uint64_t>(i));
        late += out.state.tick > k.scenario.time_limit;
        std::map<std::string, double> start;
        for (const auto& u : k.scenario.friendly_units)
            start[u.id] = u.combat_power;
        for (const auto& u : k.enemy.forces)
            start[u.id] = u.combat_power;
        for (const auto& u : out.state.units) {
            negatives += u.combat_power < 0.0;
            increases += u.combat_power > start.at(u.id);
        }
        for (const auto& e : out.trace()) {
            if (e.kind == EventKind::engage)
                increases += (e.detail[0] > 0.0) + (e.detail[1] > 0.0);
            if (e.kind == EventKind::move) {
                auto it = k.coa.boundaries.find(e.actors[0]);
                if (it != k.coa.boundaries.end() && !it->second.contains({int(e.detail[0]), int(e.detail[1])}))
                    ++boundary;
            }
        }
    }
    return {increases == 0 && negatives == 0 && boundary == 0 && late == 0,
        fmt::format("1000 simulations: {} CP increases, {} negative CP, {} boundary violations, {} past the time limit",
            increases, negatives, boundary, late)};
}

Verdict symmetry()
{
    const auto t0 = Clock::now();
    auto s = load_scenario(testing::duel_document(10, 10).dump());
    const auto st = monte_carlo_evaluate(s, testing::idle(), testing::holding(s), 1000, 99);
    const double elapsed = seconds_since(t0);
    return {std::abs(st.success_probability - 0.5) <= 0.05 && elapsed < 30.0,
        fmt::format("success probability {:.3f} over 1000 mirrored duels (0.5 +- 0.05), {:.2f} s (limit 30 s)",
            st.success_probability, elapsed)};
}

Verdict square_law()
{
    int cases = 0, exact = 0;
    double worst = 0;
    for (const auto& c : testing::duel_cases()) {
        ++cases;
        const auto s = testing::duel_scenario(c);
        const auto out = simulate(s, testing::idle(), testing::holding(s), 1, {.noise = false});
        const auto ref = testing::recurrence(c);
        std::vector<std::pair<double, double>> got;
        for (const auto& e : out.trace())
            if (e.kind == EventKind::engage)
                got.push_back({e.detail[0], e.detail[1]});
        bool ok = got.size() == ref.deltas.size() && out.state.tick == ref.decided;
        for (std::size_t i = 0; ok && i < got.size(); ++i) {
            const double err = std::max(
                std::abs(got[i].first - ref.deltas[i].first), std::abs(got[i].second - ref.deltas[i].second));
            worst = std::max(worst, err);
            ok = err <= 1e-9;
        }
        exact += ok;
    }
    return {cases == 20 && exact == cases,
        fmt::format("{}/{} parameterizations match the recurrence per tick, worst error {:.1e} (limit 1e-9)", exact,
            cases, worst)};
}

Verdict decision_matrix()
{
    const auto dom = testing::dominance_property(20, 11);
    const auto mono = testing::monotonicity_property(1000, 12);
    const auto aff = testing::affine_property(1000, 13);
    return {dom.failures == 0 && mono.failures == 0 && aff.failures == 0 && dom.checks > 0,
        fmt::format("dominance {}/{} grid points, monotonicity {}/{} trials, affine rescaling {}/{} trials",
            dom.checks - dom.failures, dom.checks, mono.checks - mono.failures, mono.checks,
            aff.checks - aff.failures, aff.checks)};
}

Verdict fig5_end_to_end()
{
    const auto scn = read_fixture("fig5_battalion.scn");
    const auto ord = read_fixture("fig5.opord");
    const PlanningConfig config; // k=3, n=200, seed=42
    const auto t0 = Clock::now();
    const auto report = run_pipeline(scn, ord, config);
    const double elapsed = seconds_since(t0);

    std::set<std::vector<Coord>> routes;
    for (const auto& c : report.coas)
        routes.insert(main_effort_route(c.coa));
    const std::string first = render_report_json(report);
    PlanningConfig restored;
    restored.apply(json::parse(first).at("config"));
    const bool regenerates = render_report_json(run_pipeline(scn, ord, restored)) == first;
    return {elapsed < 60.0 && report.coas.size() >= 2 && routes.size() >= 2 && !report.recommended.empty()
            && regenerates,
        fmt::format("{} CoAs, {} distinct main-effort routes, recommended {}, {:.2f} s (limit 60 s), regenerated "
                    "byte-identically: {}",
            report.coas.size(), routes.size(), report.recommended.empty() ? "none" : report.recommended, elapsed,
            regenerates ? "yes" : "no")};
}

Verdict replan_causality()
{
    PlanningConfig config;
    config.replications = 1000;
    auto s = PlanningSession::create(
        "causality", read_fixture("pass_company.scn"), read_fixture("pass_company.opord"), config);
    const RankedCoa lead = s.replan().coas.front();

    Observation reserve;
    reserve.time = 5;
    reserve.location = {4, 3};
    reserve.role_guess = Role::armor;
    reserve.size_estimate = 5;
    reserve.confidence = 0.95;
    s.inject_observation(reserve);
    const auto& after = s.replan();
    for (const auto& c : after.coas)
        if (c.coa.id == lead.coa.id && c.coa == lead.coa) {
            const double drop = lead.stats.success_probability - c.stats.success_probability;
            return {drop >= 0.05,
                fmt::format("{} success {:.3f} -> {:.3f} after the reserve (drop {:.3f}, margin 0.05, n=1000, seed {})",
                    lead.coa.id, lead.stats.success_probability, c.stats.success_probability, drop, config.seed)};
        }
    // The leading CoA was screened out; evaluate it directly at the same seed.
    const auto st = monte_carlo_evaluate(s.scenario(), lead.coa, after.enemy_coas.front(), 1000, config.seed);
    const double drop = lead.stats.success_probability - st.success_probability;
    return {drop >= 0.05,
        fmt::format("{} (no longer generated) success {:.3f} -> {:.3f} (drop {:.3f}, margin 0.05)", lead.coa.id,
            lead.stats.success_probability, st.success_probability, drop)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"table2-reproduction", table2_via_cli},
        {"opord-round-trip", opord_round_trip},
        {"pathfinding-oracle", pathfinding_oracle},
        {"placement-oracle", placement_oracle},
        {"wargame-determinism", wargame_determinism},
        {"conservation-boundary", conservation},
        {"symmetry-convergence", symmetry},
        {"square-law-oracle", square_law},
        {"decision-matrix-properties", decision_matrix},
        {"fig5-end-to-end", fig5_end_to_end},
        {"replan-causality", replan_causality},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, fmt::format("threw: {}", e.what())};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    }
    std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
    return failed == 0 ? 0 : 1;
}
