#include "coaforge/coa_gen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "coaforge/pathfinding.hpp"
#include "coaforge/wargame.hpp"

namespace coaforge {

namespace {

constexpr double kScoreCap = 5.0;
constexpr int kExposureRadius = 2;

std::vector<std::size_t> friendly_avenues(const TerrainAnalysisMap& terrain, Role role)
{
    std::vector<std::size_t> out;
    const auto& av = terrain.avenues();
    for (std::size_t i = 0; i < av.size(); ++i)
        if (av[i].side == Side::friendly && av[i].role == role)
            out.push_back(i);
    return out;
}

int distance_to(const GridMap& map, Coord c, const std::vector<Coord>& cells)
{
    int best = std::numeric_limits<int>::max();
    for (Coord x : cells)
        best = std::min(best, map.distance(c, x));
    return best;
}

double enemy_cp_near(const GridMap& map, const EnemySituationMap& esm, const std::vector<Coord>& cells)
{
    double cp = 0;
    for (const auto& e : esm.units)
        if (distance_to(map, e.unit.position, cells) <= kExposureRadius)
            cp += e.confidence * e.unit.combat_power;
    return cp;
}

TaskVerb verb_for(ObjectiveKind k)
{
    switch (k) {
    case ObjectiveKind::seize: return TaskVerb::seize;
    case ObjectiveKind::secure: return TaskVerb::secure;
    case ObjectiveKind::destroy: return TaskVerb::destroy;
    }
    return TaskVerb::seize;
}

std::string capitalized(std::string_view s)
{
    std::string out(s);
    if (!out.empty())
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

// Road component through a named route's anchor.
std::set<Coord> road_component(const GridMap& map, Coord anchor)
{
    std::set<Coord> seen;
    if (!map.in_bounds(anchor) || map.at(anchor).surface != Surface::road)
        return seen;
    std::vector<Coord> stack{anchor};
    seen.insert(anchor);
    while (!stack.empty()) {
        Coord c = stack.back();
        stack.pop_back();
        for (Coord n : map.neighbors(c))
            if (map.at(n).surface == Surface::road && seen.insert(n).second)
                stack.push_back(n);
    }
    return seen;
}

std::string describe_route(const Scenario& scenario, const std::vector<Coord>& route)
{
    for (const auto& r : scenario.metadata.routes) {
        auto comp = road_component(scenario.map, r.anchor);
        const auto on = std::count_if(route.begin(), route.end(), [&](Coord c) { return comp.count(c) > 0; });
        if (on * 2 >= static_cast<long>(route.size()))
            return r.name;
    }
    const Coord mid = route[route.size() / 2];
    return fmt::format("the axis through {}", to_string(mid));
}

// Candidate construction with per-(unit, avenue) connector routes cached.
class Builder {
public:
    Builder(const MissionAnalysis& mission, const TerrainAnalysisMap& terrain, const EnemySituationMap& esm,
        const Scenario& scenario)
        : mission_(mission), terrain_(terrain), esm_(esm), scenario_(scenario)
    {
    }

    std::optional<CourseOfAction> build(const CandidateSpec& spec, const std::string& id)
    {
        const auto& avenues = terrain_.avenues();
        const Unit* me = scenario_.find_unit(spec.main_effort);
        if (!me || !spec.avenue.count(me->id))
            throw ContractViolation(fmt::format("main effort '{}' has no avenue", spec.main_effort));

        // Deconflict: main effort first, then the others by id; a route is
        // cut before the first cell an earlier route already holds.
        std::vector<std::string> order{me->id};
        for (const auto& [unit, _] : spec.avenue)
            if (unit != me->id)
                order.push_back(unit);
        std::set<Coord> claimed;
        std::map<std::string, std::vector<Coord>> routes;
        std::map<std::string, bool> reaches;
        for (const auto& unit_id : order) {
            const auto* full = connector(unit_id, spec.avenue.at(unit_id));
            if (!full)
                return std::nullopt;
            std::vector<Coord> r;
            for (Coord c : *full) {
                if (claimed.count(c))
                    break;
                r.push_back(c);
            }
            if (r.size() < 2)
                return std::nullopt;
            reaches[unit_id] = r.size() == full->size();
            claimed.insert(r.begin(), r.end());
            routes[unit_id] = std::move(r);
        }

        CourseOfAction coa;
        coa.id = id;
        coa.side = Side::friendly;
        coa.main_effort = me->id;
        coa.required_objectives = mission_.specified_objectives();
        Phase p0{0, {}}, p1{1, {}};
        std::vector<std::string> summary;

        for (const auto& u : scenario_.friendly_units) {
            auto it = routes.find(u.id);
            if (it != routes.end()) {
                const Avenue& av = avenues[spec.avenue.at(u.id)];
                const Objective* obj = scenario_.find_objective(av.objective);
                UnitTask t;
                t.unit_id = u.id;
                t.posture = Posture::attack;
                t.route = it->second;
                const std::string via = describe_route(scenario_, t.route);
                if (reaches[u.id]) {
                    const TaskVerb verb = verb_for(obj->kind);
                    t.target = obj->id;
                    t.task = {verb, obj->id, WarfightingFunction::movement_maneuver, TaskSource::specified,
                        fmt::format("{} {} via {}", capitalized(to_string(verb)), obj->label.empty() ? obj->id : obj->label,
                            via),
                        "coa"};
                } else {
                    t.target = me->id;
                    t.task = {TaskVerb::support, me->id, WarfightingFunction::movement_maneuver,
                        TaskSource::specified,
                        fmt::format("Support {} by advancing to {}", me->id, to_string(t.route.back())), "coa"};
                }
                summary.push_back(fmt::format("{}{}: {}", u.id, u.id == me->id ? " (main effort)" : "", t.task.text));
                if (spec.two_phase && u.id == me->id) {
                    const std::size_t mid = t.route.size() / 2;
                    if (mid < 1 || mid + 1 >= t.route.size())
                        return std::nullopt;
                    UnitTask second = t;
                    second.route.assign(t.route.begin() + static_cast<long>(mid), t.route.end());
                    t.route.resize(mid + 1);
                    t.task.verb = TaskVerb::move;
                    t.target.clear();
                    t.task.object = fmt::format("intermediate objective {}", to_string(t.route.back()));
                    t.task.text = fmt::format("Move to intermediate objective {} via {}", to_string(t.route.back()), via);
                    MobilityGraph g(scenario_.map, scenario_.weather, u.role);
                    const int trigger = static_cast<int>(std::ceil(route_cost(g, t.route))) + 1;
                    coa.synchronization.push_back({1, TriggerKind::time_tick, trigger, ""});
                    p1.tasks.push_back(second);
                    summary.back() += fmt::format(" in two phases (phase 2 at tick {})", trigger);
                }
                p0.tasks.push_back(std::move(t));
            } else if (u.role == Role::artillery) {
                UnitTask t;
                t.unit_id = u.id;
                t.target = me->id;
                t.task = {TaskVerb::support, me->id, WarfightingFunction::fires, TaskSource::specified,
                    fmt::format("Provide fires in support of {}", me->id), "coa"};
                p0.tasks.push_back(std::move(t));
            } else if (u.role == Role::logistics) {
                UnitTask t;
                t.unit_id = u.id;
                t.target = me->id;
                t.task = {TaskVerb::support, me->id, WarfightingFunction::sustainment, TaskSource::specified,
                    fmt::format("Sustain {}", me->id), "coa"};
                p0.tasks.push_back(std::move(t));
            }
        }
        coa.phases.push_back(std::move(p0));
        if (spec.two_phase)
            coa.phases.push_back(std::move(p1));
        std::string text;
        for (const auto& s : summary)
            text += (text.empty() ? "" : "; ") + s;
        coa.summary = text;
        return assign_boundaries(coa, scenario_);
    }

private:
    const std::vector<Coord>* connector(const std::string& unit_id, std::size_t avenue)
    {
        auto key = std::pair{unit_id, avenue};
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            const Unit* u = scenario_.find_unit(unit_id);
            MobilityGraph g(scenario_.map, scenario_.weather, u->role);
            auto r = join_route(g, u->position, terrain_.avenues()[avenue].path.cells);
            it = cache_.emplace(key, r ? std::optional(r->cells) : std::nullopt).first;
        }
        return it->second ? &*it->second : nullptr;
    }

    const MissionAnalysis& mission_;
    const TerrainAnalysisMap& terrain_;
    const EnemySituationMap& esm_;
    const Scenario& scenario_;
    std::map<std::pair<std::string, std::size_t>, std::optional<std::vector<Coord>>> cache_;
};

std::string coa_id(std::size_t index, std::size_t total)
{
    const int width = std::max(3, static_cast<int>(std::to_string(total).size()));
    return fmt::format("COA-{:0{}}", index, width);
}

ScreeningCheck suitability(const CourseOfAction& coa, const MissionAnalysis& mission, const Scenario& scenario)
{
    std::vector<std::string> missing;
    for (const auto& id : mission.specified_objectives()) {
        const Objective* obj = scenario.find_objective(id);
        bool addressed = false;
        for (const auto& phase : coa.phases)
            for (const auto& t : phase.tasks)
                if (t.target == id || t.task.object == id
                    || (obj && std::find(t.route.begin(), t.route.end(), obj->location) != t.route.end()))
                    addressed = true;
        if (!addressed)
            missing.push_back(id);
    }
    ScreeningCheck c{"suitability", missing.empty(), {}};
    if (missing.empty())
        c.detail = "all specified objectives addressed";
    else
        for (const auto& m : missing)
            c.detail += (c.detail.empty() ? "objective not addressed: " : ", ") + m;
    return c;
}

ScreeningCheck feasibility(
    const CourseOfAction& coa, const EnemySituationMap& esm, const Scenario& scenario, const CoaGenOptions& options)
{
    double worst = std::numeric_limits<double>::infinity();
    std::string worst_unit;
    for (const auto& unit_id : coa.tasked_units()) {
        const auto route = coa.full_route(unit_id);
        if (route.empty())
            continue;
        const Unit* u = scenario.find_unit(unit_id);
        const double enemy = enemy_cp_near(scenario.map, esm, route);
        const double ratio = enemy > 0 ? (u ? u->combat_power : 0.0) / enemy : std::numeric_limits<double>::infinity();
        if (ratio < worst) {
            worst = ratio;
            worst_unit = unit_id;
        }
    }
    ScreeningCheck c{"feasibility", worst >= options.force_ratio_threshold, {}};
    c.detail = std::isinf(worst)
        ? std::string("no enemy within 2 cells of any axis")
        : fmt::format("lowest axis force ratio {:.2f} ({}) against threshold {:.2f}", worst, worst_unit,
              options.force_ratio_threshold);
    return c;
}

ScreeningCheck acceptability(
    const CourseOfAction& coa, const EnemySituationMap& esm, const Scenario& scenario, const CoaGenOptions& options)
{
    auto stats =
        monte_carlo_evaluate(scenario, coa, static_defense(esm), options.screening_replications, options.seed);
    return {"acceptability", stats.friendly_loss_rate < options.loss_cap,
        fmt::format("projected friendly loss {:.1f}% against cap {:.0f}%", 100 * stats.friendly_loss_rate,
            100 * options.loss_cap)};
}

ScreeningCheck distinguishability(
    const CourseOfAction& coa, const std::vector<CourseOfAction>& accepted, const CoaGenOptions& options)
{
    const auto mine = main_effort_route(coa);
    double worst = 0;
    std::string against;
    for (const auto& other : accepted) {
        const double o = edge_overlap(mine, main_effort_route(other));
        if (o > worst || against.empty()) {
            worst = std::max(worst, o);
            against = other.id;
        }
    }
    if (accepted.empty())
        return {"distinguishability", true, "no other CoA to compare"};
    return {"distinguishability", worst <= options.max_overlap,
        fmt::format("main-effort route overlap {:.0f}% with {} (limit {:.0f}%)", 100 * worst, against,
            100 * options.max_overlap)};
}

} // namespace

const ScreeningCheck* FeasibilityVerdict::check(std::string_view name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

NoFeasibleCoA::NoFeasibleCoA(std::string coa_id, FeasibilityVerdict verdict)
    : PlanningError([&] {
          std::string msg = coa_id.empty()
              ? std::string("no feasible course of action; no candidate could be built, failed")
              : fmt::format("no feasible course of action; best candidate {} failed", coa_id);
          for (const auto& c : verdict.checks)
              if (!c.passed)
                  msg += fmt::format(" {} ({})", c.name, c.detail);
          return msg;
      }()),
      coa_id_(std::move(coa_id)), verdict_(std::move(verdict))
{
}

std::vector<std::string> assignable_units(const TerrainAnalysisMap& terrain, const Scenario& scenario)
{
    std::vector<std::string> out;
    for (const auto& u : scenario.friendly_units)
        if (is_maneuver(u.role) && !friendly_avenues(terrain, u.role).empty())
            out.push_back(u.id);
    return out;
}

std::vector<CandidateSpec> enumerate_candidates(const TerrainAnalysisMap& terrain, const Scenario& scenario)
{
    const auto units = assignable_units(terrain, scenario);
    std::vector<std::vector<std::size_t>> options;
    for (const auto& id : units)
        options.push_back(friendly_avenues(terrain, scenario.find_unit(id)->role));

    std::vector<CandidateSpec> out;
    if (units.empty())
        return out;
    std::vector<std::size_t> pick(units.size(), 0);
    while (true) {
        for (const auto& me : units)
            for (bool two : {false, true}) {
                CandidateSpec spec;
                for (std::size_t i = 0; i < units.size(); ++i)
                    spec.avenue[units[i]] = options[i][pick[i]];
                spec.main_effort = me;
                spec.two_phase = two;
                out.push_back(std::move(spec));
            }
        // Odometer, last unit fastest.
        std::size_t i = units.size();
        while (i > 0) {
            --i;
            if (++pick[i] < options[i].size())
                break;
            pick[i] = 0;
            if (i == 0)
                return out;
        }
    }
}

std::optional<CourseOfAction> build_candidate(const CandidateSpec& spec, std::size_t index,
    const MissionAnalysis& mission, const TerrainAnalysisMap& terrain, const EnemySituationMap& esm,
    const Scenario& scenario)
{
    Builder b(mission, terrain, esm, scenario);
    try {
        return b.build(spec, fmt::format("COA-{:03}", index));
    } catch (const PlanningError&) {
        return std::nullopt;
    }
}

double candidate_score(const CourseOfAction& coa, const EnemySituationMap& esm, const Scenario& scenario)
{
    double ratio = kScoreCap;
    for (const auto& id : coa.required_objectives) {
        const Objective* obj = scenario.find_objective(id);
        if (!obj)
            continue;
        double friendly = 0;
        for (const auto& unit_id : coa.tasked_units()) {
            const auto route = coa.full_route(unit_id);
            if (!route.empty() && route.back() == obj->location)
                friendly += scenario.find_unit(unit_id)->combat_power;
        }
        const double enemy = enemy_cp_near(scenario.map, esm, {obj->location});
        ratio = std::min(ratio, enemy > 0 ? friendly / enemy : (friendly > 0 ? kScoreCap : 0.0));
    }
    std::size_t cells = 0, exposed = 0;
    for (const auto& unit_id : coa.tasked_units())
        for (Coord c : coa.full_route(unit_id)) {
            ++cells;
            for (const auto& e : esm.units)
                if (scenario.map.distance(c, e.unit.position) <= kExposureRadius) {
                    ++exposed;
                    break;
                }
        }
    const double exposure = cells ? static_cast<double>(exposed) / static_cast<double>(cells) : 0.0;
    return std::min(ratio, kScoreCap) - exposure;
}

FeasibilityVerdict screen_coa(const CourseOfAction& coa, const MissionAnalysis& mission,
    const EnemySituationMap& esm, const Scenario& scenario, const std::vector<CourseOfAction>& accepted,
    const CoaGenOptions& options)
{
    FeasibilityVerdict v;
    v.checks = {suitability(coa, mission, scenario), feasibility(coa, esm, scenario, options),
        acceptability(coa, esm, scenario, options), distinguishability(coa, accepted, options)};
    v.feasible = std::all_of(v.checks.begin(), v.checks.end(), [](const ScreeningCheck& c) { return c.passed; });
    return v;
}

CourseOfAction assign_boundaries(const CourseOfAction& coa, const Scenario& scenario)
{
    const GridMap& map = scenario.map;
    const Zone ao = evaluate_battlespace(scenario).area_of_operations;
    std::vector<std::string> units;
    std::map<std::string, std::vector<Coord>> routes;
    for (const auto& id : coa.tasked_units()) {
        auto r = coa.full_route(id);
        if (r.empty())
            continue;
        units.push_back(id);
        routes[id] = std::move(r);
    }
    std::sort(units.begin(), units.end());
    for (std::size_t i = 0; i < units.size(); ++i)
        for (std::size_t j = i + 1; j < units.size(); ++j) {
            const auto& a = routes[units[i]];
            const auto& b = routes[units[j]];
            const bool shared = std::any_of(a.begin(), a.end(), [&](Coord c) {
                return std::find(b.begin(), b.end(), c) != b.end();
            });
            if (shared)
                throw PlanningError("indistinct axes; regenerate CoA");
        }

    std::map<Coord, std::string> owner;
    for (const auto& id : units) {
        const Zone corridor = Zone(routes[id]).dilated(map, 1);
        for (Coord c : corridor.cells()) {
            if (!ao.contains(c))
                continue;
            auto it = owner.find(c);
            if (it == owner.end()) {
                owner[c] = id;
                continue;
            }
            const int mine = distance_to(map, c, routes[id]);
            const int theirs = distance_to(map, c, routes[it->second]);
            if (mine < theirs || (mine == theirs && id < it->second))
                it->second = id;
        }
    }
    // Route cells always belong to their own unit (routes are disjoint).
    for (const auto& id : units)
        for (Coord c : routes[id])
            owner[c] = id;

    std::map<std::string, std::vector<Coord>> cells;
    for (const auto& [c, id] : owner)
        cells[id].push_back(c);
    CourseOfAction out = coa;
    out.boundaries.clear();
    for (auto& [id, cs] : cells)
        out.boundaries[id] = Zone(std::move(cs));
    return out;
}

std::vector<Coord> main_effort_route(const CourseOfAction& coa)
{
    return coa.full_route(coa.main_effort);
}

std::vector<CourseOfAction> generate_friendly_coas(const MissionAnalysis& mission, const TerrainAnalysisMap& terrain,
    const EnemySituationMap& esm, const Scenario& scenario, int k, const CoaGenOptions& options)
{
    if (k < 1)
        throw ContractViolation("generate_friendly_coas needs k >= 1");
    if (mission.specified_tasks.empty())
        throw ContractViolation("mission analysis has no specified task");
    const auto& av = terrain.avenues();
    if (std::none_of(av.begin(), av.end(), [](const Avenue& a) { return a.side == Side::friendly; })) {
        std::string objectives;
        for (const auto& id : mission.specified_objectives())
            objectives += (objectives.empty() ? "" : ", ") + id;
        throw NoFeasibleCoA("", {false,
            {{"suitability", false, fmt::format("no friendly avenue of approach reaches {}", objectives)},
                {"feasibility", false, "no axis of advance to assess"}}});
    }

    const auto specs = enumerate_candidates(terrain, scenario);
    Builder builder(mission, terrain, esm, scenario);
    struct Scored {
        CourseOfAction coa;
        double score;
    };
    std::vector<Scored> candidates;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        std::optional<CourseOfAction> coa;
        try {
            coa = builder.build(specs[i], coa_id(i, specs.size()));
        } catch (const PlanningError&) {
            continue;
        }
        if (!coa)
            continue;
        const double s = candidate_score(*coa, esm, scenario);
        candidates.push_back({std::move(*coa), s});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score > b.score : a.coa.id < b.coa.id;
    });

    std::vector<CourseOfAction> accepted;
    std::optional<std::pair<std::string, FeasibilityVerdict>> best_failure;
    for (const auto& cand : candidates) {
        if (static_cast<int>(accepted.size()) >= k)
            break;
        // Cheap checks first; the quick wargame only for survivors.
        auto suit = suitability(cand.coa, mission, scenario);
        auto feas = feasibility(cand.coa, esm, scenario, options);
        auto dist = distinguishability(cand.coa, accepted, options);
        if (suit.passed && feas.passed && dist.passed) {
            auto acc = acceptability(cand.coa, esm, scenario, options);
            if (acc.passed) {
                accepted.push_back(cand.coa);
                continue;
            }
            if (!best_failure)
                best_failure = {cand.coa.id, {false, {suit, feas, acc, dist}}};
        } else if (!best_failure) {
            best_failure = {cand.coa.id, screen_coa(cand.coa, mission, esm, scenario, accepted, options)};
        }
    }
    if (accepted.empty()) {
        if (!best_failure)
            throw PlanningError("no candidate course of action could be constructed");
        throw NoFeasibleCoA(best_failure->first, best_failure->second);
    }
    return accepted;
}

} // namespace coaforge
