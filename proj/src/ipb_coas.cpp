#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/pathfinding.hpp"
#include "coaforge/wargame.hpp"

namespace coaforge {

namespace {

constexpr EnemyArchetype kArchetypes[] = {EnemyArchetype::defend_forward, EnemyArchetype::defend_in_depth,
    EnemyArchetype::counterattack_main_avenue, EnemyArchetype::withdraw_delay};

int depth_of(const TerrainAnalysisMap& t, Coord c)
{
    int best = 0;
    bool first = true;
    for (Coord e : t.friendly_entry.cells()) {
        const int d = t.map.distance(c, e);
        if (first || d < best)
            best = d;
        first = false;
    }
    return best;
}

bool is_mobile(const Unit& u)
{
    return u.role == Role::armor || u.role == Role::recon || u.posture == Posture::attack
        || u.posture == Posture::moving;
}

// Units within two cells (in depth) of the shallowest one.
std::vector<bool> forward_mask(const EnemySituationMap& esm, const TerrainAnalysisMap& t)
{
    std::vector<bool> fwd(esm.units.size(), false);
    if (esm.units.empty())
        return fwd;
    int shallowest = std::numeric_limits<int>::max();
    for (const auto& e : esm.units)
        shallowest = std::min(shallowest, depth_of(t, e.unit.position));
    for (std::size_t i = 0; i < esm.units.size(); ++i)
        fwd[i] = depth_of(t, esm.units[i].unit.position) <= shallowest + 2;
    return fwd;
}

struct Features {
    double high = 0, forward = 0, depth = 0, axis = 0;
    double prepared = 0, hasty = 0, reserve = 0, mobile = 0, moving = 0;
};

Features features(const EnemySituationMap& esm, const TerrainAnalysisMap& t)
{
    Features f;
    const auto fwd = forward_mask(esm, t);
    const auto& pct = t.layer(LayerKind::high_ground).scores;
    const Avenue* axis = t.main_avenue();
    double total = 0;
    for (std::size_t i = 0; i < esm.units.size(); ++i) {
        const Unit& u = esm.units[i].unit;
        const double w = u.combat_power * esm.units[i].confidence;
        total += w;
        f.high += w * pct[t.map.index(u.position)];
        (fwd[i] ? f.forward : f.depth) += w;
        if (axis) {
            int d = std::numeric_limits<int>::max();
            for (Coord c : axis->path.cells)
                d = std::min(d, t.map.distance(u.position, c));
            if (d <= 2)
                f.axis += w;
        }
        if (u.posture == Posture::defend_prepared)
            f.prepared += w;
        if (u.posture == Posture::defend_hasty)
            f.hasty += w;
        if (u.posture == Posture::reserve)
            f.reserve += w;
        if (u.posture == Posture::moving)
            f.moving += w;
        if (is_mobile(u))
            f.mobile += w;
    }
    if (total > 0)
        for (double* v : {&f.high, &f.forward, &f.depth, &f.axis, &f.prepared, &f.hasty, &f.reserve, &f.mobile,
                 &f.moving})
            *v /= total;
    return f;
}

UnitTask hold(const Unit& u, Posture p)
{
    UnitTask t;
    t.unit_id = u.id;
    t.task = {TaskVerb::defend, u.id, WarfightingFunction::protection, TaskSource::specified,
        fmt::format("Defend at {}", to_string(u.position)), "archetype"};
    t.posture = p;
    return t;
}

std::string describe(EnemyArchetype a)
{
    switch (a) {
    case EnemyArchetype::defend_forward: return "Enemy defends forward in prepared positions";
    case EnemyArchetype::defend_in_depth: return "Enemy delays forward and defends in depth";
    case EnemyArchetype::counterattack_main_avenue: return "Enemy counterattacks along the main avenue";
    case EnemyArchetype::withdraw_delay: return "Enemy delays, then withdraws";
    }
    return {};
}

// Script for one archetype; nullopt when it cannot be instantiated.
std::optional<EnemyCoA> instantiate(EnemyArchetype a, const EnemySituationMap& esm, const TerrainAnalysisMap& t,
    const Scenario& scenario)
{
    EnemyCoA coa;
    coa.archetype = a;
    coa.plan.id = fmt::format("ECOA-{}", to_string(a));
    coa.plan.side = Side::enemy;
    coa.plan.summary = describe(a);
    for (const auto& e : esm.units) {
        coa.forces.push_back(e.unit);
        coa.forces.back().side = Side::enemy;
    }
    const auto fwd = forward_mask(esm, t);
    Phase p0{0, {}};

    switch (a) {
    case EnemyArchetype::defend_forward:
        for (const auto& u : coa.forces)
            p0.tasks.push_back(hold(u, Posture::defend_prepared));
        coa.plan.phases = {p0};
        return coa;

    case EnemyArchetype::defend_in_depth:
        for (std::size_t i = 0; i < coa.forces.size(); ++i)
            p0.tasks.push_back(
                hold(coa.forces[i], fwd[i] ? Posture::defend_hasty : Posture::defend_prepared));
        coa.plan.phases = {p0};
        return coa;

    case EnemyArchetype::counterattack_main_avenue: {
        const Avenue* axis = t.main_avenue();
        if (!axis)
            return std::nullopt;
        std::vector<Coord> toward_friendly(axis->path.cells.rbegin(), axis->path.cells.rend());
        bool any = false;
        for (const auto& u : coa.forces) {
            if (is_mobile(u) || u.posture == Posture::reserve) {
                MobilityGraph g(t.map, t.weather, u.role);
                if (auto r = join_route(g, u.position, toward_friendly)) {
                    UnitTask task;
                    task.unit_id = u.id;
                    task.task = {TaskVerb::destroy, axis->objective, WarfightingFunction::movement_maneuver,
                        TaskSource::specified, "Counterattack along the main avenue", "archetype"};
                    task.route = r->cells;
                    task.posture = Posture::attack;
                    p0.tasks.push_back(task);
                    if (coa.plan.main_effort.empty())
                        coa.plan.main_effort = u.id;
                    any = true;
                    continue;
                }
            }
            p0.tasks.push_back(hold(u, Posture::defend_prepared));
        }
        if (!any)
            return std::nullopt;
        coa.plan.phases = {p0};
        return coa;
    }

    case EnemyArchetype::withdraw_delay: {
        if (t.enemy_entry.empty())
            return std::nullopt;
        Phase p1{1, {}};
        for (std::size_t i = 0; i < coa.forces.size(); ++i) {
            const Unit& u = coa.forces[i];
            p0.tasks.push_back(hold(u, Posture::defend_hasty));
            if (!fwd[i])
                continue;
            MobilityGraph g(t.map, t.weather, u.role);
            if (auto r = shortest_path(g, Zone({u.position}), t.enemy_entry); r && r->cells.size() > 1) {
                UnitTask task;
                task.unit_id = u.id;
                task.task = {TaskVerb::move, "enemy_entry", WarfightingFunction::movement_maneuver,
                    TaskSource::specified, "Withdraw toward the rear", "archetype"};
                task.route = r->cells;
                task.posture = Posture::moving;
                p1.tasks.push_back(task);
            }
        }
        if (p1.tasks.empty())
            return std::nullopt;
        coa.plan.phases = {p0, p1};
        coa.plan.synchronization = {{1, TriggerKind::time_tick, std::max(1, scenario.time_limit / 2), ""}};
        return coa;
    }
    }
    return std::nullopt;
}

// Reference friendly advance: the strongest friendly maneuver unit moves
// down the main avenue to its objective.
std::optional<CourseOfAction> reference_advance(const TerrainAnalysisMap& t, const Scenario& scenario)
{
    const Avenue* axis = t.main_avenue();
    if (!axis)
        return std::nullopt;
    const Unit* best = nullptr;
    for (const auto& u : scenario.friendly_units)
        if (is_maneuver(u.role) && u.role != Role::engineer && (!best || u.combat_power > best->combat_power))
            best = &u;
    if (!best)
        return std::nullopt;
    MobilityGraph g(t.map, t.weather, best->role);
    auto r = join_route(g, best->position, axis->path.cells);
    if (!r)
        return std::nullopt;
    CourseOfAction coa;
    coa.id = "REFERENCE";
    UnitTask task;
    task.unit_id = best->id;
    task.task = {TaskVerb::seize, axis->objective, WarfightingFunction::movement_maneuver, TaskSource::specified,
        fmt::format("Seize {}", axis->objective), "reference advance"};
    task.route = r->cells;
    task.posture = Posture::attack;
    coa.phases = {{0, {task}}};
    coa.main_effort = best->id;
    coa.required_objectives = {axis->objective};
    return coa;
}

} // namespace

ArchetypeFit archetype_fit(EnemyArchetype a, const EnemySituationMap& esm, const TerrainAnalysisMap& terrain)
{
    const Features f = features(esm, terrain);
    ArchetypeFit fit;
    switch (a) {
    case EnemyArchetype::defend_forward:
        fit.terrain = 0.5 * f.high + 0.5 * f.forward;
        fit.posture = (f.prepared + 0.5 * f.hasty) * (1.0 - f.reserve);
        break;
    case EnemyArchetype::defend_in_depth:
        fit.terrain = 0.5 * f.high + 0.5 * 2.0 * std::min(f.forward, f.depth);
        fit.posture = f.prepared + 0.5 * f.hasty;
        break;
    case EnemyArchetype::counterattack_main_avenue:
        fit.terrain = f.axis;
        fit.posture = f.reserve + 0.5 * f.mobile;
        break;
    case EnemyArchetype::withdraw_delay:
        fit.terrain = f.depth;
        fit.posture = f.hasty + f.moving;
        break;
    }
    fit.terrain = std::clamp(fit.terrain, 0.0, 1.0);
    fit.posture = std::clamp(fit.posture, 0.0, 1.0);
    return fit;
}

std::vector<double> archetype_likelihoods(const std::vector<double>& scores)
{
    if (scores.empty())
        return {};
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    const double span = *hi - *lo;
    std::vector<double> out(scores.size());
    double sum = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double z = span > 0 ? (scores[i] - *lo) / span : 0.0;
        out[i] = std::exp(z);
        sum += out[i];
    }
    for (auto& v : out)
        v /= sum;
    return out;
}

EnemyCoASet generate_enemy_coas(const EnemySituationMap& esm, const TerrainAnalysisMap& terrain,
    const Scenario& scenario, int k, const EnemyCoAOptions& options)
{
    if (k < 1)
        throw ContractViolation("generate_enemy_coas needs k >= 1");
    if (esm.units.empty())
        throw ContractViolation("generate_enemy_coas needs a non-empty enemy situation map");

    EnemyCoASet set;
    std::vector<double> scores;
    for (EnemyArchetype a : kArchetypes) {
        auto coa = instantiate(a, esm, terrain, scenario);
        if (!coa) {
            set.diagnostics.push_back(fmt::format("archetype {} not instantiable", to_string(a)));
            continue;
        }
        const ArchetypeFit fit = archetype_fit(a, esm, terrain);
        coa->terrain_fit = fit.terrain;
        coa->posture_fit = fit.posture;
        coa->score = 0.6 * fit.terrain + 0.4 * fit.posture;
        scores.push_back(coa->score);
        set.coas.push_back(std::move(*coa));
    }
    const auto p = archetype_likelihoods(scores);
    for (std::size_t i = 0; i < set.coas.size(); ++i)
        set.coas[i].likelihood = p[i];
    std::stable_sort(set.coas.begin(), set.coas.end(),
        [](const EnemyCoA& a, const EnemyCoA& b) { return a.likelihood > b.likelihood; });

    if (static_cast<std::size_t>(k) > set.coas.size())
        set.diagnostics.push_back(
            fmt::format("requested {} enemy CoAs, only {} archetypes instantiable", k, set.coas.size()));
    else
        set.coas.resize(static_cast<std::size_t>(k));
    const double total = std::accumulate(
        set.coas.begin(), set.coas.end(), 0.0, [](double s, const EnemyCoA& c) { return s + c.likelihood; });
    for (auto& c : set.coas)
        c.likelihood /= total;

    auto reference = reference_advance(terrain, scenario);
    if (!reference)
        set.diagnostics.push_back("no reference friendly advance; threat left at 0");
    else
        for (auto& c : set.coas)
            c.threat = monte_carlo_evaluate(scenario, *reference, c, options.replications, options.seed)
                           .friendly_loss_rate;
    return set;
}

EnemyCoA static_defense(const EnemySituationMap& esm)
{
    EnemyCoA coa;
    coa.archetype = EnemyArchetype::defend_forward;
    coa.plan.id = "ECOA-static";
    coa.plan.side = Side::enemy;
    coa.plan.summary = "All enemy units hold their current positions";
    coa.plan.phases = {{0, {}}};
    for (const auto& e : esm.units) {
        coa.forces.push_back(e.unit);
        coa.forces.back().side = Side::enemy;
    }
    coa.likelihood = 1.0;
    return coa;
}

std::string_view to_string(EnemyArchetype a) noexcept
{
    switch (a) {
    case EnemyArchetype::defend_forward: return "defend_forward";
    case EnemyArchetype::defend_in_depth: return "defend_in_depth";
    case EnemyArchetype::counterattack_main_avenue: return "counterattack_main_avenue";
    case EnemyArchetype::withdraw_delay: return "withdraw_delay";
    }
    return "?";
}

} // namespace coaforge
