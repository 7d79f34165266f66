#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "coaforge/errors.hpp"
#include "coaforge/hash.hpp"
#include "coaforge/ipb.hpp"

namespace coaforge {

namespace {

int distance_to(const GridMap& map, Coord c, const std::vector<Coord>& cells)
{
    int best = std::numeric_limits<int>::max();
    for (Coord x : cells)
        best = std::min(best, map.distance(c, x));
    return best;
}

double falloff(int dist, int reach)
{
    return std::max(0.0, 1.0 - static_cast<double>(dist) / (reach + 1));
}

std::string basis_of(const TerrainAnalysisMap& terrain, const DoctrinalTemplate& templ)
{
    Fnv1a t, d;
    for (const auto& layer : terrain.layers)
        for (double v : layer.scores)
            t.add(v);
    for (const auto& a : terrain.avenues())
        for (Coord c : a.path.cells)
            t.add(static_cast<std::int64_t>(terrain.map.index(c)));
    for (const auto& e : templ.entries) {
        d.add(to_string(e.role)).add(static_cast<std::int64_t>(e.count)).add(e.combat_power);
        for (const auto& c : e.constraints)
            d.add(to_string(c.kind))
                .add(static_cast<std::int64_t>(c.hard))
                .add(c.percentile)
                .add(static_cast<std::int64_t>(c.distance))
                .add(to_string(c.other_role))
                .add(static_cast<std::int64_t>(c.min_depth))
                .add(static_cast<std::int64_t>(c.max_depth));
    }
    return fmt::format("terrain {} template {}", t.hex(), d.hex());
}

} // namespace

int EnemySituationMap::count(Provenance p) const
{
    return static_cast<int>(
        std::count_if(units.begin(), units.end(), [&](const EnemyEntry& e) { return e.provenance == p; }));
}

std::vector<Observation> observations_from(const Scenario& scenario)
{
    std::vector<Observation> out;
    for (const auto& u : scenario.enemy_observed_units) {
        Observation o;
        o.location = u.position;
        o.role_guess = u.role;
        o.size_estimate = u.combat_power;
        o.confidence = 1.0;
        o.sensor = Sensor::ground_recon;
        o.unit_id = u.id;
        o.posture = u.posture;
        out.push_back(std::move(o));
    }
    return out;
}

ConstraintEval evaluate_constraint(
    const TerrainAnalysisMap& terrain, const PlacementConstraint& c, Coord cell, const std::vector<Unit>& others)
{
    const GridMap& map = terrain.map;
    const auto& pct = terrain.layer(LayerKind::high_ground).scores;
    const auto& entry = terrain.friendly_entry.cells();
    auto depth = [&](Coord x) { return entry.empty() ? 0 : distance_to(map, x, entry); };

    switch (c.kind) {
    case ConstraintKind::on_high_ground: {
        const double p = pct[map.index(cell)];
        return {p >= c.percentile, p};
    }
    case ConstraintKind::reverse_slope: {
        const int own_depth = depth(cell);
        for (Coord n : map.neighbors(cell))
            if (pct[map.index(n)] >= c.percentile && map.at(n).elevation > map.at(cell).elevation
                && depth(n) < own_depth)
                return {true, 1.0};
        return {false, 0.0};
    }
    case ConstraintKind::on_main_axis: {
        const Avenue* axis = terrain.main_avenue();
        if (!axis)
            return {false, 0.0};
        const int d = distance_to(map, cell, axis->path.cells);
        return {d <= c.distance, falloff(d, c.distance)};
    }
    case ConstraintKind::within_range: {
        int d = std::numeric_limits<int>::max();
        for (const auto& u : others)
            if (u.role == c.other_role)
                d = std::min(d, map.distance(cell, u.position));
        if (d == std::numeric_limits<int>::max())
            return {false, 0.0};
        return {d <= c.distance, falloff(d, c.distance)};
    }
    case ConstraintKind::in_depth: {
        const int d = depth(cell);
        if (d >= c.min_depth && d <= c.max_depth)
            return {true, 1.0};
        const int gap = d < c.min_depth ? c.min_depth - d : d - c.max_depth;
        return {false, falloff(gap, c.max_depth - c.min_depth)};
    }
    }
    return {false, 0.0};
}

EnemySituationMap assess_enemy_capability(const TerrainAnalysisMap& terrain, const DoctrinalTemplate& templ,
    const std::vector<Observation>& observations, const EnemySituationMap* previous)
{
    const GridMap& map = terrain.map;
    std::vector<std::string> issues;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!(o.confidence >= 0.0 && o.confidence <= 1.0))
            issues.push_back(fmt::format("observations[{}]: confidence {} outside [0,1]", i, o.confidence));
        if (!(o.size_estimate >= 0.0))
            issues.push_back(fmt::format("observations[{}]: size_estimate must be >= 0", i));
        if (!terrain.frame.area_of_interest.contains(o.location))
            issues.push_back(
                fmt::format("observations[{}]: location {} outside the area of interest", i, to_string(o.location)));
    }
    if (!issues.empty())
        throw ValidationError(issues);

    EnemySituationMap esm;
    esm.version = previous ? previous->version + 1 : 1;
    esm.basis = basis_of(terrain, templ);
    esm.observations = observations;

    // Fuse: an observation joins the first cluster holding a same-role member
    // within one cell. Clusters never merge, so appending an observation cannot
    // reduce the observed count.
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        auto near = [&](std::size_t j) {
            return observations[j].role_guess == o.role_guess
                && map.distance(observations[j].location, o.location) <= 1;
        };
        auto it = std::find_if(clusters.begin(), clusters.end(),
            [&](const std::vector<std::size_t>& c) { return std::any_of(c.begin(), c.end(), near); });
        if (it == clusters.end())
            clusters.push_back({i});
        else
            it->push_back(i);
    }

    std::vector<int> remaining;
    for (const auto& e : templ.entries)
        remaining.push_back(std::max(0, e.count));
    std::vector<Unit> on_map;

    int anonymous = 0;
    for (const auto& cluster : clusters) {
        const Observation* best = nullptr;
        double miss = 1.0, size = 0.0;
        std::string id;
        std::optional<Posture> posture;
        for (std::size_t i : cluster) {
            const auto& o = observations[i];
            if (!best || o.confidence > best->confidence)
                best = &o;
            miss *= 1.0 - o.confidence;
            size = std::max(size, o.size_estimate);
            if (id.empty())
                id = o.unit_id;
            if (!posture)
                posture = o.posture;
        }
        EnemyEntry entry;
        entry.provenance = Provenance::observed;
        entry.confidence = 1.0 - miss;
        Unit& u = entry.unit;
        u.id = id.empty() ? fmt::format("OBS-{}", ++anonymous) : id;
        u.side = Side::enemy;
        u.role = best->role_guess;
        u.combat_power = size;
        u.position = best->location;
        u.posture = Posture::defend_hasty;
        for (std::size_t e = 0; e < templ.entries.size(); ++e)
            if (templ.entries[e].role == u.role && remaining[e] > 0) {
                --remaining[e];
                entry.template_entry = static_cast<int>(e);
                u.echelon = templ.entries[e].echelon;
                u.posture = templ.entries[e].posture;
                break;
            }
        if (posture)
            u.posture = *posture;
        on_map.push_back(u);
        esm.units.push_back(std::move(entry));
    }

    // Infer the unmatched template slots greedily.
    const auto& ao = terrain.frame.area_of_operations.cells();
    std::map<Role, int> inferred_count;
    for (std::size_t e = 0; e < templ.entries.size(); ++e) {
        const TemplateEntry& te = templ.entries[e];
        for (int slot = 0; slot < remaining[e]; ++slot) {
            std::optional<Coord> best_cell;
            double best_score = -1.0;
            for (Coord cell : ao) {
                if (!std::isfinite(entry_cost(map.at(cell), te.role, terrain.weather)))
                    continue;
                if (std::any_of(on_map.begin(), on_map.end(), [&](const Unit& u) { return u.position == cell; }))
                    continue;
                bool feasible = true;
                double soft = 0.0;
                int soft_n = 0;
                for (const auto& c : te.constraints) {
                    auto ev = evaluate_constraint(terrain, c, cell, on_map);
                    if (c.hard && !ev.satisfied) {
                        feasible = false;
                        break;
                    }
                    if (!c.hard) {
                        soft += ev.score;
                        ++soft_n;
                    }
                }
                if (!feasible)
                    continue;
                const double score = soft_n ? soft / soft_n : 1.0;
                if (score > best_score) {
                    best_score = score;
                    best_cell = cell;
                }
            }
            if (!best_cell) {
                esm.diagnostics.push_back(
                    fmt::format("template entry {} ({}): hard constraints unsatisfiable, {} unit(s) omitted", e,
                        to_string(te.role), remaining[e] - slot));
                break;
            }
            EnemyEntry entry;
            entry.provenance = Provenance::inferred;
            entry.confidence = 0.5 * best_score;
            entry.template_entry = static_cast<int>(e);
            Unit& u = entry.unit;
            u.id = fmt::format("INF-{}-{}", to_string(te.role), ++inferred_count[te.role]);
            u.side = Side::enemy;
            u.echelon = te.echelon;
            u.role = te.role;
            u.combat_power = te.combat_power;
            u.position = *best_cell;
            u.posture = te.posture;
            on_map.push_back(u);
            esm.units.push_back(std::move(entry));
        }
    }
    return esm;
}

std::string_view to_string(Sensor s) noexcept
{
    switch (s) {
    case Sensor::uav: return "uav";
    case Sensor::sigint: return "sigint";
    case Sensor::ground_recon: return "ground_recon";
    case Sensor::satellite: return "satellite";
    }
    return "?";
}

std::string_view to_string(Provenance p) noexcept
{
    return p == Provenance::observed ? "observed" : "inferred";
}

Sensor sensor_from_string(std::string_view s)
{
    for (auto v : {Sensor::uav, Sensor::sigint, Sensor::ground_recon, Sensor::satellite})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument(fmt::format("unknown sensor '{}'", s));
}

} // namespace coaforge
