#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"

namespace coaforge {

namespace {

// Combined overlay weights, in kLayerKinds order.
constexpr double kOverlayWeights[] = {0.25, 0.15, 0.15, 0.25, 0.2};

std::vector<Role> maneuver_roles(const std::vector<Role>& present)
{
    std::set<Role> roles;
    for (Role r : present)
        if (is_maneuver(r))
            roles.insert(r);
    return {roles.begin(), roles.end()};
}

std::vector<Role> roles_of(const std::vector<Unit>& units)
{
    std::vector<Role> out;
    for (const auto& u : units)
        out.push_back(u.role);
    return out;
}

} // namespace

BattlespaceFrame evaluate_battlespace(const Scenario& scenario)
{
    if (scenario.objectives.empty())
        throw PlanningError("cannot frame battlespace without objectives");
    std::vector<Coord> anchor = scenario.friendly_entry().cells();
    for (const auto& o : scenario.objectives)
        anchor.push_back(o.location);
    Coord lo = anchor.front(), hi = anchor.front();
    for (Coord c : anchor) {
        lo = {std::min(lo.col, c.col), std::min(lo.row, c.row)};
        hi = {std::max(hi.col, c.col), std::max(hi.row, c.row)};
    }

    BattlespaceFrame frame;
    frame.area_of_operations = Zone::rect(lo, hi).dilated(scenario.map, 2);
    frame.area_of_interest =
        frame.area_of_operations.dilated(scenario.map, std::max(0, scenario.metadata.enemy_weapon_reach));

    std::map<Role, int> counts;
    double cp = 0.0;
    for (const auto& u : scenario.enemy_observed_units) {
        ++counts[u.role];
        cp += u.combat_power;
    }
    std::string roles;
    for (const auto& [role, n] : counts)
        roles += fmt::format("{}{} {}", roles.empty() ? "" : ", ", n, to_string(role));
    frame.general_enemy_assessment = counts.empty()
        ? std::string("no enemy units observed")
        : fmt::format("{} enemy units observed ({}), total combat power {:.1f}", scenario.enemy_observed_units.size(),
              roles, cp);
    return frame;
}

const TerrainLayer& TerrainAnalysisMap::layer(LayerKind kind) const
{
    for (const auto& l : layers)
        if (l.kind == kind)
            return l;
    throw ContractViolation(fmt::format("terrain analysis has no {} layer", to_string(kind)));
}

const Avenue* TerrainAnalysisMap::main_avenue() const
{
    const Avenue* best = nullptr;
    for (const auto& a : avenues())
        if (a.side == Side::friendly && (!best || a.path.cost < best->path.cost))
            best = &a;
    return best;
}

TerrainAnalysisMap analyze_battlespace(
    const Scenario& scenario, const BattlespaceFrame& frame, const BattlespaceOptions& options)
{
    const GridMap& map = scenario.map;
    const std::size_t n = map.size();

    TerrainAnalysisMap t;
    t.frame = frame;
    t.map = map;
    t.weather = scenario.weather;
    t.weather_adjusted = true;
    t.friendly_entry = scenario.friendly_entry();
    t.enemy_entry = scenario.enemy_entry();
    t.objectives = scenario.objectives;

    // High ground: elevation percentile against the AO distribution.
    std::vector<double> ao_elev;
    for (Coord c : frame.area_of_operations.cells())
        ao_elev.push_back(map.at(c).elevation);
    std::sort(ao_elev.begin(), ao_elev.end());
    std::vector<double> high(n, 1.0);
    if (ao_elev.size() > 1)
        for (std::size_t i = 0; i < n; ++i) {
            const double e = map.cells()[i].elevation;
            // (cells below + cells equal - 1) / (N - 1)
            auto upto = std::upper_bound(ao_elev.begin(), ao_elev.end(), e) - ao_elev.begin();
            double p = static_cast<double>(upto - 1) / static_cast<double>(ao_elev.size() - 1);
            high[i] = std::clamp(p, 0.0, 1.0);
        }

    std::vector<double> hydro(n, 0.0), obstacles(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Surface s = map.cells()[i].surface;
        hydro[i] = (s == Surface::river || s == Surface::road) ? 1.0 : 0.0;
        obstacles[i] = (s == Surface::impassable || s == Surface::marsh || s == Surface::river) ? 1.0 : 0.0;
    }

    // Avenues of approach.
    std::vector<Avenue> avenues;
    DiversePathOptions dpo;
    dpo.k = options.k;
    const auto friendly_roles = maneuver_roles(roles_of(scenario.friendly_units));
    for (const auto& obj : scenario.objectives) {
        bool any = false;
        for (Role role : friendly_roles) {
            MobilityGraph g(map, scenario.weather, role);
            for (auto& p : diverse_shortest_paths(g, t.friendly_entry, Zone({obj.location}), dpo)) {
                avenues.push_back({Side::friendly, role, obj.id, std::move(p)});
                any = true;
            }
        }
        if (!any)
            t.diagnostics.push_back(fmt::format("objective '{}' unreachable for all friendly roles", obj.id));
    }
    if (!t.enemy_entry.empty() && !t.friendly_entry.empty()) {
        std::vector<Role> present = roles_of(scenario.enemy_observed_units);
        for (const auto& e : scenario.enemy_template.entries)
            if (e.count > 0)
                present.push_back(e.role);
        auto roles = maneuver_roles(present);
        if (roles.empty())
            roles.push_back(Role::infantry);
        for (Role role : roles) {
            MobilityGraph g(map, scenario.weather, role);
            for (auto& p : diverse_shortest_paths(g, t.enemy_entry, t.friendly_entry, dpo))
                avenues.push_back({Side::enemy, role, "friendly_entry", std::move(p)});
        }
    }

    // Distinct cell sequences, so roles sharing a route count it once.
    std::set<std::vector<Coord>> all_paths, friendly_paths;
    for (const auto& a : avenues) {
        all_paths.insert(a.path.cells);
        if (a.side == Side::friendly)
            friendly_paths.insert(a.path.cells);
    }
    auto through_counts = [&](const std::set<std::vector<Coord>>& paths) {
        std::vector<double> counts(n, 0.0);
        for (const auto& p : paths) {
            std::set<Coord> unique(p.begin(), p.end());
            for (Coord c : unique)
                counts[map.index(c)] += 1.0;
        }
        return counts;
    };
    std::vector<double> avenue_scores = through_counts(all_paths);
    const double peak = *std::max_element(avenue_scores.begin(), avenue_scores.end());
    if (peak > 0)
        for (auto& v : avenue_scores)
            v /= peak;
    t.chokepoint = through_counts(friendly_paths);
    if (!friendly_paths.empty())
        for (auto& v : t.chokepoint)
            v /= static_cast<double>(friendly_paths.size());

    std::vector<double> key(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        int d = std::numeric_limits<int>::max();
        for (const auto& o : scenario.objectives)
            d = std::min(d, map.distance(map.coord(i), o.location));
        const double proximity = std::max(0.0, 1.0 - d / 5.0);
        key[i] = 0.4 * high[i] + 0.4 * t.chokepoint[i] + 0.2 * proximity;
    }

    t.layers = {
        {LayerKind::high_ground, std::move(high), {}},
        {LayerKind::hydrology_roads, std::move(hydro), {}},
        {LayerKind::obstacles, std::move(obstacles), {}},
        {LayerKind::key_terrain, std::move(key), {}},
        {LayerKind::avenues_of_approach, std::move(avenue_scores), std::move(avenues)},
    };
    t.combined_overlay.assign(n, 0.0);
    for (std::size_t l = 0; l < t.layers.size(); ++l)
        for (std::size_t i = 0; i < n; ++i)
            t.combined_overlay[i] += kOverlayWeights[l] * t.layers[l].scores[i];
    return t;
}

std::string layer_raster(const TerrainAnalysisMap& terrain, LayerKind kind)
{
    const auto& scores = terrain.layer(kind).scores;
    std::string out;
    for (int r = 0; r < terrain.map.height(); ++r) {
        for (int c = 0; c < terrain.map.width(); ++c)
            out += fmt::format("{}{:.3f}", c ? " " : "", scores[terrain.map.index({c, r})]);
        out += '\n';
    }
    return out;
}

std::string_view to_string(LayerKind k) noexcept
{
    switch (k) {
    case LayerKind::high_ground: return "high_ground";
    case LayerKind::hydrology_roads: return "hydrology_roads";
    case LayerKind::obstacles: return "obstacles";
    case LayerKind::key_terrain: return "key_terrain";
    case LayerKind::avenues_of_approach: return "avenues_of_approach";
    }
    return "?";
}

LayerKind layer_kind_from_string(std::string_view s)
{
    for (auto k : kLayerKinds)
        if (to_string(k) == s)
            return k;
    throw std::invalid_argument(fmt::format("unknown layer '{}'", s));
}

} // namespace coaforge
