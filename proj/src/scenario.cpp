#include "coaforge/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace coaforge {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, std::string_view what)
{
    for (E v : values)
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument(fmt::format("unknown {} '{}'", what, s));
}

} // namespace

Zone::Zone(std::vector<Coord> cells) : cells_(std::move(cells))
{
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

Zone Zone::rect(Coord a, Coord b)
{
    std::vector<Coord> out;
    for (int r = std::min(a.row, b.row); r <= std::max(a.row, b.row); ++r)
        for (int c = std::min(a.col, b.col); c <= std::max(a.col, b.col); ++c)
            out.push_back({c, r});
    return Zone(std::move(out));
}

bool Zone::contains(Coord c) const
{
    return std::binary_search(cells_.begin(), cells_.end(), c);
}

bool Zone::is_subset_of(const Zone& other) const
{
    return std::includes(other.cells_.begin(), other.cells_.end(), cells_.begin(), cells_.end());
}

bool Zone::intersects(const Zone& other) const
{
    auto a = cells_.begin();
    auto b = other.cells_.begin();
    while (a != cells_.end() && b != other.cells_.end()) {
        if (*a == *b)
            return true;
        if (*a < *b)
            ++a;
        else
            ++b;
    }
    return false;
}

bool Zone::contiguous(const GridMap& map) const
{
    if (cells_.empty())
        return false;
    std::set<Coord> seen{cells_.front()};
    std::deque<Coord> queue{cells_.front()};
    while (!queue.empty()) {
        Coord c = queue.front();
        queue.pop_front();
        for (Coord n : map.neighbors(c))
            if (contains(n) && seen.insert(n).second)
                queue.push_back(n);
    }
    return seen.size() == cells_.size();
}

Zone Zone::dilated(const GridMap& map, int steps) const
{
    std::vector<bool> mark(map.size(), false);
    std::vector<Coord> frontier;
    for (Coord c : cells_)
        if (map.in_bounds(c) && !mark[map.index(c)]) {
            mark[map.index(c)] = true;
            frontier.push_back(c);
        }
    for (int s = 0; s < steps; ++s) {
        std::vector<Coord> next;
        for (Coord c : frontier)
            for (Coord n : map.neighbors(c))
                if (!mark[map.index(n)]) {
                    mark[map.index(n)] = true;
                    next.push_back(n);
                }
        frontier = std::move(next);
    }
    std::vector<Coord> out;
    for (std::size_t i = 0; i < mark.size(); ++i)
        if (mark[i])
            out.push_back(map.coord(i));
    return Zone(std::move(out));
}

const Objective* Scenario::find_objective(std::string_view id) const
{
    for (const auto& o : objectives)
        if (o.id == id)
            return &o;
    return nullptr;
}

const Unit* Scenario::find_unit(std::string_view id) const
{
    for (const auto& u : friendly_units)
        if (u.id == id)
            return &u;
    for (const auto& u : enemy_observed_units)
        if (u.id == id)
            return &u;
    return nullptr;
}

namespace {

Zone union_of(const std::vector<Zone>& zones)
{
    std::vector<Coord> all;
    for (const auto& z : zones)
        all.insert(all.end(), z.cells().begin(), z.cells().end());
    return Zone(std::move(all));
}

std::string role_counts(const std::vector<Unit>& units)
{
    std::map<std::string, int> counts;
    for (const auto& u : units)
        ++counts[std::string(to_string(u.role))];
    std::string out;
    for (const auto& [role, n] : counts)
        out += fmt::format("{}{} {}", out.empty() ? "" : ", ", n, role);
    return out.empty() ? "none observed" : out;
}

} // namespace

Zone Scenario::friendly_entry() const
{
    return union_of(friendly_entry_zones);
}

Zone Scenario::enemy_entry() const
{
    return union_of(enemy_entry_zones);
}

METTC derive_mettc(const Scenario& scenario, std::string mission, std::vector<CivilConsideration> civil)
{
    METTC m;
    m.mission = std::move(mission);
    m.enemy = role_counts(scenario.enemy_observed_units);

    std::map<std::string, int> surfaces;
    for (const auto& c : scenario.map.cells())
        ++surfaces[std::string(to_string(c.surface))];
    std::string terrain;
    for (const auto& [s, n] : surfaces)
        terrain += fmt::format("{}{} {}", terrain.empty() ? "" : ", ", n, s);
    m.terrain_weather = fmt::format("{}x{} {}; {}; precipitation {} mm/h, visibility {} m, wind {} m/s",
        scenario.map.width(), scenario.map.height(), to_string(scenario.map.topology()), terrain,
        scenario.weather.precipitation, scenario.weather.visibility, scenario.weather.wind_speed);

    m.troops_available = static_cast<int>(scenario.friendly_units.size());
    for (const auto& u : scenario.friendly_units)
        m.troops_combat_power += u.combat_power;
    m.time_available = scenario.time_limit;
    m.civil_considerations = std::move(civil);
    return m;
}

std::vector<std::string> validate(const Scenario& s)
{
    std::vector<std::string> issues;
    const auto& map = s.map;
    if (map.width() < 1 || map.height() < 1)
        issues.push_back("map: width and height must be >= 1");
    if (map.size() != static_cast<std::size_t>(std::max(map.width(), 0)) * std::max(map.height(), 0))
        issues.push_back("map: cell count does not match width x height");
    for (std::size_t i = 0; i < map.size(); ++i) {
        const auto& cell = map.cells()[i];
        if (cell.elevation < -500.0)
            issues.push_back(fmt::format("map{}: elevation {} below -500", to_string(map.coord(i)), cell.elevation));
        if ((cell.surface == Surface::impassable) != std::isinf(cell.base_cost))
            issues.push_back(fmt::format("map{}: impassable surface and infinite cost disagree", to_string(map.coord(i))));
    }
    if (s.weather.precipitation < 0.0)
        issues.push_back("weather.precipitation: must be >= 0");
    if (!(s.weather.visibility > 0.0))
        issues.push_back("weather.visibility: must be > 0");
    if (s.weather.wind_speed < 0.0)
        issues.push_back("weather.wind_speed: must be >= 0");
    if (s.time_limit < 1)
        issues.push_back("time_limit: must be >= 1");

    std::set<std::string> ids;
    auto check_units = [&](const std::vector<Unit>& units, Side side, std::string_view list) {
        for (std::size_t i = 0; i < units.size(); ++i) {
            const auto& u = units[i];
            const std::string where = fmt::format("units[{}] '{}'", list, u.id);
            if (u.id.empty())
                issues.push_back(where + ": id must be non-empty");
            else if (!ids.insert(u.id).second)
                issues.push_back(where + ": duplicate unit id");
            if (u.side != side)
                issues.push_back(where + ": side inconsistent with list");
            if (!(u.combat_power >= 0.0))
                issues.push_back(where + ": combat_power must be >= 0");
            if (!map.in_bounds(u.position))
                issues.push_back(fmt::format("{}: position out of bounds {}", where, to_string(u.position)));
            if (u.zone) {
                if (u.zone->empty())
                    issues.push_back(where + ": zone must be non-empty");
                else if (!u.zone->contains(u.position))
                    issues.push_back(where + ": position outside assigned zone");
            }
        }
    };
    check_units(s.friendly_units, Side::friendly, "friendly");
    check_units(s.enemy_observed_units, Side::enemy, "enemy");

    std::set<std::string> obj_ids;
    for (const auto& o : s.objectives) {
        if (!obj_ids.insert(o.id).second)
            issues.push_back(fmt::format("objectives '{}': duplicate objective id", o.id));
        if (!map.in_bounds(o.location))
            issues.push_back(fmt::format("objectives '{}': location out of bounds {}", o.id, to_string(o.location)));
    }

    auto check_zones = [&](const std::vector<Zone>& zones, std::string_view side) {
        for (std::size_t i = 0; i < zones.size(); ++i) {
            const auto& z = zones[i];
            const std::string where = fmt::format("entry_zones.{}[{}]", side, i);
            if (z.empty()) {
                issues.push_back(where + ": zone must be non-empty");
                continue;
            }
            bool bounded = true;
            for (Coord c : z.cells())
                if (!map.in_bounds(c)) {
                    issues.push_back(fmt::format("{}: cell out of bounds {}", where, to_string(c)));
                    bounded = false;
                }
            if (bounded && map.size() > 0 && !z.contiguous(map))
                issues.push_back(where + ": zone is not contiguous");
        }
    };
    check_zones(s.friendly_entry_zones, "friendly");
    check_zones(s.enemy_entry_zones, "enemy");

    for (std::size_t i = 0; i < s.enemy_template.entries.size(); ++i) {
        const auto& e = s.enemy_template.entries[i];
        if (e.count < 0)
            issues.push_back(fmt::format("template.entries[{}]: count must be >= 0", i));
        if (e.combat_power < 0)
            issues.push_back(fmt::format("template.entries[{}]: combat_power must be >= 0", i));
    }
    for (const auto& c : s.mettc.civil_considerations)
        if (!map.in_bounds(c.location))
            issues.push_back(fmt::format("civil_considerations: location out of bounds {}", to_string(c.location)));
    for (const auto& r : s.metadata.routes)
        if (!map.in_bounds(r.anchor) || map.at(r.anchor).surface != Surface::road)
            issues.push_back(fmt::format("metadata.routes '{}': anchor {} is not a road cell", r.name, to_string(r.anchor)));
    return issues;
}

std::string_view to_string(Side s) noexcept
{
    return s == Side::friendly ? "friendly" : "enemy";
}

std::string_view to_string(Echelon e) noexcept
{
    switch (e) {
    case Echelon::platoon: return "platoon";
    case Echelon::company: return "company";
    case Echelon::battalion: return "battalion";
    case Echelon::brigade: return "brigade";
    case Echelon::division: return "division";
    }
    return "?";
}

std::string_view to_string(Posture p) noexcept
{
    switch (p) {
    case Posture::attack: return "attack";
    case Posture::defend_prepared: return "defend_prepared";
    case Posture::defend_hasty: return "defend_hasty";
    case Posture::moving: return "moving";
    case Posture::reserve: return "reserve";
    }
    return "?";
}

std::string_view to_string(ObjectiveKind k) noexcept
{
    switch (k) {
    case ObjectiveKind::seize: return "seize";
    case ObjectiveKind::secure: return "secure";
    case ObjectiveKind::destroy: return "destroy";
    }
    return "?";
}

std::string_view to_string(CivilKind k) noexcept
{
    switch (k) {
    case CivilKind::hospital: return "hospital";
    case CivilKind::heritage: return "heritage";
    case CivilKind::civilian_area: return "civilian_area";
    }
    return "?";
}

std::string_view to_string(ConstraintKind k) noexcept
{
    switch (k) {
    case ConstraintKind::on_high_ground: return "on_high_ground";
    case ConstraintKind::reverse_slope: return "reverse_slope";
    case ConstraintKind::on_main_axis: return "on_main_axis";
    case ConstraintKind::within_range: return "within_range";
    case ConstraintKind::in_depth: return "in_depth";
    }
    return "?";
}

Side side_from_string(std::string_view s)
{
    return parse_enum(s, std::array{Side::friendly, Side::enemy}, "side");
}

Echelon echelon_from_string(std::string_view s)
{
    return parse_enum(s,
        std::array{Echelon::platoon, Echelon::company, Echelon::battalion, Echelon::brigade, Echelon::division},
        "echelon");
}

Posture posture_from_string(std::string_view s)
{
    return parse_enum(s,
        std::array{Posture::attack, Posture::defend_prepared, Posture::defend_hasty, Posture::moving,
            Posture::reserve},
        "posture");
}

ObjectiveKind objective_kind_from_string(std::string_view s)
{
    return parse_enum(s, std::array{ObjectiveKind::seize, ObjectiveKind::secure, ObjectiveKind::destroy},
        "objective kind");
}

CivilKind civil_kind_from_string(std::string_view s)
{
    return parse_enum(s, std::array{CivilKind::hospital, CivilKind::heritage, CivilKind::civilian_area},
        "civil consideration kind");
}

ConstraintKind constraint_kind_from_string(std::string_view s)
{
    return parse_enum(s,
        std::array{ConstraintKind::on_high_ground, ConstraintKind::reverse_slope, ConstraintKind::on_main_axis,
            ConstraintKind::within_range, ConstraintKind::in_depth},
        "constraint kind");
}

bool is_maneuver(Role r) noexcept
{
    return r == Role::infantry || r == Role::armor || r == Role::engineer || r == Role::recon;
}

} // namespace coaforge
