#include "coaforge/scenario_io.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "coaforge/errors.hpp"

namespace coaforge {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::runtime_error([&] {
          std::string msg = "validation failed:";
          for (const auto& i : issues)
              msg += "\n  - " + i;
          return msg;
      }()),
      issues_(std::move(issues))
{
}

ParseError::ParseError(std::string message, int line)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line)
{
}

namespace {

/// Walks a JSON document collecting schema issues instead of failing fast.
class Reader {
public:
    std::vector<std::string> issues;

    const json* member(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        if (!obj.is_object()) {
            issues.push_back(path + ": expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required)
                issues.push_back(fmt::format("{}.{}: missing required field", path, key));
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (!v)
            return std::nullopt;
        if (!v->is_number()) {
            issues.push_back(fmt::format("{}.{}: expected a number", path, key));
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<int> integer(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (!v)
            return std::nullopt;
        if (!v->is_number_integer()) {
            issues.push_back(fmt::format("{}.{}: expected an integer", path, key));
            return std::nullopt;
        }
        return v->get<int>();
    }

    std::optional<std::string> string(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (!v)
            return std::nullopt;
        if (!v->is_string()) {
            issues.push_back(fmt::format("{}.{}: expected a string", path, key));
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<bool> boolean(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (!v)
            return std::nullopt;
        if (!v->is_boolean()) {
            issues.push_back(fmt::format("{}.{}: expected true or false", path, key));
            return std::nullopt;
        }
        return v->get<bool>();
    }

    const json* array(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (v && !v->is_array()) {
            issues.push_back(fmt::format("{}.{}: expected an array", path, key));
            return nullptr;
        }
        return v;
    }

    std::optional<Coord> coord(const json& v, const std::string& path)
    {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
            issues.push_back(path + ": expected [col, row] integer pair");
            return std::nullopt;
        }
        return Coord{v[0].get<int>(), v[1].get<int>()};
    }

    std::optional<Coord> coord_member(const json& obj, std::string_view key, const std::string& path, bool required)
    {
        const json* v = member(obj, key, path, required);
        if (!v)
            return std::nullopt;
        return coord(*v, fmt::format("{}.{}", path, key));
    }

    template <typename E, typename Fn>
    std::optional<E> enumeration(const json& obj, std::string_view key, const std::string& path, bool required, Fn parse)
    {
        auto s = string(obj, key, path, required);
        if (!s)
            return std::nullopt;
        try {
            return parse(*s);
        } catch (const std::invalid_argument& e) {
            issues.push_back(fmt::format("{}.{}: {}", path, key, e.what()));
            return std::nullopt;
        }
    }

    std::optional<Zone> zone(const json& v, const std::string& path)
    {
        if (!v.is_object()) {
            issues.push_back(path + ": expected {\"rect\": [...]} or {\"cells\": [...]}");
            return std::nullopt;
        }
        if (auto it = v.find("rect"); it != v.end()) {
            const json& r = *it;
            if (!r.is_array() || r.size() != 4) {
                issues.push_back(path + ".rect: expected [col0, row0, col1, row1]");
                return std::nullopt;
            }
            for (const auto& x : r)
                if (!x.is_number_integer()) {
                    issues.push_back(path + ".rect: expected integers");
                    return std::nullopt;
                }
            return Zone::rect({r[0].get<int>(), r[1].get<int>()}, {r[2].get<int>(), r[3].get<int>()});
        }
        if (auto it = v.find("cells"); it != v.end() && it->is_array()) {
            std::vector<Coord> cells;
            for (std::size_t i = 0; i < it->size(); ++i)
                if (auto c = coord((*it)[i], fmt::format("{}.cells[{}]", path, i)))
                    cells.push_back(*c);
            return Zone(std::move(cells));
        }
        issues.push_back(path + ": expected {\"rect\": [...]} or {\"cells\": [...]}");
        return std::nullopt;
    }
};

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

std::optional<GridMap> read_map(Reader& rd, const json& m)
{
    const std::string path = "map";
    auto topo = rd.enumeration<Topology>(m, "topology", path, true, topology_from_string);
    const json* terrain = rd.array(m, "terrain", path, true);
    const json* elevation = rd.array(m, "elevation", path, true);
    auto width = rd.integer(m, "width", path, false);
    auto height = rd.integer(m, "height", path, false);
    if (!topo || !terrain || !elevation)
        return std::nullopt;

    const int h = static_cast<int>(terrain->size());
    const int w = h > 0 && (*terrain)[0].is_string() ? static_cast<int>((*terrain)[0].get<std::string>().size()) : 0;
    if (h < 1 || w < 1) {
        rd.issues.push_back("map.terrain: raster must have at least one row and one column");
        return std::nullopt;
    }
    if (width && *width != w)
        rd.issues.push_back(fmt::format("map.width: {} disagrees with raster width {}", *width, w));
    if (height && *height != h)
        rd.issues.push_back(fmt::format("map.height: {} disagrees with raster height {}", *height, h));
    if (static_cast<int>(elevation->size()) != h)
        rd.issues.push_back(fmt::format("map.elevation: {} rows, terrain has {}", elevation->size(), h));

    std::vector<TerrainCell> cells;
    cells.reserve(static_cast<std::size_t>(w * h));
    bool ok = true;
    for (int r = 0; r < h; ++r) {
        const json& row = (*terrain)[static_cast<std::size_t>(r)];
        if (!row.is_string() || static_cast<int>(row.get<std::string>().size()) != w) {
            rd.issues.push_back(fmt::format("map.terrain[{}]: expected a string of {} characters", r, w));
            ok = false;
            continue;
        }
        std::vector<std::string> elev;
        if (r < static_cast<int>(elevation->size()) && (*elevation)[static_cast<std::size_t>(r)].is_string())
            elev = split_ws((*elevation)[static_cast<std::size_t>(r)].get<std::string>());
        if (static_cast<int>(elev.size()) != w) {
            rd.issues.push_back(fmt::format("map.elevation[{}]: expected {} integers", r, w));
            ok = false;
        }
        const std::string text = row.get<std::string>();
        for (int c = 0; c < w; ++c) {
            Surface s = Surface::open;
            try {
                s = surface_from_char(text[static_cast<std::size_t>(c)]);
            } catch (const std::invalid_argument& e) {
                rd.issues.push_back(fmt::format("map.terrain({},{}): {}", c, r, e.what()));
                ok = false;
            }
            double e = 0.0;
            if (c < static_cast<int>(elev.size())) {
                try {
                    std::size_t used = 0;
                    e = std::stoi(elev[static_cast<std::size_t>(c)], &used);
                    if (used != elev[static_cast<std::size_t>(c)].size())
                        throw std::invalid_argument("trailing characters");
                } catch (const std::exception&) {
                    rd.issues.push_back(fmt::format("map.elevation({},{}): '{}' is not an integer", c, r,
                        elev[static_cast<std::size_t>(c)]));
                    ok = false;
                }
            }
            cells.push_back(make_cell(s, e));
        }
    }
    if (!ok)
        return std::nullopt;
    return GridMap(*topo, w, h, std::move(cells));
}

std::optional<Unit> read_unit(Reader& rd, const json& u, const std::string& path)
{
    Unit unit;
    auto id = rd.string(u, "id", path, true);
    auto side = rd.enumeration<Side>(u, "side", path, true, side_from_string);
    auto echelon = rd.enumeration<Echelon>(u, "echelon", path, true, echelon_from_string);
    auto role = rd.enumeration<Role>(u, "role", path, true, role_from_string);
    auto cp = rd.number(u, "combat_power", path, true);
    auto pos = rd.coord_member(u, "position", path, true);
    auto posture = rd.enumeration<Posture>(u, "posture", path, false, posture_from_string);
    if (const json* z = rd.member(u, "zone", path, false))
        unit.zone = rd.zone(*z, path + ".zone");
    if (!id || !side || !echelon || !role || !cp || !pos)
        return std::nullopt;
    unit.id = *id;
    unit.side = *side;
    unit.echelon = *echelon;
    unit.role = *role;
    unit.combat_power = *cp;
    unit.position = *pos;
    unit.posture = posture.value_or(*side == Side::friendly ? Posture::attack : Posture::defend_prepared);
    return unit;
}

std::optional<PlacementConstraint> read_constraint(Reader& rd, const json& c, const std::string& path)
{
    PlacementConstraint pc;
    auto kind = rd.enumeration<ConstraintKind>(c, "kind", path, true, constraint_kind_from_string);
    if (!kind)
        return std::nullopt;
    pc.kind = *kind;
    pc.hard = rd.boolean(c, "hard", path, false).value_or(true);
    switch (pc.kind) {
    case ConstraintKind::on_high_ground:
    case ConstraintKind::reverse_slope: {
        auto p = rd.number(c, "percentile", path, true);
        if (!p)
            return std::nullopt;
        if (*p < 0.0 || *p > 1.0)
            rd.issues.push_back(path + ".percentile: must be in [0,1]");
        pc.percentile = *p;
        break;
    }
    case ConstraintKind::on_main_axis: {
        auto d = rd.integer(c, "distance", path, true);
        if (!d)
            return std::nullopt;
        pc.distance = *d;
        break;
    }
    case ConstraintKind::within_range: {
        auto d = rd.integer(c, "distance", path, true);
        auto r = rd.enumeration<Role>(c, "other_role", path, true, role_from_string);
        if (!d || !r)
            return std::nullopt;
        pc.distance = *d;
        pc.other_role = *r;
        break;
    }
    case ConstraintKind::in_depth: {
        auto a = rd.integer(c, "min_depth", path, true);
        auto b = rd.integer(c, "max_depth", path, true);
        if (!a || !b)
            return std::nullopt;
        if (*a > *b)
            rd.issues.push_back(path + ": min_depth exceeds max_depth");
        pc.min_depth = *a;
        pc.max_depth = *b;
        break;
    }
    }
    if (pc.distance < 0)
        rd.issues.push_back(path + ".distance: must be >= 0");
    return pc;
}

DoctrinalTemplate read_template(Reader& rd, const json& t)
{
    DoctrinalTemplate out;
    const json* entries = rd.array(t, "entries", "template", true);
    if (!entries)
        return out;
    for (std::size_t i = 0; i < entries->size(); ++i) {
        const json& e = (*entries)[i];
        const std::string path = fmt::format("template.entries[{}]", i);
        TemplateEntry te;
        auto role = rd.enumeration<Role>(e, "role", path, true, role_from_string);
        auto count = rd.integer(e, "count", path, true);
        if (!role || !count)
            continue;
        te.role = *role;
        te.count = *count;
        te.combat_power = rd.number(e, "combat_power", path, false).value_or(10.0);
        te.echelon = rd.enumeration<Echelon>(e, "echelon", path, false, echelon_from_string).value_or(Echelon::company);
        te.posture = rd.enumeration<Posture>(e, "posture", path, false, posture_from_string)
                         .value_or(Posture::defend_prepared);
        if (const json* cs = rd.array(e, "constraints", path, false))
            for (std::size_t k = 0; k < cs->size(); ++k)
                if (auto c = read_constraint(rd, (*cs)[k], fmt::format("{}.constraints[{}]", path, k)))
                    te.constraints.push_back(*c);
        out.entries.push_back(std::move(te));
    }
    return out;
}

ojson constraint_json(const PlacementConstraint& c)
{
    ojson j;
    j["kind"] = to_string(c.kind);
    j["hard"] = c.hard;
    switch (c.kind) {
    case ConstraintKind::on_high_ground:
    case ConstraintKind::reverse_slope: j["percentile"] = c.percentile; break;
    case ConstraintKind::on_main_axis: j["distance"] = c.distance; break;
    case ConstraintKind::within_range:
        j["other_role"] = to_string(c.other_role);
        j["distance"] = c.distance;
        break;
    case ConstraintKind::in_depth:
        j["min_depth"] = c.min_depth;
        j["max_depth"] = c.max_depth;
        break;
    }
    return j;
}

} // namespace

ojson to_json(Coord c)
{
    return ojson::array({c.col, c.row});
}

ojson to_json(const Zone& z)
{
    ojson cells = ojson::array();
    for (Coord c : z.cells())
        cells.push_back(to_json(c));
    return ojson{{"cells", std::move(cells)}};
}

ojson to_json(const Unit& u)
{
    ojson j;
    j["id"] = u.id;
    j["side"] = to_string(u.side);
    j["echelon"] = to_string(u.echelon);
    j["role"] = to_string(u.role);
    j["combat_power"] = u.combat_power;
    j["position"] = to_json(u.position);
    j["posture"] = to_string(u.posture);
    if (u.zone)
        j["zone"] = to_json(*u.zone);
    return j;
}

Coord coord_from_json(const json& j)
{
    Reader rd;
    auto c = rd.coord(j, "coordinate");
    if (!c)
        throw ValidationError(rd.issues);
    return *c;
}

Unit unit_from_json(const json& j)
{
    Reader rd;
    auto u = read_unit(rd, j, "unit");
    if (!u || !rd.issues.empty())
        throw ValidationError(rd.issues);
    return *u;
}

Scenario load_scenario(std::string_view source)
{
    json doc;
    try {
        doc = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        throw ValidationError({fmt::format("document: malformed structured text at byte {}: {}", e.byte, e.what())});
    }
    if (!doc.is_object())
        throw ValidationError({"document: top level must be an object"});

    Reader rd;
    Scenario s;
    const std::string root = "scenario";

    s.metadata.name = rd.string(doc, "name", root, false).value_or("");
    s.metadata.own_unit_name = rd.string(doc, "own_unit_name", root, false).value_or("");
    s.metadata.cell_size_km = rd.number(doc, "cell_size_km", root, false).value_or(1.0);
    s.metadata.tick_minutes = rd.number(doc, "tick_minutes", root, false).value_or(10.0);
    s.metadata.enemy_weapon_reach = rd.integer(doc, "enemy_weapon_reach", root, false).value_or(5);
    if (const json* routes = rd.array(doc, "routes", root, false))
        for (std::size_t i = 0; i < routes->size(); ++i) {
            const std::string path = fmt::format("routes[{}]", i);
            auto name = rd.string((*routes)[i], "name", path, true);
            auto anchor = rd.coord_member((*routes)[i], "anchor", path, true);
            if (name && anchor)
                s.metadata.routes.push_back({*name, *anchor});
        }

    bool map_ok = false;
    if (const json* m = rd.member(doc, "map", root, true))
        if (auto map = read_map(rd, *m)) {
            s.map = std::move(*map);
            map_ok = true;
        }

    if (const json* w = rd.member(doc, "weather", root, true)) {
        s.weather.precipitation = rd.number(*w, "precipitation", "weather", true).value_or(0.0);
        s.weather.visibility = rd.number(*w, "visibility", "weather", true).value_or(10000.0);
        s.weather.wind_speed = rd.number(*w, "wind_speed", "weather", true).value_or(0.0);
    }

    if (const json* units = rd.array(doc, "units", root, true))
        for (std::size_t i = 0; i < units->size(); ++i)
            if (auto u = read_unit(rd, (*units)[i], fmt::format("units[{}]", i)))
                (u->side == Side::friendly ? s.friendly_units : s.enemy_observed_units).push_back(std::move(*u));

    if (const json* objs = rd.array(doc, "objectives", root, true))
        for (std::size_t i = 0; i < objs->size(); ++i) {
            const std::string path = fmt::format("objectives[{}]", i);
            const json& o = (*objs)[i];
            auto id = rd.string(o, "id", path, true);
            auto loc = rd.coord_member(o, "location", path, true);
            auto kind = rd.enumeration<ObjectiveKind>(o, "kind", path, true, objective_kind_from_string);
            auto label = rd.string(o, "label", path, false);
            if (id && loc && kind)
                s.objectives.push_back({*id, *loc, *kind, label.value_or(*id)});
        }

    if (const json* ez = rd.member(doc, "entry_zones", root, true)) {
        auto read_side = [&](std::string_view key, std::vector<Zone>& out) {
            if (const json* zones = rd.array(*ez, key, "entry_zones", key == "friendly"))
                for (std::size_t i = 0; i < zones->size(); ++i)
                    if (auto z = rd.zone((*zones)[i], fmt::format("entry_zones.{}[{}]", key, i)))
                        out.push_back(std::move(*z));
        };
        read_side("friendly", s.friendly_entry_zones);
        read_side("enemy", s.enemy_entry_zones);
    }

    if (const json* t = rd.member(doc, "template", root, true))
        s.enemy_template = read_template(rd, *t);

    s.time_limit = rd.integer(doc, "time_limit", root, true).value_or(1);

    std::vector<CivilConsideration> civil;
    if (const json* cc = rd.array(doc, "civil_considerations", root, false))
        for (std::size_t i = 0; i < cc->size(); ++i) {
            const std::string path = fmt::format("civil_considerations[{}]", i);
            auto loc = rd.coord_member((*cc)[i], "location", path, true);
            auto kind = rd.enumeration<CivilKind>((*cc)[i], "kind", path, true, civil_kind_from_string);
            if (loc && kind)
                civil.push_back({*loc, *kind});
        }
    std::string mission = rd.string(doc, "mission", root, false).value_or("");

    if (!map_ok) {
        if (rd.issues.empty())
            rd.issues.push_back("map: could not be read");
        throw ValidationError(rd.issues);
    }
    s.mettc = derive_mettc(s, std::move(mission), std::move(civil));
    auto invariant_issues = validate(s);
    rd.issues.insert(rd.issues.end(), invariant_issues.begin(), invariant_issues.end());
    if (!rd.issues.empty())
        throw ValidationError(rd.issues);
    return s;
}

std::string terrain_raster(const GridMap& map)
{
    std::string out;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c)
            out += surface_char(map.at({c, r}).surface);
        out += '\n';
    }
    return out;
}

std::string elevation_raster(const GridMap& map)
{
    std::string out;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c)
            out += fmt::format("{}{}", c ? " " : "", static_cast<long>(std::lround(map.at({c, r}).elevation)));
        out += '\n';
    }
    return out;
}

std::string serialize_scenario(const Scenario& s)
{
    ojson doc;
    doc["name"] = s.metadata.name;
    doc["own_unit_name"] = s.metadata.own_unit_name;
    doc["cell_size_km"] = s.metadata.cell_size_km;
    doc["tick_minutes"] = s.metadata.tick_minutes;
    doc["enemy_weapon_reach"] = s.metadata.enemy_weapon_reach;
    doc["mission"] = s.mettc.mission;

    ojson map;
    map["topology"] = to_string(s.map.topology());
    map["width"] = s.map.width();
    map["height"] = s.map.height();
    ojson terrain = ojson::array();
    ojson elevation = ojson::array();
    std::istringstream t(terrain_raster(s.map));
    std::istringstream e(elevation_raster(s.map));
    for (std::string line; std::getline(t, line);)
        terrain.push_back(line);
    for (std::string line; std::getline(e, line);)
        elevation.push_back(line);
    map["terrain"] = std::move(terrain);
    map["elevation"] = std::move(elevation);
    doc["map"] = std::move(map);

    doc["weather"] = ojson{{"precipitation", s.weather.precipitation}, {"visibility", s.weather.visibility},
        {"wind_speed", s.weather.wind_speed}};

    ojson units = ojson::array();
    for (const auto& u : s.friendly_units)
        units.push_back(to_json(u));
    for (const auto& u : s.enemy_observed_units)
        units.push_back(to_json(u));
    doc["units"] = std::move(units);

    ojson objs = ojson::array();
    for (const auto& o : s.objectives)
        objs.push_back(ojson{{"id", o.id}, {"location", to_json(o.location)}, {"kind", to_string(o.kind)},
            {"label", o.label}});
    doc["objectives"] = std::move(objs);

    ojson ez;
    ez["friendly"] = ojson::array();
    ez["enemy"] = ojson::array();
    for (const auto& z : s.friendly_entry_zones)
        ez["friendly"].push_back(to_json(z));
    for (const auto& z : s.enemy_entry_zones)
        ez["enemy"].push_back(to_json(z));
    doc["entry_zones"] = std::move(ez);

    ojson entries = ojson::array();
    for (const auto& te : s.enemy_template.entries) {
        ojson j;
        j["role"] = to_string(te.role);
        j["count"] = te.count;
        j["combat_power"] = te.combat_power;
        j["echelon"] = to_string(te.echelon);
        j["posture"] = to_string(te.posture);
        ojson cs = ojson::array();
        for (const auto& c : te.constraints)
            cs.push_back(constraint_json(c));
        j["constraints"] = std::move(cs);
        entries.push_back(std::move(j));
    }
    doc["template"] = ojson{{"entries", std::move(entries)}};

    ojson routes = ojson::array();
    for (const auto& r : s.metadata.routes)
        routes.push_back(ojson{{"name", r.name}, {"anchor", to_json(r.anchor)}});
    doc["routes"] = std::move(routes);

    ojson civil = ojson::array();
    for (const auto& c : s.mettc.civil_considerations)
        civil.push_back(ojson{{"location", to_json(c.location)}, {"kind", to_string(c.kind)}});
    doc["civil_considerations"] = std::move(civil);
    doc["time_limit"] = s.time_limit;
    return doc.dump(2) + "\n";
}

} // namespace coaforge
