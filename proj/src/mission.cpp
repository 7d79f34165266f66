#include "coaforge/mission.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "coaforge/errors.hpp"
#include "coaforge/pathfinding.hpp"

namespace coaforge {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::string strip_period(std::string s)
{
    s = trim(s);
    while (!s.empty() && (s.back() == '.' || s.back() == ';'))
        s.pop_back();
    return trim(s);
}

std::string capitalized(std::string s)
{
    if (!s.empty())
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string decapitalized(std::string s)
{
    if (!s.empty())
        s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

TaskVerb verb_from_stem(const std::string& stem)
{
    if (stem == "seiz")
        return TaskVerb::seize;
    if (stem == "secur")
        return TaskVerb::secure;
    if (stem == "destroy")
        return TaskVerb::destroy;
    if (stem == "defend")
        return TaskVerb::defend;
    if (stem == "mov")
        return TaskVerb::move;
    return TaskVerb::support;
}

WarfightingFunction function_of(TaskVerb v)
{
    switch (v) {
    case TaskVerb::defend: return WarfightingFunction::protection;
    case TaskVerb::support: return WarfightingFunction::sustainment;
    default: return WarfightingFunction::movement_maneuver;
    }
}

struct ObjectMatch {
    std::size_t pos;
    std::size_t len;
    const Objective* objective;
};

// Non-overlapping objective mentions (label or id), longest first at each position.
std::vector<ObjectMatch> find_objects(const std::string& text, const Scenario& scenario)
{
    const std::string hay = lower(text);
    std::vector<ObjectMatch> found;
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    for (const auto& o : scenario.objectives)
        for (const std::string& name : {o.label, o.id}) {
            if (name.empty())
                continue;
            const std::string needle = lower(name);
            for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) {
                const bool left = p == 0 || !is_word(hay[p - 1]);
                const bool right = p + needle.size() >= hay.size() || !is_word(hay[p + needle.size()]);
                if (left && right)
                    found.push_back({p, needle.size(), &o});
            }
        }
    std::sort(found.begin(), found.end(),
        [](const ObjectMatch& a, const ObjectMatch& b) { return a.pos != b.pos ? a.pos < b.pos : a.len > b.len; });
    std::vector<ObjectMatch> kept;
    for (const auto& m : found)
        if (kept.empty() || m.pos >= kept.back().pos + kept.back().len)
            kept.push_back(m);
    return kept;
}

std::vector<Role> planning_roles(const Scenario& s)
{
    std::set<Role> roles;
    for (const auto& u : s.friendly_units)
        if (is_maneuver(u.role) && u.role != Role::engineer)
            roles.insert(u.role);
    if (roles.empty())
        roles.insert(Role::infantry);
    return {roles.begin(), roles.end()};
}

// Least-cost path over the given roles with `blocked` cells removed.
std::optional<Path> best_path(
    const Scenario& s, const std::vector<Role>& roles, Coord target, const std::vector<Coord>& blocked)
{
    std::optional<Path> best;
    for (Role r : roles) {
        MobilityGraph g(s.map, s.weather, r);
        g.block(blocked);
        auto p = shortest_path(g, s.friendly_entry(), Zone({target}));
        if (p && (!best || p->cost < best->cost))
            best = std::move(p);
    }
    return best;
}

// Connected components of cells matching `pred`, joining cells up to `reach` steps apart.
std::vector<std::vector<Coord>> components(const GridMap& map, Surface surface, int reach)
{
    std::vector<int> label(map.size(), -1);
    std::vector<std::vector<Coord>> out;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (label[i] >= 0 || map.cells()[i].surface != surface)
            continue;
        std::vector<Coord> comp;
        std::deque<Coord> queue{map.coord(i)};
        label[i] = static_cast<int>(out.size());
        while (!queue.empty()) {
            Coord c = queue.front();
            queue.pop_front();
            comp.push_back(c);
            for (int dr = -reach; dr <= reach; ++dr)
                for (int dc = -reach; dc <= reach; ++dc) {
                    Coord n{c.col + dc, c.row + dr};
                    if (!map.in_bounds(n) || map.distance(c, n) > reach)
                        continue;
                    auto j = map.index(n);
                    if (label[j] < 0 && map.cells()[j].surface == surface) {
                        label[j] = static_cast<int>(out.size());
                        queue.push_back(n);
                    }
                }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

std::string river_description(const GridMap& map, const std::vector<Coord>& cells)
{
    int c0 = cells.front().col, c1 = c0, r0 = cells.front().row, r1 = r0;
    for (Coord c : cells) {
        c0 = std::min(c0, c.col);
        c1 = std::max(c1, c.col);
        r0 = std::min(r0, c.row);
        r1 = std::max(r1, c.row);
    }
    auto mean_elevation = [&](auto pred) {
        double sum = 0;
        int n = 0;
        for (Coord c : cells)
            if (pred(c)) {
                sum += map.at(c).elevation;
                ++n;
            }
        return sum / n;
    };
    if (c1 - c0 >= r1 - r0) {
        double east = mean_elevation([&](Coord c) { return c.col == c1; });
        double west = mean_elevation([&](Coord c) { return c.col == c0; });
        if (east > west)
            return "River flowing from east to west";
        if (west > east)
            return "River flowing from west to east";
        return "River running east-west";
    }
    double north = mean_elevation([&](Coord c) { return c.row == r0; });
    double south = mean_elevation([&](Coord c) { return c.row == r1; });
    if (north > south)
        return "River flowing from north to south";
    if (south > north)
        return "River flowing from south to north";
    return "River running north-south";
}

std::vector<Coord> road_component(const GridMap& map, Coord anchor)
{
    std::vector<Coord> comp;
    if (!map.in_bounds(anchor) || map.at(anchor).surface != Surface::road)
        return comp;
    std::set<Coord> seen{anchor};
    std::deque<Coord> queue{anchor};
    while (!queue.empty()) {
        Coord c = queue.front();
        queue.pop_front();
        comp.push_back(c);
        for (Coord n : map.neighbors(c))
            if (map.at(n).surface == Surface::road && seen.insert(n).second)
                queue.push_back(n);
    }
    std::sort(comp.begin(), comp.end());
    return comp;
}

} // namespace

std::vector<std::string> MissionAnalysis::specified_objectives() const
{
    std::vector<std::string> ids;
    for (const auto& t : specified_tasks)
        if (std::find(ids.begin(), ids.end(), t.object) == ids.end())
            ids.push_back(t.object);
    return ids;
}

MissionAnalysis analyze_mission(const OpOrder& order, const Scenario& scenario, const TerrainAnalysisMap* terrain)
{
    static const std::regex verb_re(R"(\b(seiz|secur|destroy|defend|mov|support)\w*)", std::regex::icase);
    static const std::regex end_state_re(R"(end[- ]state\s*:\s*([^.]*))", std::regex::icase);
    static const std::regex restriction_re(
        R"(\b(not|no|prohibited|restricted|avoid|only|must|nlt)\b)", std::regex::icase);

    MissionAnalysis ma;
    const std::string own = lower(trim(scenario.metadata.own_unit_name));

    // Specified tasks.
    for (const auto& line : order.execution.tasks_to_subordinates) {
        if (own.empty() || lower(trim(line.unit)) != own)
            continue;
        struct VerbAt {
            std::size_t pos;
            TaskVerb verb;
        };
        std::vector<VerbAt> verbs;
        for (auto it = std::sregex_iterator(line.task.begin(), line.task.end(), verb_re); it != std::sregex_iterator();
             ++it)
            verbs.push_back({static_cast<std::size_t>(it->position(0)), verb_from_stem(lower((*it)[1].str()))});
        if (verbs.empty())
            throw PlanningError(fmt::format("task line {}: no task verb in '{}'", line.line, line.task));
        auto objects = find_objects(line.task, scenario);
        if (objects.empty())
            throw PlanningError(
                fmt::format("task line {}: '{}' names no objective in the scenario", line.line, line.task));
        for (const auto& m : objects) {
            TaskVerb verb = verbs.front().verb;
            for (const auto& v : verbs)
                if (v.pos < m.pos)
                    verb = v.verb;
            Task t;
            t.verb = verb;
            t.object = m.objective->id;
            t.function = function_of(verb);
            t.source = TaskSource::specified;
            t.text = capitalized(std::string(to_string(verb))) + " " + line.task.substr(m.pos, m.len);
            t.reference = fmt::format("3.c line {}", line.line);
            ma.specified_tasks.push_back(std::move(t));
        }
    }
    if (ma.specified_tasks.empty())
        throw PlanningError(
            fmt::format("no specified task addressed to unit '{}'", scenario.metadata.own_unit_name));

    // Purpose and end state.
    const std::string mission_lower = lower(order.mission);
    if (auto p = mission_lower.find("in order to"); p != std::string::npos)
        ma.operation_purpose = capitalized(strip_period(order.mission.substr(p + 11)));
    std::smatch m;
    const std::string& intent = order.execution.commanders_intent;
    if (std::regex_search(intent, m, end_state_re))
        ma.end_state = strip_period(m[1].str());
    else
        ma.end_state = strip_period(intent.substr(0, intent.find('.')));

    // Mission statement: "<Verb> <objective ids> and <purpose>".
    std::string statement;
    std::optional<TaskVerb> previous;
    std::set<std::string> mentioned;
    for (const auto& t : ma.specified_tasks) {
        if (!mentioned.insert(t.object).second)
            continue;
        if (!statement.empty())
            statement += " and ";
        if (!previous || *previous != t.verb)
            statement += std::string(to_string(t.verb)) + " ";
        statement += t.object;
        previous = t.verb;
    }
    if (!ma.operation_purpose.empty())
        statement += " and " + decapitalized(ma.operation_purpose);
    ma.mission_statement = capitalized(statement);

    // Implied tasks.
    const auto roles = planning_roles(scenario);
    std::vector<Coord> road_cells;
    for (std::size_t i = 0; i < scenario.map.size(); ++i)
        if (scenario.map.cells()[i].surface == Surface::road)
            road_cells.push_back(scenario.map.coord(i));
    auto add_implied = [&](Task t) {
        for (const auto& existing : ma.implied_tasks)
            if (existing.text == t.text)
                return;
        t.source = TaskSource::implied;
        ma.implied_tasks.push_back(std::move(t));
    };

    std::vector<std::vector<Coord>> axes;
    for (const auto& obj_id : ma.specified_objectives()) {
        const Objective& obj = *scenario.find_objective(obj_id);
        const std::string label = obj.label.empty() ? obj.id : obj.label;
        auto with_roads = best_path(scenario, roles, obj.location, {});
        if (with_roads) {
            axes.push_back(with_roads->cells);
            // An objective on a road already covers securing that road.
            std::vector<Coord> blocked = road_cells;
            if (scenario.map.at(obj.location).surface == Surface::road) {
                const auto own = road_component(scenario.map, obj.location);
                std::erase_if(blocked, [&](Coord c) { return std::binary_search(own.begin(), own.end(), c); });
            }
            if (best_path(scenario, roles, obj.location, blocked))
                continue;
            // Roads are required; name the route components the axis depends on.
            std::vector<std::pair<std::string, std::vector<Coord>>> crossed;
            std::set<Coord> named;
            for (const auto& r : scenario.metadata.routes) {
                auto comp = road_component(scenario.map, r.anchor);
                named.insert(comp.begin(), comp.end());
                bool on_axis = std::any_of(with_roads->cells.begin(), with_roads->cells.end(),
                    [&](Coord c) { return std::binary_search(comp.begin(), comp.end(), c); });
                if (on_axis)
                    crossed.emplace_back(r.name, std::move(comp));
            }
            for (Coord c : with_roads->cells)
                if (scenario.map.at(c).surface == Surface::road && !named.count(c)) {
                    auto comp = road_component(scenario.map, c);
                    named.insert(comp.begin(), comp.end());
                    crossed.emplace_back(fmt::format("road at {}", to_string(comp.front())), std::move(comp));
                }
            std::vector<std::string> necessary;
            for (const auto& [name, comp] : crossed)
                if (!best_path(scenario, roles, obj.location, comp))
                    necessary.push_back(name);
            if (necessary.empty())
                for (const auto& [name, comp] : crossed)
                    necessary.push_back(name);
            for (const auto& name : necessary)
                add_implied({TaskVerb::secure, name, WarfightingFunction::movement_maneuver, TaskSource::implied,
                    fmt::format("Secure {} to enable seizure of {}", name, label), "rule: reachability"});
            continue;
        }
        if (best_path(scenario, {Role::engineer}, obj.location, {}))
            add_implied({TaskVerb::move, obj.id, WarfightingFunction::movement_maneuver, TaskSource::implied,
                fmt::format("Cross the river to enable seizure of {}", label), "rule: river-crossing"});
    }

    for (const auto& enemy : scenario.enemy_observed_units) {
        bool on_objective = std::any_of(scenario.objectives.begin(), scenario.objectives.end(),
            [&](const Objective& o) { return o.location == enemy.position; });
        if (on_objective)
            continue;
        bool near_axis = false;
        for (const auto& axis : axes)
            for (Coord c : axis)
                near_axis = near_axis || scenario.map.distance(c, enemy.position) <= 3;
        if (near_axis)
            add_implied({TaskVerb::support, enemy.id, WarfightingFunction::protection, TaskSource::implied,
                fmt::format("Screen against enemy {} at {}", enemy.id, to_string(enemy.position)),
                "rule: flank-security"});
    }

    // Constraints.
    const Zone ao = terrain ? terrain->frame.area_of_operations : evaluate_battlespace(scenario).area_of_operations;
    auto in_ao = [&](const std::vector<Coord>& cells) {
        return std::any_of(cells.begin(), cells.end(), [&](Coord c) { return ao.contains(c); });
    };
    for (const auto& river : components(scenario.map, Surface::river, 2))
        if (in_ao(river))
            ma.constraints.push_back(river_description(scenario.map, river));
    for (const auto& wall : components(scenario.map, Surface::impassable, 1))
        if (wall.size() >= 3 && in_ao(wall)) {
            auto [lo, hi] = std::minmax_element(wall.begin(), wall.end(), [](Coord a, Coord b) {
                return std::pair{a.col, a.row} < std::pair{b.col, b.row};
            });
            ma.constraints.push_back(fmt::format("Obstacle line from {} to {}", to_string(*lo), to_string(*hi)));
        }
    const std::string& coord_text = order.execution.coordination;
    std::size_t start = 0;
    while (start < coord_text.size()) {
        std::size_t end = coord_text.find_first_of(".;!", start);
        if (end == std::string::npos)
            end = coord_text.size();
        std::string sentence = trim(coord_text.substr(start, end - start));
        if (!sentence.empty() && std::regex_search(sentence, restriction_re))
            ma.constraints.push_back(sentence);
        start = end + 1;
    }
    return ma;
}

} // namespace coaforge
