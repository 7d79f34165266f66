#include "coaforge/plan.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <fmt/format.h>

namespace coaforge {

std::vector<Coord> CourseOfAction::full_route(std::string_view unit_id) const
{
    std::vector<Coord> out;
    for (const auto& phase : phases)
        for (const auto& t : phase.tasks) {
            if (t.unit_id != unit_id || t.route.empty())
                continue;
            auto first = t.route.begin();
            if (!out.empty() && out.back() == *first)
                ++first;
            out.insert(out.end(), first, t.route.end());
        }
    return out;
}

std::vector<std::string> CourseOfAction::tasked_units() const
{
    std::vector<std::string> ids;
    for (const auto& phase : phases)
        for (const auto& t : phase.tasks)
            if (std::find(ids.begin(), ids.end(), t.unit_id) == ids.end())
                ids.push_back(t.unit_id);
    return ids;
}

std::string_view to_string(WarfightingFunction f) noexcept
{
    switch (f) {
    case WarfightingFunction::command_control: return "command_control";
    case WarfightingFunction::intelligence: return "intelligence";
    case WarfightingFunction::movement_maneuver: return "movement_maneuver";
    case WarfightingFunction::fires: return "fires";
    case WarfightingFunction::protection: return "protection";
    case WarfightingFunction::sustainment: return "sustainment";
    }
    return "?";
}

std::string_view to_string(TaskVerb v) noexcept
{
    switch (v) {
    case TaskVerb::seize: return "seize";
    case TaskVerb::secure: return "secure";
    case TaskVerb::destroy: return "destroy";
    case TaskVerb::defend: return "defend";
    case TaskVerb::move: return "move";
    case TaskVerb::support: return "support";
    }
    return "?";
}

std::string_view to_string(TaskSource s) noexcept
{
    return s == TaskSource::specified ? "specified" : "implied";
}

std::string_view to_string(TriggerKind t) noexcept
{
    return t == TriggerKind::time_tick ? "time_tick" : "objective_seized";
}

WarfightingFunction warfighting_function_from_string(std::string_view s)
{
    for (auto f : {WarfightingFunction::command_control, WarfightingFunction::intelligence,
             WarfightingFunction::movement_maneuver, WarfightingFunction::fires, WarfightingFunction::protection,
             WarfightingFunction::sustainment})
        if (to_string(f) == s)
            return f;
    throw std::invalid_argument(fmt::format("unknown warfighting function '{}'", s));
}

TaskVerb task_verb_from_string(std::string_view s)
{
    for (auto v : {TaskVerb::seize, TaskVerb::secure, TaskVerb::destroy, TaskVerb::defend, TaskVerb::move,
             TaskVerb::support})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument(fmt::format("unknown task verb '{}'", s));
}

} // namespace coaforge
