#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coaforge/grid.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

enum class WarfightingFunction { command_control, intelligence, movement_maneuver, fires, protection, sustainment };

enum class TaskVerb { seize, secure, destroy, defend, move, support };

enum class TaskSource { specified, implied };

struct Task {
    TaskVerb verb = TaskVerb::seize;
    std::string object; // objective id, route name or unit id
    WarfightingFunction function = WarfightingFunction::movement_maneuver;
    TaskSource source = TaskSource::specified;
    std::string text;
    std::string reference; // order line ("3.c line 11") or the implied-task rule

    friend bool operator==(const Task&, const Task&) = default;
};

struct UnitTask {
    std::string unit_id;
    Task task;
    std::vector<Coord> route; // starts at the unit's position when set
    std::string target;
    std::optional<Posture> posture;

    friend bool operator==(const UnitTask&, const UnitTask&) = default;
};

struct Phase {
    int index = 0;
    std::vector<UnitTask> tasks;

    friend bool operator==(const Phase&, const Phase&) = default;
};

enum class TriggerKind { time_tick, objective_seized };

/// Phase `phase` begins when the trigger fires (and the previous phase is active).
struct Synchronization {
    int phase = 1;
    TriggerKind trigger = TriggerKind::time_tick;
    int tick = 0;
    std::string objective;

    friend bool operator==(const Synchronization&, const Synchronization&) = default;
};

struct CourseOfAction {
    std::string id;
    Side side = Side::friendly;
    std::vector<Phase> phases;
    std::map<std::string, Zone> boundaries;
    std::vector<Synchronization> synchronization;
    std::string summary;
    std::string main_effort;
    std::vector<std::string> required_objectives;

    friend bool operator==(const CourseOfAction&, const CourseOfAction&) = default;

    /// Route cells of every task of `unit_id` across phases, in phase order
    /// with shared junction cells listed once.
    std::vector<Coord> full_route(std::string_view unit_id) const;
    std::vector<std::string> tasked_units() const;
};

std::string_view to_string(WarfightingFunction f) noexcept;
std::string_view to_string(TaskVerb v) noexcept;
std::string_view to_string(TaskSource s) noexcept;
std::string_view to_string(TriggerKind t) noexcept;
WarfightingFunction warfighting_function_from_string(std::string_view s);
TaskVerb task_verb_from_string(std::string_view s);

} // namespace coaforge
