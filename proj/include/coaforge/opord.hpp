#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace coaforge {

/// One line of 3.c, "- <unit>: <task>". `line` is provenance only and is
/// ignored by equality so that parse/render round trips compare content.
struct TaskLine {
    std::string unit;
    std::string task;
    int line = 0;

    friend bool operator==(const TaskLine& a, const TaskLine& b) { return a.unit == b.unit && a.task == b.task; }
};

struct OpOrder {
    struct Situation {
        std::string enemy_forces;
        std::string friendly_forces;
        std::string attachments;
        friend bool operator==(const Situation&, const Situation&) = default;
    };
    struct Execution {
        std::string commanders_intent;
        std::string concept_of_operations;
        std::vector<TaskLine> tasks_to_subordinates;
        std::string coordination;
        friend bool operator==(const Execution&, const Execution&) = default;
    };
    struct Sustainment {
        std::string logistics;
        std::string medical;
        std::string transportation;
        friend bool operator==(const Sustainment&, const Sustainment&) = default;
    };
    struct CommandSignal {
        std::string command;
        std::string signal;
        friend bool operator==(const CommandSignal&, const CommandSignal&) = default;
    };

    Situation situation;
    std::string mission;
    Execution execution;
    Sustainment sustainment;
    CommandSignal command_signal;

    friend bool operator==(const OpOrder&, const OpOrder&) = default;
};

/// Parses the numbered five-section order format. Throws ParseError naming
/// the missing section ("Sustainment absent") or the offending line.
OpOrder parse_opord(std::string_view source);

/// Canonical text: headers "1. Situation" .. "5. Command & Signal", every
/// subsection present, one line per paragraph.
std::string render_opord(const OpOrder& order);

} // namespace coaforge
