#include "coaforge/opord.hpp"

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <regex>

#include <fmt/format.h>

#include "coaforge/errors.hpp"

namespace coaforge {

namespace {

enum class Section { situation = 1, mission, execution, sustainment, command_signal };

constexpr std::array<std::string_view, 5> kSectionNames{
    "Situation", "Mission", "Execution", "Sustainment", "Command & Signal"};

// Field slots addressed by (section, canonical subsection index).
enum class Field {
    enemy_forces,
    friendly_forces,
    attachments,
    commanders_intent,
    concept_of_operations,
    tasks,
    coordination,
    logistics,
    medical,
    transportation,
    command,
    signal,
};

struct Subsection {
    Section section;
    char letter;
    std::string_view name;
    Field field;
    std::vector<std::string_view> aliases;
};

const std::vector<Subsection>& subsections()
{
    static const std::vector<Subsection> table{
        {Section::situation, 'a', "Enemy Forces", Field::enemy_forces, {"enemy", "enemy situation"}},
        {Section::situation, 'b', "Friendly Forces", Field::friendly_forces, {"friendly", "friendly situation"}},
        {Section::situation, 'c', "Attachments & Detachments", Field::attachments, {"attachments"}},
        {Section::execution, 'a', "Commander's Intent", Field::commanders_intent, {"intent"}},
        {Section::execution, 'b', "Concept of Operations", Field::concept_of_operations, {"concept"}},
        {Section::execution, 'c', "Tasks to Subordinate Units", Field::tasks, {"tasks", "tasks to units"}},
        {Section::execution, 'd', "Coordination & Control", Field::coordination,
            {"coordinating instructions", "coordination"}},
        {Section::sustainment, 'a', "Logistics", Field::logistics, {"supply"}},
        {Section::sustainment, 'b', "Medical Support", Field::medical, {"medical"}},
        {Section::sustainment, 'c', "Transportation", Field::transportation, {"transport"}},
        {Section::command_signal, 'a', "Command", Field::command, {}},
        {Section::command_signal, 'b', "Signal", Field::signal, {}},
    };
    return table;
}

// Lowercase, "&" -> "and", curly apostrophes straightened, whitespace collapsed.
std::string fold(std::string_view s)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80
            && (static_cast<unsigned char>(s[i + 2]) == 0x99 || static_cast<unsigned char>(s[i + 2]) == 0x98)) {
            out += '\'';
            i += 2;
        } else if (c == '&') {
            out += "and";
        } else if (std::isspace(c)) {
            if (!out.empty() && out.back() != ' ')
                out += ' ';
        } else {
            out += static_cast<char>(std::tolower(c));
        }
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    return out;
}

std::optional<Section> section_named(std::string_view name)
{
    static const std::map<std::string, Section> names{
        {"situation", Section::situation},
        {"mission", Section::mission},
        {"execution", Section::execution},
        {"sustainment", Section::sustainment},
        {"service support", Section::sustainment},
        {"administration and logistics", Section::sustainment},
        {"command and signal", Section::command_signal},
        {"command and control", Section::command_signal},
    };
    auto it = names.find(fold(name));
    if (it == names.end())
        return std::nullopt;
    return it->second;
}

const Subsection* subsection_named(Section section, std::string_view name)
{
    const std::string key = fold(name);
    for (const auto& sub : subsections()) {
        if (sub.section != section)
            continue;
        if (fold(sub.name) == key)
            return &sub;
        for (auto alias : sub.aliases)
            if (alias == key)
                return &sub;
    }
    return nullptr;
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

void append(std::string& field, std::string_view text)
{
    if (text.empty())
        return;
    if (!field.empty())
        field += ' ';
    field += text;
}

std::string& slot(OpOrder& o, Field f)
{
    switch (f) {
    case Field::enemy_forces: return o.situation.enemy_forces;
    case Field::friendly_forces: return o.situation.friendly_forces;
    case Field::attachments: return o.situation.attachments;
    case Field::commanders_intent: return o.execution.commanders_intent;
    case Field::concept_of_operations: return o.execution.concept_of_operations;
    case Field::coordination: return o.execution.coordination;
    case Field::logistics: return o.sustainment.logistics;
    case Field::medical: return o.sustainment.medical;
    case Field::transportation: return o.sustainment.transportation;
    case Field::command: return o.command_signal.command;
    case Field::signal: return o.command_signal.signal;
    case Field::tasks: break;
    }
    throw ContractViolation("task list has no text slot");
}

const std::string& slot(const OpOrder& o, Field f) { return slot(const_cast<OpOrder&>(o), f); }

} // namespace

OpOrder parse_opord(std::string_view source)
{
    static const std::regex section_re(R"(^([1-9])\.\s+(.+?)\s*$)");
    static const std::regex subsection_re(R"(^([a-z])\.\s+([^:]+?)\s*:\s*(.*?)\s*$)");
    static const std::regex task_re(R"(^-\s+([^:]+?)\s*:\s*(.+?)\s*$)");

    OpOrder order;
    std::array<bool, 6> seen{};
    std::optional<Section> current;
    const Subsection* sub = nullptr;
    int line_no = 0;

    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t end = source.find('\n', pos);
        if (end == std::string_view::npos)
            end = source.size();
        std::string_view raw = source.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r')
            raw.remove_suffix(1);
        const std::string line = trim(raw);
        if (line.empty()) {
            if (end == source.size())
                break;
            continue;
        }

        std::smatch m;
        if (std::regex_match(line, m, section_re)) {
            const int number = m[1].str()[0] - '0';
            auto named = section_named(m[2].str());
            if (!named || number > 5 || static_cast<int>(*named) != number)
                throw ParseError(fmt::format("unknown section header '{}'", line), line_no);
            if (seen[static_cast<std::size_t>(number)])
                throw ParseError(fmt::format("duplicate section '{}'", kSectionNames[number - 1]), line_no);
            seen[static_cast<std::size_t>(number)] = true;
            current = named;
            sub = nullptr;
            continue;
        }
        if (!current)
            throw ParseError("content before section 1", line_no);

        if (*current == Section::mission) {
            append(order.mission, line);
            continue;
        }
        if (std::regex_match(line, m, subsection_re)) {
            sub = subsection_named(*current, m[2].str());
            if (!sub)
                throw ParseError(fmt::format("unknown subsection '{}' in {}", m[2].str(),
                                     kSectionNames[static_cast<int>(*current) - 1]),
                    line_no);
            if (sub->field != Field::tasks)
                append(slot(order, sub->field), m[3].str());
            else if (!m[3].str().empty())
                throw ParseError("malformed task line: expected '- <unit>: <task>'", line_no);
            continue;
        }
        if (!sub)
            throw ParseError(fmt::format("text outside any subsection of {}",
                                 kSectionNames[static_cast<int>(*current) - 1]),
                line_no);
        if (sub->field == Field::tasks) {
            if (!std::regex_match(line, m, task_re))
                throw ParseError("malformed task line: expected '- <unit>: <task>'", line_no);
            order.execution.tasks_to_subordinates.push_back({m[1].str(), m[2].str(), line_no});
            continue;
        }
        append(slot(order, sub->field), line);
    }

    for (int s = 1; s <= 5; ++s)
        if (!seen[static_cast<std::size_t>(s)])
            throw ParseError(fmt::format("{} absent", kSectionNames[s - 1]));
    if (order.mission.empty())
        throw ParseError("Mission text empty");
    return order;
}

std::string render_opord(const OpOrder& order)
{
    std::string out;
    for (int s = 1; s <= 5; ++s) {
        out += fmt::format("{}. {}\n", s, kSectionNames[s - 1]);
        if (s == static_cast<int>(Section::mission)) {
            out += order.mission + "\n";
            continue;
        }
        for (const auto& sub : subsections()) {
            if (static_cast<int>(sub.section) != s)
                continue;
            if (sub.field == Field::tasks) {
                out += fmt::format("{}. {}:\n", sub.letter, sub.name);
                for (const auto& t : order.execution.tasks_to_subordinates)
                    out += fmt::format("- {}: {}\n", t.unit, t.task);
                continue;
            }
            const std::string& text = slot(order, sub.field);
            out += fmt::format("{}. {}:{}{}\n", sub.letter, sub.name, text.empty() ? "" : " ", text);
        }
    }
    return out;
}

} // namespace coaforge
