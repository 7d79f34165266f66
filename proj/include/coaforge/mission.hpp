#pragma once

#include <string>
#include <vector>

#include "coaforge/ipb.hpp"
#include "coaforge/opord.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

struct MissionAnalysis {
    std::vector<Task> specified_tasks;
    std::string operation_purpose;
    std::vector<Task> implied_tasks;
    std::vector<std::string> constraints;
    std::string end_state;
    std::string mission_statement;

    /// Objective ids addressed by specified tasks, in task order, unique.
    std::vector<std::string> specified_objectives() const;

    friend bool operator==(const MissionAnalysis&, const MissionAnalysis&) = default;
};

/// Rule-based extraction. Specified tasks come from the 3.c lines addressed to
/// the scenario's own unit; implied tasks from the reachability,
/// river-crossing and flank-security rules. Uses `terrain` for the AO when
/// given, otherwise frames the battlespace itself.
MissionAnalysis analyze_mission(
    const OpOrder& order, const Scenario& scenario, const TerrainAnalysisMap* terrain = nullptr);

} // namespace coaforge
