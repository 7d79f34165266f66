#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coaforge/evaluate.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/mission.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/wargame.hpp"

namespace coaforge {

struct PlanningConfig {
    int k = 3;
    int replications = 200;
    std::uint64_t seed = 42;
    Weights weights = default_weights();
    int enemy_k = 3;

    nlohmann::ordered_json to_json() const;
    /// Reads the keys present in `j` over the current values. Throws
    /// ValidationError listing every bad key.
    void apply(const nlohmann::json& j);

    friend bool operator==(const PlanningConfig&, const PlanningConfig&) = default;
};

struct RankedCoa {
    int rank = 0;
    double total = 0.0;
    CourseOfAction coa;
    WargameStats stats;
    std::optional<WargameStats> robustness; // against the second most likely enemy CoA
    Explanation explanation;
};

struct PlanningReport {
    std::string session_id;
    int esm_version = 0;
    PlanningConfig config;
    std::string scenario_digest;
    std::string opord_digest;
    MissionAnalysis mission;
    std::vector<EnemyCoA> enemy_coas; // descending likelihood; [0] drives the ranking
    int observed_enemy = 0;
    int inferred_enemy = 0;
    DecisionMatrix matrix;
    std::vector<RankedCoa> coas; // ranking order
    std::string recommended;
    bool tie = false;
    std::vector<std::string> diagnostics;
};

nlohmann::ordered_json to_json(const Task& t);
nlohmann::ordered_json to_json(const CourseOfAction& coa);
nlohmann::ordered_json to_json(const WargameStats& s);
nlohmann::ordered_json to_json(const EnemySituationMap& esm);
nlohmann::ordered_json to_json(const Observation& o);
nlohmann::ordered_json to_json(const MissionAnalysis& m);
nlohmann::ordered_json to_json(const Explanation& e);
nlohmann::ordered_json to_json(const DecisionMatrix& m);
nlohmann::ordered_json to_json(const PlanningReport& r);

/// Throws ValidationError for missing or malformed fields.
Observation observation_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
std::string render_report_json(const PlanningReport& r);
std::string render_report_text(const PlanningReport& r);

/// The six mission-analysis rows as (label, value) in table order.
std::vector<std::pair<std::string, std::string>> mission_rows(const MissionAnalysis& m);

} // namespace coaforge
