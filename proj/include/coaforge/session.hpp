#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/mission.hpp"
#include "coaforge/opord.hpp"
#include "coaforge/report.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

/// A pipeline stage failed. `stage` is one of load, parse, analyze_mission,
/// evaluate_battlespace, analyze_battlespace, assess_enemy_capability,
/// generate_enemy_coas, generate_friendly_coas, monte_carlo_evaluate,
/// build_decision_matrix, select_coa.
class StageError : public PlanningError {
public:
    StageError(std::string stage, std::string message, std::vector<std::string> details = {});

    const std::string& stage() const noexcept { return stage_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    std::string stage_;
    std::vector<std::string> details_;
};

enum class SessionStatus { fresh, planned, stale };

std::string_view to_string(SessionStatus s) noexcept;

struct SessionEvent {
    int seq = 0;
    std::string kind; // created, observation, replan, select, error
    int esm_version = 0;
    nlohmann::json payload;

    nlohmann::ordered_json to_json() const;
    static SessionEvent from_json(const nlohmann::json& j);
};

/// One planning session. Every mutation appends to the history, and
/// replaying the history from scratch rebuilds the same state.
class PlanningSession {
public:
    using EventSink = std::function<void(const SessionEvent&)>;

    /// Runs the analysis stages through assess_enemy_capability (esm v1).
    /// Throws StageError; ValidationError and ParseError from the documents
    /// are rethrown as StageError with the issues as details.
    static PlanningSession create(std::string id, std::string scenario_doc, std::string opord_doc,
        PlanningConfig config = {}, EventSink sink = {});

    /// Rebuilds a session from its history log.
    static PlanningSession replay(const std::string& id, const std::vector<SessionEvent>& history, EventSink sink = {});

    /// Re-assesses the enemy with the observation appended; marks the
    /// session stale. Returns the new esm version.
    int inject_observation(const Observation& obs);

    /// Runs enemy CoAs onward against the current esm with `overrides`
    /// applied to the session config. Status becomes planned.
    const PlanningReport& replan(const nlohmann::json& overrides = nlohmann::json::object());

    /// Records the commander's choice; no further action.
    void select(const std::string& coa_id);

    const std::string& id() const noexcept { return id_; }
    SessionStatus status() const noexcept { return status_; }
    const Scenario& scenario() const noexcept { return scenario_; }
    const OpOrder& order() const noexcept { return order_; }
    const MissionAnalysis& mission() const noexcept { return mission_; }
    const BattlespaceFrame& frame() const noexcept { return frame_; }
    const TerrainAnalysisMap& terrain() const noexcept { return terrain_; }
    const EnemySituationMap& esm() const noexcept { return esm_; }
    const PlanningConfig& config() const noexcept { return config_; }
    const std::optional<PlanningReport>& report() const noexcept { return report_; }
    const std::optional<std::string>& selected() const noexcept { return selected_; }
    const std::vector<SessionEvent>& history() const noexcept { return history_; }
    const std::optional<nlohmann::ordered_json>& last_error() const noexcept { return last_error_; }

    /// Wargame runs served from the cache since creation.
    int cache_hits() const noexcept { return cache_hits_; }
    int cache_misses() const noexcept { return cache_misses_; }

    /// Summary for GET /sessions/{id}.
    nlohmann::ordered_json state_json() const;

private:
    PlanningSession() = default;

    void append(std::string kind, nlohmann::json payload);
    void do_inject(const Observation& obs);
    void do_replan(const nlohmann::json& overrides);
    void plan(const nlohmann::json& overrides);
    void do_select(const std::string& coa_id);
    std::vector<Observation> all_observations() const;

    struct CachedRun {
        WargameStats stats;
        std::vector<Event> trace;
    };
    using CacheKey = std::tuple<int, std::string, std::string, int, std::uint64_t>;
    const CachedRun& evaluate(const CourseOfAction& coa, const EnemyCoA& enemy);

    std::string id_;
    std::string scenario_doc_;
    std::string opord_doc_;
    PlanningConfig config_;
    Scenario scenario_;
    OpOrder order_;
    MissionAnalysis mission_;
    BattlespaceFrame frame_;
    TerrainAnalysisMap terrain_;
    EnemySituationMap esm_;
    std::vector<Observation> injected_;
    SessionStatus status_ = SessionStatus::fresh;
    std::optional<PlanningReport> report_;
    std::optional<std::string> selected_;
    std::optional<nlohmann::ordered_json> last_error_;
    std::vector<SessionEvent> history_;
    EventSink sink_;
    std::map<CacheKey, CachedRun> cache_;
    int cache_hits_ = 0;
    int cache_misses_ = 0;
};

/// Full pipeline in one call: create + replan on a transient session.
PlanningReport run_pipeline(const std::string& scenario_doc, const std::string& opord_doc,
    const PlanningConfig& config = {}, const std::string& session_id = "adhoc");

/// Content-derived session id for the CLI ("P-" + 12 hex digits).
std::string derived_session_id(const std::string& scenario_doc, const std::string& opord_doc);

/// Sessions kept in memory and, when a directory is given, persisted as
/// <dir>/<id>/events.jsonl (append-only). Requests on one session are
/// serialized; different sessions proceed concurrently.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::filesystem::path> dir = std::nullopt);

    /// Creates a session under `id` or the next "S-0001"-style id.
    std::string create(const std::string& scenario_doc, const std::string& opord_doc, const PlanningConfig& config = {},
        std::optional<std::string> id = std::nullopt);

    bool contains(const std::string& id) const;
    std::vector<std::string> ids() const;

    /// Runs `f(session)` under the session's lock. Throws NotFound.
    template <typename F>
    auto with_session(const std::string& id, F&& f)
    {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return f(*entry->session);
    }

    const std::optional<std::filesystem::path>& directory() const noexcept { return dir_; }

private:
    struct Entry {
        std::mutex mutex;
        std::unique_ptr<PlanningSession> session;
    };
    std::shared_ptr<Entry> find(const std::string& id) const;
    PlanningSession::EventSink sink_for(const std::string& id) const;

    std::optional<std::filesystem::path> dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    int next_ = 1;
};

/// Reads a session's events.jsonl.
std::vector<SessionEvent> read_event_log(const std::filesystem::path& file);

} // namespace coaforge
