#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coaforge/ipb.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

inline constexpr double kAttritionRate = 0.05;
inline constexpr double kNoiseSigma = 0.2;
inline constexpr double kCombatIneffective = 0.1;
inline constexpr int kArtilleryRange = 5;

enum class EventKind { move, engage, seize, destroy, phase_advance };

/// detail per kind:
///   move:          col, row
///   engage:        attacker delta, defender delta (actors: attacker, defender)
///   seize:         col, row (actors: unit, objective id)
///   destroy:       remaining CP
///   phase_advance: phase, side (0 friendly, 1 enemy), friendly CP, enemy CP (actors: CoA id)
struct Event {
    int tick = 0;
    EventKind kind = EventKind::move;
    std::vector<std::string> actors;
    std::vector<double> detail;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SimState {
    int tick = 0;
    std::vector<Unit> units; // friendly first, then enemy
    std::set<std::string> seized_objectives;
    std::set<std::string> destroyed;
    std::vector<Event> event_log;

    friend bool operator==(const SimState&, const SimState&) = default;
};

struct SimOutcome {
    SimState state;
    bool success = false;
    double friendly_start_cp = 0.0;
    double enemy_start_cp = 0.0;

    const std::vector<Event>& trace() const { return state.event_log; }
};

struct EngagementResult {
    double attacker_delta = 0.0;
    double defender_delta = 0.0;
};

/// Square-law exchange for one tick. Both deltas are <= 0 and clamped so
/// neither side goes below zero.
EngagementResult resolve_engagement(double attacker_cp, double defender_cp, double terrain_mod, double posture_mod,
    double visibility_mod, std::pair<double, double> noise);

double terrain_modifier(const GridMap& map, Coord defender_cell);
double posture_modifier(Posture defender) noexcept;
double visibility_modifier(const WeatherState& weather) noexcept;

struct WargameOptions {
    bool noise = true;
    int threads = 0; // Monte Carlo workers; 0 = hardware concurrency
};

/// One replication. Throws ContractViolation before tick 0 when a CoA names
/// an unknown unit, a route is not a passable chain of neighbors, a first
/// route does not start at its unit, or a route leaves the unit's boundary.
SimOutcome simulate(const Scenario& scenario, const CourseOfAction& friendly, const EnemyCoA& enemy,
    std::uint64_t seed, const WargameOptions& options = {});

struct PhaseStats {
    int phase = 0;
    double friendly_cp_delta = 0.0; // mean, <= 0
    double enemy_cp_delta = 0.0;

    friend bool operator==(const PhaseStats&, const PhaseStats&) = default;
};

struct WargameStats {
    int replications = 0;
    double success_probability = 0.0;
    double friendly_loss_rate = 0.0;
    double enemy_attrition_rate = 0.0;
    double mean_duration = 0.0;
    double reliability = 0.0;
    std::vector<PhaseStats> per_phase;

    friend bool operator==(const WargameStats&, const WargameStats&) = default;
};

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Replication seed: splitmix64(seed ^ splitmix64(index)).
std::uint64_t hash64(std::uint64_t seed, std::uint64_t index) noexcept;

/// 1 - half-width of the 95% Wilson score interval.
double wilson_reliability(int successes, int n);

WargameStats monte_carlo_evaluate(const Scenario& scenario, const CourseOfAction& friendly, const EnemyCoA& enemy,
    int n, std::uint64_t seed, const WargameOptions& options = {});

/// One JSON object per line: {"tick","kind","actors","detail"}.
std::string trace_jsonl(const std::vector<Event>& trace);

std::string_view to_string(EventKind k) noexcept;

} // namespace coaforge
