#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coaforge/grid.hpp"
#include "coaforge/pathfinding.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

// Step 1 ---------------------------------------------------------------------

struct BattlespaceFrame {
    Zone area_of_operations;
    Zone area_of_interest;
    std::string general_enemy_assessment;

    friend bool operator==(const BattlespaceFrame&, const BattlespaceFrame&) = default;
};

/// AO = bounding box of friendly entry zones and objectives dilated by 2;
/// AI = AO dilated by the enemy weapon reach. Both clipped to the map.
BattlespaceFrame evaluate_battlespace(const Scenario& scenario);

// Step 2 ---------------------------------------------------------------------

enum class LayerKind { high_ground, hydrology_roads, obstacles, key_terrain, avenues_of_approach };

inline constexpr LayerKind kLayerKinds[] = {LayerKind::high_ground, LayerKind::hydrology_roads, LayerKind::obstacles,
    LayerKind::key_terrain, LayerKind::avenues_of_approach};

struct Avenue {
    Side side = Side::friendly;
    Role role = Role::infantry;
    std::string objective; // objective id; "friendly_entry" for enemy avenues
    Path path;

    friend bool operator==(const Avenue&, const Avenue&) = default;
};

struct TerrainLayer {
    LayerKind kind = LayerKind::high_ground;
    std::vector<double> scores; // row-major, one per cell, in [0,1]
    std::vector<Avenue> routes; // avenues layer only

    friend bool operator==(const TerrainLayer&, const TerrainLayer&) = default;
};

struct TerrainAnalysisMap {
    BattlespaceFrame frame;
    GridMap map;
    WeatherState weather;
    bool weather_adjusted = true;
    Zone friendly_entry;
    Zone enemy_entry;
    std::vector<Objective> objectives;
    std::vector<TerrainLayer> layers; // one per LayerKind, in kLayerKinds order
    std::vector<double> combined_overlay;
    std::vector<double> chokepoint;
    std::vector<std::string> diagnostics;

    const TerrainLayer& layer(LayerKind kind) const;
    const std::vector<Avenue>& avenues() const { return layer(LayerKind::avenues_of_approach).routes; }

    /// Least-cost friendly avenue (ties: first listed), or nullptr.
    const Avenue* main_avenue() const;

    friend bool operator==(const TerrainAnalysisMap&, const TerrainAnalysisMap&) = default;
};

struct BattlespaceOptions {
    int k = 3;
};

/// Builds the five layers. Friendly avenues run from the friendly entry zone
/// to every objective for each friendly maneuver role present; enemy avenues
/// from the enemy entry zone to the friendly entry zone.
TerrainAnalysisMap analyze_battlespace(
    const Scenario& scenario, const BattlespaceFrame& frame, const BattlespaceOptions& options = {});

/// Layer scores as a raster with the same framing as the elevation raster,
/// values printed with 3 decimals.
std::string layer_raster(const TerrainAnalysisMap& terrain, LayerKind kind);

std::string_view to_string(LayerKind k) noexcept;
LayerKind layer_kind_from_string(std::string_view s);

// Step 3 ---------------------------------------------------------------------

enum class Sensor { uav, sigint, ground_recon, satellite };
enum class Provenance { observed, inferred };

struct Observation {
    int time = 0;
    Coord location;
    Role role_guess = Role::infantry;
    double size_estimate = 0.0;
    double confidence = 1.0;
    Sensor sensor = Sensor::ground_recon;
    std::string unit_id;           // optional; fused units keep the first id seen
    std::optional<Posture> posture; // optional; defaults to the matched template entry

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct EnemyEntry {
    Unit unit;
    Provenance provenance = Provenance::observed;
    double confidence = 1.0;
    int template_entry = -1; // template slot consumed, -1 when unmatched

    friend bool operator==(const EnemyEntry&, const EnemyEntry&) = default;
};

struct EnemySituationMap {
    std::vector<EnemyEntry> units;
    int version = 0;
    std::string basis;
    std::vector<Observation> observations; // inputs, as given
    std::vector<std::string> diagnostics;

    int count(Provenance p) const;

    friend bool operator==(const EnemySituationMap&, const EnemySituationMap&) = default;
};

/// Observations carried by a scenario's enemy unit list (confidence 1).
std::vector<Observation> observations_from(const Scenario& scenario);

/// Score in [0,1] of one constraint for a unit at `cell`, and whether it is
/// satisfied. `others` are units already on the map (observed or placed).
struct ConstraintEval {
    bool satisfied = false;
    double score = 0.0;
};
ConstraintEval evaluate_constraint(const TerrainAnalysisMap& terrain, const PlacementConstraint& constraint, Coord cell,
    const std::vector<Unit>& others);

/// Fuses observations, matches them to template slots and infers the rest.
/// Throws ValidationError for observations outside the AI or with bad
/// confidence.
EnemySituationMap assess_enemy_capability(const TerrainAnalysisMap& terrain, const DoctrinalTemplate& templ,
    const std::vector<Observation>& observations, const EnemySituationMap* previous = nullptr);

// Step 4 ---------------------------------------------------------------------

enum class EnemyArchetype { defend_forward, defend_in_depth, counterattack_main_avenue, withdraw_delay };

struct EnemyCoA {
    CourseOfAction plan;
    EnemyArchetype archetype = EnemyArchetype::defend_forward;
    double score = 0.0;
    double terrain_fit = 0.0;
    double posture_fit = 0.0;
    double likelihood = 0.0;
    double threat = 0.0;
    std::vector<Unit> forces;

    friend bool operator==(const EnemyCoA&, const EnemyCoA&) = default;
};

struct EnemyCoASet {
    std::vector<EnemyCoA> coas; // descending likelihood
    std::vector<std::string> diagnostics;
};

struct ArchetypeFit {
    double terrain = 0.0;
    double posture = 0.0;
};

/// Scoring table inputs, exposed for tests.
ArchetypeFit archetype_fit(EnemyArchetype a, const EnemySituationMap& esm, const TerrainAnalysisMap& terrain);

/// Min-max normalization, then softmax at temperature 1.
std::vector<double> archetype_likelihoods(const std::vector<double>& scores);

struct EnemyCoAOptions {
    int replications = 50;
    std::uint64_t seed = 1;
};

EnemyCoASet generate_enemy_coas(const EnemySituationMap& esm, const TerrainAnalysisMap& terrain,
    const Scenario& scenario, int k, const EnemyCoAOptions& options = {});

/// All units hold their current positions; the screening opponent.
EnemyCoA static_defense(const EnemySituationMap& esm);

std::string_view to_string(EnemyArchetype a) noexcept;
std::string_view to_string(Sensor s) noexcept;
std::string_view to_string(Provenance p) noexcept;
Sensor sensor_from_string(std::string_view s);

} // namespace coaforge
