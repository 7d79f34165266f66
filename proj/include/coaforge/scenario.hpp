#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coaforge/grid.hpp"

namespace coaforge {

enum class Side { friendly, enemy };
enum class Echelon { platoon, company, battalion, brigade, division };
enum class Posture { attack, defend_prepared, defend_hasty, moving, reserve };

/// A set of grid cells, kept sorted in row-major order without duplicates.
class Zone {
public:
    Zone() = default;
    explicit Zone(std::vector<Coord> cells);

    static Zone rect(Coord a, Coord b);

    const std::vector<Coord>& cells() const noexcept { return cells_; }
    bool empty() const noexcept { return cells_.empty(); }
    std::size_t size() const noexcept { return cells_.size(); }
    bool contains(Coord c) const;
    bool is_subset_of(const Zone& other) const;
    bool intersects(const Zone& other) const;

    /// Contiguous under the map's neighbor relation.
    bool contiguous(const GridMap& map) const;

    /// Cells within `steps` grid steps of this zone, clipped to the map.
    Zone dilated(const GridMap& map, int steps) const;

    friend bool operator==(const Zone&, const Zone&) = default;

private:
    std::vector<Coord> cells_;
};

struct Unit {
    std::string id;
    Side side = Side::friendly;
    Echelon echelon = Echelon::company;
    Role role = Role::infantry;
    double combat_power = 0.0;
    Coord position;
    Posture posture = Posture::defend_hasty;
    std::optional<Zone> zone;

    friend bool operator==(const Unit&, const Unit&) = default;
};

enum class ObjectiveKind { seize, secure, destroy };

struct Objective {
    std::string id;
    Coord location;
    ObjectiveKind kind = ObjectiveKind::seize;
    std::string label;

    friend bool operator==(const Objective&, const Objective&) = default;
};

enum class CivilKind { hospital, heritage, civilian_area };

struct CivilConsideration {
    Coord location;
    CivilKind kind = CivilKind::civilian_area;

    friend bool operator==(const CivilConsideration&, const CivilConsideration&) = default;
};

struct METTC {
    std::string mission;
    std::string enemy;
    std::string terrain_weather;
    int troops_available = 0;
    double troops_combat_power = 0.0;
    int time_available = 0;
    std::vector<CivilConsideration> civil_considerations;

    friend bool operator==(const METTC&, const METTC&) = default;
};

// Doctrinal template -------------------------------------------------------

enum class ConstraintKind { on_high_ground, reverse_slope, on_main_axis, within_range, in_depth };

/// One placement rule. Parameters are named explicitly per kind:
///   on_high_ground: percentile
///   reverse_slope:  percentile (what counts as the high-ground neighbor)
///   on_main_axis:   distance
///   within_range:   other_role, distance
///   in_depth:       min_depth, max_depth (cells from the friendly line of departure)
struct PlacementConstraint {
    ConstraintKind kind = ConstraintKind::on_high_ground;
    bool hard = true;
    double percentile = 0.0;
    int distance = 0;
    Role other_role = Role::infantry;
    int min_depth = 0;
    int max_depth = 0;

    friend bool operator==(const PlacementConstraint&, const PlacementConstraint&) = default;
};

struct TemplateEntry {
    Role role = Role::infantry;
    int count = 1;
    double combat_power = 10.0;
    Echelon echelon = Echelon::company;
    Posture posture = Posture::defend_prepared;
    std::vector<PlacementConstraint> constraints;

    friend bool operator==(const TemplateEntry&, const TemplateEntry&) = default;
};

struct DoctrinalTemplate {
    std::vector<TemplateEntry> entries;

    friend bool operator==(const DoctrinalTemplate&, const DoctrinalTemplate&) = default;
};

/// Named road component; `anchor` is any cell on the road.
struct RouteName {
    std::string name;
    Coord anchor;

    friend bool operator==(const RouteName&, const RouteName&) = default;
};

struct ScenarioMetadata {
    std::string name;
    std::string own_unit_name;
    double cell_size_km = 1.0;
    double tick_minutes = 10.0;
    int enemy_weapon_reach = 5;
    std::vector<RouteName> routes;

    friend bool operator==(const ScenarioMetadata&, const ScenarioMetadata&) = default;
};

struct Scenario {
    ScenarioMetadata metadata;
    GridMap map;
    WeatherState weather;
    std::vector<Unit> friendly_units;
    std::vector<Unit> enemy_observed_units;
    DoctrinalTemplate enemy_template;
    std::vector<Objective> objectives;
    std::vector<Zone> friendly_entry_zones;
    std::vector<Zone> enemy_entry_zones;
    int time_limit = 1;
    METTC mettc;

    const Objective* find_objective(std::string_view id) const;
    const Unit* find_unit(std::string_view id) const;

    /// Union of all friendly entry zones.
    Zone friendly_entry() const;
    Zone enemy_entry() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Fills the derived METTC fields from the scenario's forces and terrain.
METTC derive_mettc(const Scenario& scenario, std::string mission, std::vector<CivilConsideration> civil);

/// Every invariant violation in the scenario, empty when valid.
std::vector<std::string> validate(const Scenario& scenario);

std::string_view to_string(Side s) noexcept;
std::string_view to_string(Echelon e) noexcept;
std::string_view to_string(Posture p) noexcept;
std::string_view to_string(ObjectiveKind k) noexcept;
std::string_view to_string(CivilKind k) noexcept;
std::string_view to_string(ConstraintKind k) noexcept;
Side side_from_string(std::string_view s);
Echelon echelon_from_string(std::string_view s);
Posture posture_from_string(std::string_view s);
ObjectiveKind objective_kind_from_string(std::string_view s);
CivilKind civil_kind_from_string(std::string_view s);
ConstraintKind constraint_kind_from_string(std::string_view s);

bool is_maneuver(Role r) noexcept;

} // namespace coaforge
