#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace coaforge {

/// Grid coordinate, written (col, row) = (x, y) in documents. Ordering is
/// row-major, which is the tie-break order used throughout.
struct Coord {
    int col = 0;
    int row = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
    friend std::strong_ordering operator<=>(const Coord& a, const Coord& b)
    {
        if (auto c = a.row <=> b.row; c != 0)
            return c;
        return a.col <=> b.col;
    }
};

std::string to_string(Coord c);

enum class Topology { hex_odd_row, square_8 };

enum class Surface { open, forest, urban, road, river, marsh, impassable };

enum class Role { infantry, armor, artillery, engineer, command_post, logistics, recon };

inline constexpr double kImpassable = std::numeric_limits<double>::infinity();

/// Base time-units to enter a cell of the given surface; kImpassable for
/// impassable cells.
double base_mobility_cost(Surface s) noexcept;

struct TerrainCell {
    double elevation = 0.0;
    Surface surface = Surface::open;
    double base_cost = 1.0;

    friend bool operator==(const TerrainCell&, const TerrainCell&) = default;
};

TerrainCell make_cell(Surface s, double elevation);

struct WeatherState {
    double precipitation = 0.0; // mm/h
    double visibility = 10000.0; // m
    double wind_speed = 0.0; // m/s

    friend bool operator==(const WeatherState&, const WeatherState&) = default;
};

/// Fixed-capacity neighbor list; at most 8 entries.
class NeighborList {
public:
    void push(Coord c) { items_[size_++] = c; }
    const Coord* begin() const { return items_.data(); }
    const Coord* end() const { return items_.data() + size_; }
    std::size_t size() const { return size_; }
    bool contains(Coord c) const;
    std::vector<Coord> to_vector() const { return {begin(), end()}; }

private:
    std::array<Coord, 8> items_{};
    std::size_t size_ = 0;
};

class GridMap {
public:
    GridMap() = default;
    GridMap(Topology topology, int width, int height, std::vector<TerrainCell> cells);

    Topology topology() const noexcept { return topology_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }

    bool in_bounds(Coord c) const noexcept
    {
        return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
    }
    std::size_t index(Coord c) const noexcept
    {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_)
            + static_cast<std::size_t>(c.col);
    }
    Coord coord(std::size_t index) const noexcept
    {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    const TerrainCell& at(Coord c) const;
    const std::vector<TerrainCell>& cells() const noexcept { return cells_; }

    /// In-bounds neighbors of `at`. Throws ContractViolation when `at` is
    /// out of bounds.
    NeighborList neighbors(Coord at) const;

    /// Number of single-cell steps between two coordinates, ignoring terrain
    /// (Chebyshev on square-8, cube distance on hex).
    int distance(Coord a, Coord b) const noexcept;

    bool adjacent(Coord a, Coord b) const { return distance(a, b) == 1; }

    friend bool operator==(const GridMap&, const GridMap&) = default;

private:
    Topology topology_ = Topology::square_8;
    int width_ = 0;
    int height_ = 0;
    std::vector<TerrainCell> cells_;
};

/// 1.0 + 0.025 x precipitation, capped at 1.5.
double weather_mobility_modifier(const WeatherState& weather) noexcept;

/// Role modifier applied to a destination surface; kImpassable when the role
/// cannot enter it at all.
double role_mobility_modifier(Role role, Surface destination) noexcept;

/// Cost to enter `cell` for `role` under `weather`, independent of where the
/// move starts. Always > 0 or kImpassable.
double entry_cost(const TerrainCell& cell, Role role, const WeatherState& weather) noexcept;

/// Cost of a single step between adjacent cells. Throws ContractViolation for
/// non-adjacent or out-of-bounds pairs.
double mobility_cost(const GridMap& map, const WeatherState& weather, Coord from, Coord to, Role role);

/// Entry cost for every cell, indexed like the map.
std::vector<double> entry_costs(const GridMap& map, const WeatherState& weather, Role role);

/// High-ground mask used by combat resolution: cell elevation at or above the
/// 75th percentile of the map and strictly above the map minimum.
std::vector<bool> high_ground_mask(const GridMap& map);

char surface_char(Surface s) noexcept;
Surface surface_from_char(char c); // throws std::invalid_argument

std::string_view to_string(Topology t) noexcept;
std::string_view to_string(Surface s) noexcept;
std::string_view to_string(Role r) noexcept;
Topology topology_from_string(std::string_view s);
Role role_from_string(std::string_view s);

} // namespace coaforge
