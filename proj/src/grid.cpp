#include "coaforge/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <fmt/format.h>

#include "coaforge/errors.hpp"

namespace coaforge {

namespace {

// Odd-row offset neighbor deltas (col, row). Odd rows are shifted right.
constexpr std::array<std::array<int, 2>, 6> kHexEvenRow{{{+1, 0}, {0, -1}, {-1, -1}, {-1, 0}, {-1, +1}, {0, +1}}};
constexpr std::array<std::array<int, 2>, 6> kHexOddRow{{{+1, 0}, {+1, -1}, {0, -1}, {-1, 0}, {0, +1}, {+1, +1}}};
constexpr std::array<std::array<int, 2>, 8> kSquare{
    {{-1, -1}, {0, -1}, {+1, -1}, {-1, 0}, {+1, 0}, {-1, +1}, {0, +1}, {+1, +1}}};

struct Cube {
    int x, y, z;
};

Cube to_cube(Coord c)
{
    const int x = c.col - (c.row - (c.row & 1)) / 2;
    const int z = c.row;
    return {x, -x - z, z};
}

} // namespace

std::string to_string(Coord c)
{
    return fmt::format("({},{})", c.col, c.row);
}

double base_mobility_cost(Surface s) noexcept
{
    switch (s) {
    case Surface::open: return 1.0;
    case Surface::road: return 1.0;
    case Surface::forest: return 2.0;
    case Surface::urban: return 1.5;
    case Surface::marsh: return 3.0;
    case Surface::river: return 4.0;
    case Surface::impassable: return kImpassable;
    }
    return kImpassable;
}

TerrainCell make_cell(Surface s, double elevation)
{
    return {elevation, s, base_mobility_cost(s)};
}

bool NeighborList::contains(Coord c) const
{
    return std::find(begin(), end(), c) != end();
}

GridMap::GridMap(Topology topology, int width, int height, std::vector<TerrainCell> cells)
    : topology_(topology), width_(width), height_(height), cells_(std::move(cells))
{
    if (width < 1 || height < 1)
        throw ContractViolation(fmt::format("grid dimensions must be >= 1, got {}x{}", width, height));
    if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw ContractViolation(fmt::format("grid has {} cells, expected {}", cells_.size(), width * height));
}

const TerrainCell& GridMap::at(Coord c) const
{
    if (!in_bounds(c))
        throw ContractViolation("coordinate out of bounds: " + to_string(c));
    return cells_[index(c)];
}

NeighborList GridMap::neighbors(Coord at) const
{
    if (!in_bounds(at))
        throw ContractViolation("coordinate out of bounds: " + to_string(at));
    NeighborList out;
    auto emit = [&](int dc, int dr) {
        Coord n{at.col + dc, at.row + dr};
        if (in_bounds(n))
            out.push(n);
    };
    if (topology_ == Topology::square_8) {
        for (auto [dc, dr] : kSquare)
            emit(dc, dr);
    } else {
        const auto& table = (at.row & 1) ? kHexOddRow : kHexEvenRow;
        for (auto [dc, dr] : table)
            emit(dc, dr);
    }
    return out;
}

int GridMap::distance(Coord a, Coord b) const noexcept
{
    if (topology_ == Topology::square_8)
        return std::max(std::abs(a.col - b.col), std::abs(a.row - b.row));
    const Cube ca = to_cube(a);
    const Cube cb = to_cube(b);
    return std::max({std::abs(ca.x - cb.x), std::abs(ca.y - cb.y), std::abs(ca.z - cb.z)});
}

double weather_mobility_modifier(const WeatherState& weather) noexcept
{
    return std::min(1.0 + 0.025 * weather.precipitation, 1.5);
}

double role_mobility_modifier(Role role, Surface destination) noexcept
{
    if (destination == Surface::impassable)
        return kImpassable;
    if (destination == Surface::river)
        return role == Role::engineer ? 1.0 : kImpassable;
    if (role == Role::armor) {
        switch (destination) {
        case Surface::road: return 0.5;
        case Surface::forest: return 1.5;
        case Surface::marsh: return kImpassable;
        default: return 1.0;
        }
    }
    return 1.0;
}

double entry_cost(const TerrainCell& cell, Role role, const WeatherState& weather) noexcept
{
    const double role_mod = role_mobility_modifier(role, cell.surface);
    if (std::isinf(role_mod) || std::isinf(cell.base_cost))
        return kImpassable;
    return cell.base_cost * role_mod * weather_mobility_modifier(weather);
}

double mobility_cost(const GridMap& map, const WeatherState& weather, Coord from, Coord to, Role role)
{
    if (!map.in_bounds(from) || !map.in_bounds(to))
        throw ContractViolation("mobility_cost: coordinate out of bounds");
    if (!map.neighbors(from).contains(to))
        throw ContractViolation(
            fmt::format("mobility_cost: {} and {} are not adjacent", to_string(from), to_string(to)));
    return entry_cost(map.at(to), role, weather);
}

std::vector<double> entry_costs(const GridMap& map, const WeatherState& weather, Role role)
{
    std::vector<double> out;
    out.reserve(map.size());
    for (const auto& cell : map.cells())
        out.push_back(entry_cost(cell, role, weather));
    return out;
}

std::vector<bool> high_ground_mask(const GridMap& map)
{
    std::vector<double> elev;
    elev.reserve(map.size());
    for (const auto& c : map.cells())
        elev.push_back(c.elevation);
    std::vector<double> sorted = elev;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double p75 = sorted[static_cast<std::size_t>(std::floor(0.75 * static_cast<double>(sorted.size() - 1)))];
    std::vector<bool> mask(elev.size(), false);
    for (std::size_t i = 0; i < elev.size(); ++i)
        mask[i] = elev[i] >= p75 && elev[i] > lo;
    return mask;
}

char surface_char(Surface s) noexcept
{
    switch (s) {
    case Surface::open: return '.';
    case Surface::forest: return 'F';
    case Surface::urban: return 'U';
    case Surface::road: return 'R';
    case Surface::river: return '~';
    case Surface::marsh: return 'M';
    case Surface::impassable: return '#';
    }
    return '?';
}

Surface surface_from_char(char c)
{
    switch (c) {
    case '.': return Surface::open;
    case 'F': return Surface::forest;
    case 'U': return Surface::urban;
    case 'R': return Surface::road;
    case '~': return Surface::river;
    case 'M': return Surface::marsh;
    case '#': return Surface::impassable;
    default: throw std::invalid_argument(fmt::format("unknown terrain character '{}'", c));
    }
}

std::string_view to_string(Topology t) noexcept
{
    return t == Topology::hex_odd_row ? "hex-odd-row" : "square-8-neighbor";
}

std::string_view to_string(Surface s) noexcept
{
    switch (s) {
    case Surface::open: return "open";
    case Surface::forest: return "forest";
    case Surface::urban: return "urban";
    case Surface::road: return "road";
    case Surface::river: return "river";
    case Surface::marsh: return "marsh";
    case Surface::impassable: return "impassable";
    }
    return "?";
}

std::string_view to_string(Role r) noexcept
{
    switch (r) {
    case Role::infantry: return "infantry";
    case Role::armor: return "armor";
    case Role::artillery: return "artillery";
    case Role::engineer: return "engineer";
    case Role::command_post: return "command_post";
    case Role::logistics: return "logistics";
    case Role::recon: return "recon";
    }
    return "?";
}

Topology topology_from_string(std::string_view s)
{
    if (s == "hex-odd-row")
        return Topology::hex_odd_row;
    if (s == "square-8-neighbor")
        return Topology::square_8;
    throw std::invalid_argument(fmt::format("unknown topology '{}'", s));
}

Role role_from_string(std::string_view s)
{
    for (Role r : {Role::infantry, Role::armor, Role::artillery, Role::engineer, Role::command_post,
             Role::logistics, Role::recon})
        if (to_string(r) == s)
            return r;
    throw std::invalid_argument(fmt::format("unknown unit role '{}'", s));
}

} // namespace coaforge
