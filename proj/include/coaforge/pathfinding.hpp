#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "coaforge/grid.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

struct Path {
    std::vector<Coord> cells;
    double cost = 0.0;

    friend bool operator==(const Path&, const Path&) = default;
};

/// Cell-entry costs for one role under one weather state. Moving into a cell
/// costs that cell's entry cost; starting cells are free.
class MobilityGraph {
public:
    MobilityGraph(const GridMap& map, const WeatherState& weather, Role role);

    const GridMap& map() const noexcept { return *map_; }
    Role role() const noexcept { return role_; }
    double entry(std::size_t index) const noexcept { return costs_[index]; }
    bool passable(Coord c) const { return map_->in_bounds(c) && std::isfinite(costs_[map_->index(c)]); }

    /// Mark cells as impassable for subsequent searches on this graph.
    void block(std::span<const Coord> cells);

private:
    const GridMap* map_;
    Role role_;
    std::vector<double> costs_;
};

/// Least-cost path from any source cell to any target cell, or nullopt when
/// none exists. Ties resolve toward lower row-major indices.
std::optional<Path> shortest_path(const MobilityGraph& graph, const Zone& sources, const Zone& targets);

/// Fraction of the shorter route's edges (unordered cell pairs) that the other
/// route also uses. Two single-cell routes overlap fully iff equal.
double edge_overlap(std::span<const Coord> a, std::span<const Coord> b);

struct DiversePathOptions {
    int k = 3;
    double max_overlap = 0.5;
    /// Cap on candidate paths drawn from Yen's enumeration.
    int max_candidates = 40;
    /// Fallback when the cap is hit: re-search with accepted route cells'
    /// costs multiplied by `penalty_factor`, up to `penalty_rounds` times.
    int penalty_rounds = 8;
    double penalty_factor = 2.0;
};

/// Yen's k-shortest loopless paths, accepting a candidate only if its edge
/// overlap with every accepted route is at most `max_overlap`. The first
/// route, when any exists, is the least-cost path; the rest are sorted by
/// cost.
std::vector<Path> diverse_shortest_paths(const MobilityGraph& graph, const Zone& sources, const Zone& targets,
    const DiversePathOptions& options = {});

/// Route from `from` onto `avenue`: the least-cost connector to the first
/// avenue cell reached, then the rest of the avenue. nullopt if the avenue
/// cannot be reached.
std::optional<Path> join_route(const MobilityGraph& graph, Coord from, std::span<const Coord> avenue);

/// Sum of entry costs along a route (excluding its first cell).
double route_cost(const MobilityGraph& graph, std::span<const Coord> cells);

/// Consecutive cells adjacent and every cell passable.
bool is_valid_route(const MobilityGraph& graph, std::span<const Coord> cells);

} // namespace coaforge
