#include "coaforge/pathfinding.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <tuple>

namespace coaforge {

namespace {

using NodePath = std::vector<std::size_t>;

struct Search {
    std::vector<std::pair<std::size_t, double>> starts;
    const std::vector<char>* blocked_nodes = nullptr;
    std::size_t spur_node = static_cast<std::size_t>(-1);
    const std::vector<std::size_t>* spur_forbidden_next = nullptr;
    const std::vector<char>* targets = nullptr;
    // Admissible cost-to-go; plain Dijkstra when absent.
    const std::vector<double>* heuristic = nullptr;
    // Replaces the graph's entry costs when set.
    const std::vector<double>* costs = nullptr;
};

std::optional<std::pair<NodePath, double>> search(const MobilityGraph& g, const Search& s)
{
    const GridMap& map = g.map();
    const std::size_t n = map.size();
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    auto entry = [&](std::size_t i) { return s.costs ? (*s.costs)[i] : g.entry(i); };
    auto h = [&](std::size_t i) { return s.heuristic ? (*s.heuristic)[i] : 0.0; };
    std::vector<double> dist(n, kImpassable);
    std::vector<std::size_t> parent(n, none);
    std::vector<char> done(n, 0);
    // (estimate, cost-to-go, node): among equal estimates prefer nodes nearer the goal.
    using Item = std::tuple<double, double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;

    for (auto [node, cost] : s.starts) {
        if (!std::isfinite(entry(node)) || !std::isfinite(h(node))
            || (s.blocked_nodes && (*s.blocked_nodes)[node]))
            continue;
        if (cost < dist[node]) {
            dist[node] = cost;
            queue.push({cost + h(node), h(node), node});
        }
    }
    while (!queue.empty()) {
        auto [f, hu, u] = queue.top();
        queue.pop();
        if (done[u])
            continue;
        done[u] = 1;
        if ((*s.targets)[u]) {
            NodePath path;
            for (std::size_t v = u; v != none; v = parent[v])
                path.push_back(v);
            std::reverse(path.begin(), path.end());
            return std::pair{std::move(path), dist[u]};
        }
        for (Coord nc : map.neighbors(map.coord(u))) {
            const std::size_t v = map.index(nc);
            if (done[v] || (s.blocked_nodes && (*s.blocked_nodes)[v]))
                continue;
            if (u == s.spur_node && s.spur_forbidden_next
                && std::find(s.spur_forbidden_next->begin(), s.spur_forbidden_next->end(), v)
                    != s.spur_forbidden_next->end())
                continue;
            const double w = entry(v);
            if (!std::isfinite(w) || !std::isfinite(h(v)))
                continue;
            const double nd = dist[u] + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                parent[v] = u;
                queue.push({nd + h(v), h(v), v});
            }
        }
    }
    return std::nullopt;
}

// Exact cost-to-go to the nearest target on the unblocked graph.
std::vector<double> cost_to_go(const MobilityGraph& g, const std::vector<char>& targets)
{
    const GridMap& map = g.map();
    std::vector<double> dist(map.size(), kImpassable);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (std::size_t i = 0; i < map.size(); ++i)
        if (targets[i] && std::isfinite(g.entry(i))) {
            dist[i] = 0.0;
            queue.push({0.0, i});
        }
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v])
            continue;
        const double step = d + g.entry(v);
        for (Coord nc : map.neighbors(map.coord(v))) {
            const std::size_t u = map.index(nc);
            if (std::isfinite(g.entry(u)) && step < dist[u]) {
                dist[u] = step;
                queue.push({step, u});
            }
        }
    }
    return dist;
}

std::vector<char> mask_of(const GridMap& map, const Zone& z)
{
    std::vector<char> m(map.size(), 0);
    for (Coord c : z.cells())
        if (map.in_bounds(c))
            m[map.index(c)] = 1;
    return m;
}

Path to_path(const GridMap& map, const NodePath& nodes, double cost)
{
    Path p;
    p.cost = cost;
    p.cells.reserve(nodes.size());
    for (auto i : nodes)
        p.cells.push_back(map.coord(i));
    return p;
}

} // namespace

MobilityGraph::MobilityGraph(const GridMap& map, const WeatherState& weather, Role role)
    : map_(&map), role_(role), costs_(entry_costs(map, weather, role))
{
}

void MobilityGraph::block(std::span<const Coord> cells)
{
    for (Coord c : cells)
        if (map_->in_bounds(c))
            costs_[map_->index(c)] = kImpassable;
}

std::optional<Path> shortest_path(const MobilityGraph& graph, const Zone& sources, const Zone& targets)
{
    const GridMap& map = graph.map();
    auto target_mask = mask_of(map, targets);
    Search s;
    for (Coord c : sources.cells())
        if (map.in_bounds(c))
            s.starts.push_back({map.index(c), 0.0});
    s.targets = &target_mask;
    auto r = search(graph, s);
    if (!r)
        return std::nullopt;
    return to_path(map, r->first, r->second);
}

double edge_overlap(std::span<const Coord> a, std::span<const Coord> b)
{
    if (a.size() < 2 || b.size() < 2)
        return std::equal(a.begin(), a.end(), b.begin(), b.end()) ? 1.0 : 0.0;
    auto edges = [](std::span<const Coord> r) {
        std::set<std::pair<Coord, Coord>> out;
        for (std::size_t i = 1; i < r.size(); ++i)
            out.insert(std::minmax(r[i - 1], r[i]));
        return out;
    };
    const auto ea = edges(a);
    const auto eb = edges(b);
    std::size_t shared = 0;
    for (const auto& e : ea)
        shared += eb.count(e);
    return static_cast<double>(shared) / static_cast<double>(std::min(ea.size(), eb.size()));
}

std::vector<Path> diverse_shortest_paths(
    const MobilityGraph& graph, const Zone& sources, const Zone& targets, const DiversePathOptions& options)
{
    const GridMap& map = graph.map();
    std::vector<Path> accepted;
    if (options.k < 1)
        return accepted;

    auto target_mask = mask_of(map, targets);
    const auto heuristic = cost_to_go(graph, target_mask);
    std::vector<std::size_t> source_nodes;
    for (Coord c : sources.cells())
        if (map.in_bounds(c))
            source_nodes.push_back(map.index(c));

    Search first;
    for (auto s : source_nodes)
        first.starts.push_back({s, 0.0});
    first.targets = &target_mask;
    first.heuristic = &heuristic;
    auto p0 = search(graph, first);
    if (!p0)
        return accepted;

    std::vector<std::pair<NodePath, double>> popped{*p0};
    std::set<NodePath> seen{p0->first};
    std::set<std::pair<double, NodePath>> candidates;
    accepted.push_back(to_path(map, p0->first, p0->second));

    auto try_accept = [&](const NodePath& nodes, double cost) {
        Path p = to_path(map, nodes, cost);
        const bool diverse = std::all_of(accepted.begin(), accepted.end(),
            [&](const Path& a) { return edge_overlap(a.cells, p.cells) <= options.max_overlap; });
        if (diverse)
            accepted.push_back(std::move(p));
    };

    std::vector<char> blocked(map.size(), 0);
    int drawn = 1;
    while (static_cast<int>(accepted.size()) < options.k && drawn < options.max_candidates) {
        const NodePath last = popped.back().first;

        // Spur at the virtual source: start anywhere except first cells already used.
        {
            Search s;
            for (auto src : source_nodes) {
                bool used = std::any_of(popped.begin(), popped.end(), [&](const auto& p) { return p.first[0] == src; });
                if (!used)
                    s.starts.push_back({src, 0.0});
            }
            s.targets = &target_mask;
            s.heuristic = &heuristic;
            if (auto r = search(graph, s); r && seen.insert(r->first).second)
                candidates.insert({r->second, r->first});
        }

        double root_cost = 0.0;
        for (std::size_t i = 0; i + 1 < last.size(); ++i) {
            if (i > 0)
                root_cost += graph.entry(last[i]);
            std::vector<std::size_t> forbidden;
            for (const auto& [p, c] : popped)
                if (p.size() > i + 1 && std::equal(last.begin(), last.begin() + static_cast<long>(i) + 1, p.begin()))
                    forbidden.push_back(p[i + 1]);
            std::fill(blocked.begin(), blocked.end(), 0);
            for (std::size_t j = 0; j < i; ++j)
                blocked[last[j]] = 1;

            Search s;
            s.starts.push_back({last[i], root_cost});
            s.blocked_nodes = &blocked;
            s.spur_node = last[i];
            s.spur_forbidden_next = &forbidden;
            s.targets = &target_mask;
            s.heuristic = &heuristic;
            auto r = search(graph, s);
            if (!r)
                continue;
            NodePath full(last.begin(), last.begin() + static_cast<long>(i));
            full.insert(full.end(), r->first.begin(), r->first.end());
            if (seen.insert(full).second)
                candidates.insert({r->second, std::move(full)});
        }

        if (candidates.empty())
            break;
        auto best = *candidates.begin();
        candidates.erase(candidates.begin());
        ++drawn;
        popped.push_back({best.second, best.first});
        try_accept(best.second, best.first);
    }

    // Open ground yields huge families of near-identical equal-cost variants
    // that exhaust the candidate cap; fall back to penalizing accepted cells.
    if (static_cast<int>(accepted.size()) < options.k) {
        std::vector<double> penalized(map.size());
        for (std::size_t i = 0; i < map.size(); ++i)
            penalized[i] = graph.entry(i);
        for (int round = 0; round < options.penalty_rounds && static_cast<int>(accepted.size()) < options.k;
             ++round) {
            for (const Path& a : accepted)
                for (std::size_t j = 1; j + 1 < a.cells.size(); ++j)
                    penalized[map.index(a.cells[j])] *= options.penalty_factor;
            Search s;
            for (auto src : source_nodes)
                s.starts.push_back({src, 0.0});
            s.targets = &target_mask;
            s.heuristic = &heuristic;
            s.costs = &penalized;
            auto r = search(graph, s);
            if (!r || !seen.insert(r->first).second)
                continue;
            try_accept(r->first, route_cost(graph, to_path(map, r->first, 0.0).cells));
        }
        std::stable_sort(accepted.begin() + 1, accepted.end(),
            [](const Path& a, const Path& b) { return std::tie(a.cost, a.cells) < std::tie(b.cost, b.cells); });
    }
    return accepted;
}

std::optional<Path> join_route(const MobilityGraph& graph, Coord from, std::span<const Coord> avenue)
{
    if (avenue.empty())
        return std::nullopt;
    auto on = std::find(avenue.begin(), avenue.end(), from);
    std::vector<Coord> cells;
    if (on != avenue.end()) {
        cells.assign(on, avenue.end());
    } else {
        auto connector = shortest_path(graph, Zone({from}), Zone(std::vector<Coord>(avenue.begin(), avenue.end())));
        if (!connector)
            return std::nullopt;
        auto joined = std::find(avenue.begin(), avenue.end(), connector->cells.back());
        cells = std::move(connector->cells);
        cells.insert(cells.end(), joined + 1, avenue.end());
    }
    if (!is_valid_route(graph, cells))
        return std::nullopt;
    return Path{cells, route_cost(graph, cells)};
}

double route_cost(const MobilityGraph& graph, std::span<const Coord> cells)
{
    double total = 0.0;
    for (std::size_t i = 1; i < cells.size(); ++i)
        total += graph.entry(graph.map().index(cells[i]));
    return total;
}

bool is_valid_route(const MobilityGraph& graph, std::span<const Coord> cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!graph.passable(cells[i]))
            return false;
        if (i > 0 && !graph.map().adjacent(cells[i - 1], cells[i]))
            return false;
    }
    return !cells.empty();
}

} // namespace coaforge
