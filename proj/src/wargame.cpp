#include "coaforge/wargame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "coaforge/errors.hpp"
#include "coaforge/pathfinding.hpp"

namespace coaforge {

namespace {

struct Orders {
    std::vector<Coord> route;
    std::size_t index = 0;
    double budget = 0.0;
};

struct Plan {
    const CourseOfAction* coa = nullptr;
    Side side = Side::friendly;
    int phase = 0;
};

class Engine {
public:
    Engine(const Scenario& scenario, const CourseOfAction& friendly, const EnemyCoA& enemy, std::uint64_t seed,
        const WargameOptions& options)
        : scenario_(scenario), map_(scenario.map), friendly_(friendly), enemy_(enemy), options_(options), rng_(seed),
          noise_(-kNoiseSigma * kNoiseSigma / 2, kNoiseSigma), high_(high_ground_mask(scenario.map)),
          vis_(visibility_modifier(scenario.weather))
    {
        for (const auto& u : scenario.friendly_units)
            s_.units.push_back(u);
        for (const auto& u : enemy.forces) {
            s_.units.push_back(u);
            s_.units.back().side = Side::enemy;
        }
        for (std::size_t i = 0; i < s_.units.size(); ++i)
            index_[s_.units[i].id] = i;
        start_cp_.resize(s_.units.size());
        for (std::size_t i = 0; i < s_.units.size(); ++i)
            start_cp_[i] = s_.units[i].combat_power;
        orders_.resize(s_.units.size());
        required_ = friendly.required_objectives;
        if (required_.empty())
            for (const auto& o : scenario.objectives)
                required_.push_back(o.id);
        validate();
    }

    SimOutcome run()
    {
        SimOutcome out;
        out.friendly_start_cp = side_cp(Side::friendly);
        out.enemy_start_cp = side_cp(Side::enemy);
        plans_ = {{&friendly_, Side::friendly, 0}, {&enemy_.plan, Side::enemy, 0}};
        for (const auto& p : plans_)
            if (!p.coa->phases.empty())
                apply_phase(p.coa->phases.front());

        while (s_.tick < scenario_.time_limit) {
            ++s_.tick;
            triggers();
            movement();
            engagements();
            removals();
            seizures();
            if (all_seized() || collapsed(Side::friendly, out.friendly_start_cp)
                || (collapsed(Side::enemy, out.enemy_start_cp) && !friendly_advancing()))
                break;
        }
        out.success = all_seized();
        out.state = std::move(s_);
        return out;
    }

private:
    bool alive(std::size_t i) const
    {
        return s_.units[i].combat_power > 0 && !s_.destroyed.count(s_.units[i].id);
    }

    double side_cp(Side side) const
    {
        double cp = 0;
        for (std::size_t i = 0; i < s_.units.size(); ++i)
            if (s_.units[i].side == side)
                cp += s_.units[i].combat_power;
        return cp;
    }

    bool collapsed(Side side, double start) const
    {
        return start > 0 && side_cp(side) < kCombatIneffective * start;
    }

    // Friendly units still on the way to their objectives keep a collapsed
    // enemy's run going until they arrive.
    bool friendly_advancing() const
    {
        if (all_seized())
            return false;
        const Plan& p = plans_.front();
        if (p.phase + 1 < static_cast<int>(p.coa->phases.size()))
            return true;
        for (std::size_t i = 0; i < s_.units.size(); ++i)
            if (s_.units[i].side == Side::friendly && alive(i) && orders_[i].index + 1 < orders_[i].route.size())
                return true;
        return false;
    }

    bool all_seized() const
    {
        return std::all_of(
            required_.begin(), required_.end(), [&](const std::string& id) { return s_.seized_objectives.count(id); });
    }

    const Zone* boundary(const Unit& u) const
    {
        if (u.side != Side::friendly)
            return nullptr;
        auto it = friendly_.boundaries.find(u.id);
        return it == friendly_.boundaries.end() ? nullptr : &it->second;
    }

    void validate() const
    {
        auto check = [&](const CourseOfAction& coa, Side side) {
            for (const auto& phase : coa.phases)
                for (const auto& t : phase.tasks) {
                    auto it = index_.find(t.unit_id);
                    if (it == index_.end() || s_.units[it->second].side != side)
                        throw ContractViolation(
                            fmt::format("CoA '{}' tasks unit '{}' absent from the scenario", coa.id, t.unit_id));
                    const Unit& u = s_.units[it->second];
                    if (t.route.empty())
                        continue;
                    MobilityGraph g(map_, scenario_.weather, u.role);
                    if (!is_valid_route(g, t.route))
                        throw ContractViolation(
                            fmt::format("CoA '{}': route of '{}' is not a passable chain", coa.id, u.id));
                    if (&phase == &coa.phases.front() && t.route.front() != u.position)
                        throw ContractViolation(
                            fmt::format("CoA '{}': route of '{}' does not start at the unit", coa.id, u.id));
                    if (const Zone* z = boundary(u))
                        for (Coord c : t.route)
                            if (!z->contains(c))
                                throw ContractViolation(fmt::format(
                                    "CoA '{}': route of '{}' leaves its boundary at {}", coa.id, u.id, to_string(c)));
                }
        };
        check(friendly_, Side::friendly);
        check(enemy_.plan, Side::enemy);
        for (const auto& u : s_.units)
            if (const Zone* z = boundary(u); z && !z->contains(u.position))
                throw ContractViolation(fmt::format("unit '{}' starts outside its boundary", u.id));
    }

    void apply_phase(const Phase& phase)
    {
        for (const auto& t : phase.tasks) {
            const std::size_t i = index_.at(t.unit_id);
            Unit& u = s_.units[i];
            Orders& o = orders_[i];
            if (t.posture)
                u.posture = *t.posture;
            if (t.route.empty()) {
                o = {};
                continue;
            }
            auto at = std::find(t.route.begin(), t.route.end(), u.position);
            if (at != t.route.end()) {
                o.route = t.route;
                o.index = static_cast<std::size_t>(at - t.route.begin());
            } else if (!o.route.empty() && o.route.back() == t.route.front()) {
                o.route.insert(o.route.end(), t.route.begin() + 1, t.route.end());
            } else {
                o = {};
            }
        }
    }

    void triggers()
    {
        for (auto& p : plans_) {
            const auto& phases = p.coa->phases;
            for (const auto& sync : p.coa->synchronization) {
                if (sync.phase != p.phase + 1 || sync.phase >= static_cast<int>(phases.size()))
                    continue;
                const bool fire = sync.trigger == TriggerKind::time_tick
                    ? s_.tick >= sync.tick
                    : s_.seized_objectives.count(sync.objective) > 0;
                if (!fire)
                    continue;
                p.phase = sync.phase;
                apply_phase(phases[static_cast<std::size_t>(p.phase)]);
                s_.event_log.push_back({s_.tick, EventKind::phase_advance, {p.coa->id},
                    {double(p.phase), p.side == Side::friendly ? 0.0 : 1.0, side_cp(Side::friendly),
                        side_cp(Side::enemy)}});
            }
        }
    }

    double terrain_mod(Coord c) const
    {
        const Surface s = map_.at(c).surface;
        return (s == Surface::forest || s == Surface::urban ? 1.3 : 1.0) * (high_[map_.index(c)] ? 1.2 : 1.0);
    }

    bool enemy_near(std::size_t i, Coord c) const
    {
        for (std::size_t j = 0; j < s_.units.size(); ++j)
            if (s_.units[j].side != s_.units[i].side && alive(j) && map_.distance(c, s_.units[j].position) <= 1)
                return true;
        return false;
    }

    bool enemy_at(std::size_t i, Coord c) const
    {
        for (std::size_t j = 0; j < s_.units.size(); ++j)
            if (s_.units[j].side != s_.units[i].side && alive(j) && s_.units[j].position == c)
                return true;
        return false;
    }

    void movement()
    {
        for (std::size_t i = 0; i < s_.units.size(); ++i) {
            Orders& o = orders_[i];
            if (!alive(i) || o.index + 1 >= o.route.size())
                continue;
            Unit& u = s_.units[i];
            o.budget += 1.0;
            while (o.index + 1 < o.route.size()) {
                const Coord next = o.route[o.index + 1];
                if (enemy_near(i, u.position) || enemy_at(i, next)) {
                    o.budget = 0;
                    break;
                }
                const double cost = entry_cost(map_.at(next), u.role, scenario_.weather);
                if (o.budget < cost)
                    break;
                o.budget -= cost;
                ++o.index;
                u.position = next;
                if (const Zone* z = boundary(u); z && !z->contains(next))
                    throw ContractViolation(fmt::format("unit '{}' left its boundary at {}", u.id, to_string(next)));
                s_.event_log.push_back({s_.tick, EventKind::move, {u.id}, {double(next.col), double(next.row)}});
            }
            if (o.index + 1 >= o.route.size())
                o.budget = 0;
        }
    }

    std::pair<double, double> draw()
    {
        const double a = noise_(rng_), b = noise_(rng_);
        return options_.noise ? std::pair{a, b} : std::pair{1.0, 1.0};
    }

    void engagements()
    {
        struct Pair {
            std::size_t attacker, defender;
            bool mutual;
        };
        std::vector<Pair> pairs;
        std::vector<int> firing(s_.units.size(), 0);
        auto attacks = [&](std::size_t i) {
            Posture p = s_.units[i].posture;
            return p == Posture::attack || p == Posture::moving;
        };
        for (std::size_t f = 0; f < s_.units.size(); ++f) {
            if (s_.units[f].side != Side::friendly || !alive(f))
                continue;
            for (std::size_t e = 0; e < s_.units.size(); ++e) {
                if (s_.units[e].side != Side::enemy || !alive(e)
                    || map_.distance(s_.units[f].position, s_.units[e].position) > 1)
                    continue;
                const bool enemy_attacks = attacks(e) && !attacks(f);
                pairs.push_back({enemy_attacks ? e : f, enemy_attacks ? f : e, true});
                ++firing[f];
                ++firing[e];
            }
        }
        for (std::size_t a = 0; a < s_.units.size(); ++a) {
            if (s_.units[a].role != Role::artillery || !alive(a) || firing[a] > 0)
                continue;
            std::optional<std::size_t> target;
            int best = kArtilleryRange + 1;
            for (std::size_t t = 0; t < s_.units.size(); ++t) {
                if (s_.units[t].side == s_.units[a].side || !alive(t))
                    continue;
                const int d = map_.distance(s_.units[a].position, s_.units[t].position);
                if (d < best) {
                    best = d;
                    target = t;
                }
            }
            if (target) {
                pairs.push_back({a, *target, false});
                ++firing[a];
            }
        }

        std::vector<double> delta(s_.units.size(), 0.0);
        for (const auto& p : pairs) {
            const Unit& att = s_.units[p.attacker];
            const Unit& def = s_.units[p.defender];
            const double a_cp = att.combat_power / firing[p.attacker];
            const double d_cp = p.mutual ? def.combat_power / firing[p.defender] : 0.0;
            auto r = resolve_engagement(a_cp, d_cp, terrain_mod(def.position),
                posture_modifier(def.posture), vis_, draw());
            delta[p.attacker] += r.attacker_delta;
            delta[p.defender] += r.defender_delta;
            s_.event_log.push_back(
                {s_.tick, EventKind::engage, {att.id, def.id}, {r.attacker_delta, r.defender_delta}});
        }
        for (std::size_t i = 0; i < s_.units.size(); ++i)
            s_.units[i].combat_power = std::max(0.0, s_.units[i].combat_power + delta[i]);
    }

    void removals()
    {
        for (std::size_t i = 0; i < s_.units.size(); ++i) {
            const Unit& u = s_.units[i];
            if (s_.destroyed.count(u.id) || start_cp_[i] <= 0)
                continue;
            if (u.combat_power <= 0 || u.combat_power < kCombatIneffective * start_cp_[i]) {
                s_.destroyed.insert(u.id);
                s_.event_log.push_back({s_.tick, EventKind::destroy, {u.id}, {u.combat_power}});
            }
        }
    }

    void seizures()
    {
        for (const auto& obj : scenario_.objectives) {
            if (s_.seized_objectives.count(obj.id))
                continue;
            for (std::size_t i = 0; i < s_.units.size(); ++i) {
                if (s_.units[i].side != Side::friendly || !alive(i) || s_.units[i].position != obj.location
                    || enemy_near(i, obj.location))
                    continue;
                s_.seized_objectives.insert(obj.id);
                s_.event_log.push_back({s_.tick, EventKind::seize, {s_.units[i].id, obj.id},
                    {double(obj.location.col), double(obj.location.row)}});
                break;
            }
        }
    }

    const Scenario& scenario_;
    const GridMap& map_;
    const CourseOfAction& friendly_;
    const EnemyCoA& enemy_;
    WargameOptions options_;
    std::mt19937_64 rng_;
    std::lognormal_distribution<double> noise_;
    std::vector<bool> high_;
    double vis_;

    SimState s_;
    std::map<std::string, std::size_t> index_;
    std::vector<double> start_cp_;
    std::vector<Orders> orders_;
    std::vector<std::string> required_;
    std::vector<Plan> plans_;
};

} // namespace

EngagementResult resolve_engagement(double attacker_cp, double defender_cp, double terrain_mod, double posture_mod,
    double visibility_mod, std::pair<double, double> noise)
{
    if (!(attacker_cp >= 0) || !(defender_cp >= 0))
        throw ContractViolation("combat power must be non-negative");
    if (!(terrain_mod > 0 && posture_mod > 0 && visibility_mod > 0 && noise.first > 0 && noise.second > 0))
        throw ContractViolation("engagement modifiers must be positive");
    EngagementResult r;
    r.defender_delta = -kAttritionRate * attacker_cp * visibility_mod * noise.first;
    r.attacker_delta = -kAttritionRate * defender_cp * terrain_mod * posture_mod * visibility_mod * noise.second;
    r.defender_delta = std::max(r.defender_delta, -defender_cp);
    r.attacker_delta = std::max(r.attacker_delta, -attacker_cp);
    return r;
}

double terrain_modifier(const GridMap& map, Coord c)
{
    const Surface s = map.at(c).surface;
    return (s == Surface::forest || s == Surface::urban ? 1.3 : 1.0) * (high_ground_mask(map)[map.index(c)] ? 1.2 : 1.0);
}

double posture_modifier(Posture p) noexcept
{
    switch (p) {
    case Posture::defend_prepared: return 1.5;
    case Posture::defend_hasty: return 1.2;
    default: return 1.0;
    }
}

double visibility_modifier(const WeatherState& weather) noexcept
{
    return std::clamp(weather.visibility / 5000.0, 0.5, 1.0);
}

SimOutcome simulate(const Scenario& scenario, const CourseOfAction& friendly, const EnemyCoA& enemy,
    std::uint64_t seed, const WargameOptions& options)
{
    return Engine(scenario, friendly, enemy, seed, options).run();
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash64(std::uint64_t seed, std::uint64_t index) noexcept
{
    return splitmix64(seed ^ splitmix64(index));
}

double wilson_reliability(int successes, int n)
{
    if (n < 1)
        throw ContractViolation("wilson interval needs n >= 1");
    const double z = 1.959963984540054;
    const double p = static_cast<double>(successes) / n;
    const double z2n = z * z / n;
    const double half = z * std::sqrt(p * (1 - p) / n + z2n / (4.0 * n)) / (1 + z2n);
    return std::clamp(1.0 - half, 0.0, 1.0);
}

WargameStats monte_carlo_evaluate(const Scenario& scenario, const CourseOfAction& friendly, const EnemyCoA& enemy,
    int n, std::uint64_t seed, const WargameOptions& options)
{
    if (n < 1)
        throw ContractViolation("monte_carlo_evaluate needs n >= 1");

    const int phases = std::max<int>(1, static_cast<int>(friendly.phases.size()));
    struct Rep {
        bool success = false;
        double friendly_loss = 0, enemy_loss = 0;
        int duration = 0;
        std::vector<double> f_delta, e_delta;
    };
    auto one = [&](int i) {
        auto out = simulate(scenario, friendly, enemy, hash64(seed, static_cast<std::uint64_t>(i)), options);
        Rep r;
        r.success = out.success;
        r.duration = out.state.tick;
        double f_end = 0, e_end = 0;
        for (const auto& u : out.state.units)
            (u.side == Side::friendly ? f_end : e_end) += u.combat_power;
        if (out.friendly_start_cp > 0)
            r.friendly_loss = (out.friendly_start_cp - f_end) / out.friendly_start_cp;
        if (out.enemy_start_cp > 0)
            r.enemy_loss = (out.enemy_start_cp - e_end) / out.enemy_start_cp;

        // Phase boundaries from the friendly phase_advance events.
        std::vector<double> f_mark(phases + 1, f_end), e_mark(phases + 1, e_end);
        std::vector<bool> reached(phases, false);
        f_mark[0] = out.friendly_start_cp;
        e_mark[0] = out.enemy_start_cp;
        reached[0] = true;
        for (const auto& ev : out.trace())
            if (ev.kind == EventKind::phase_advance && ev.detail[1] == 0.0) {
                const int p = static_cast<int>(ev.detail[0]);
                if (p > 0 && p < phases) {
                    f_mark[p] = ev.detail[2];
                    e_mark[p] = ev.detail[3];
                    reached[p] = true;
                }
            }
        r.f_delta.assign(phases, 0.0);
        r.e_delta.assign(phases, 0.0);
        for (int p = 0; p < phases; ++p) {
            if (!reached[p])
                continue;
            int q = p + 1;
            while (q < phases && !reached[q])
                ++q;
            r.f_delta[p] = f_mark[q] - f_mark[p];
            r.e_delta[p] = e_mark[q] - e_mark[p];
        }
        return r;
    };

    std::vector<Rep> reps(static_cast<std::size_t>(n));
    int workers = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            reps[i] = one(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int i = w; i < n; i += workers)
                        reps[i] = one(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool)
            t.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }

    WargameStats st;
    st.replications = n;
    int successes = 0;
    double f = 0, e = 0, d = 0;
    st.per_phase.resize(phases);
    for (int p = 0; p < phases; ++p)
        st.per_phase[p].phase = p;
    for (const auto& r : reps) {
        successes += r.success;
        f += r.friendly_loss;
        e += r.enemy_loss;
        d += r.duration;
        for (int p = 0; p < phases; ++p) {
            st.per_phase[p].friendly_cp_delta += r.f_delta[p];
            st.per_phase[p].enemy_cp_delta += r.e_delta[p];
        }
    }
    st.success_probability = static_cast<double>(successes) / n;
    st.friendly_loss_rate = std::clamp(f / n, 0.0, 1.0);
    st.enemy_attrition_rate = std::clamp(e / n, 0.0, 1.0);
    st.mean_duration = d / n;
    st.reliability = wilson_reliability(successes, n);
    for (auto& p : st.per_phase) {
        p.friendly_cp_delta /= n;
        p.enemy_cp_delta /= n;
    }
    return st;
}

std::string trace_jsonl(const std::vector<Event>& trace)
{
    std::string out;
    for (const auto& e : trace) {
        nlohmann::ordered_json j;
        j["tick"] = e.tick;
        j["kind"] = std::string(to_string(e.kind));
        j["actors"] = e.actors;
        j["detail"] = e.detail;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string_view to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::move: return "move";
    case EventKind::engage: return "engage";
    case EventKind::seize: return "seize";
    case EventKind::destroy: return "destroy";
    case EventKind::phase_advance: return "phase_advance";
    }
    return "?";
}

} // namespace coaforge
