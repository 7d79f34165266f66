#include "coaforge/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "coaforge/errors.hpp"

namespace coaforge {

namespace {

constexpr double kPerturbation = 0.1;
constexpr int kAssumptionRadius = 2;

std::vector<std::string> rank_by_total(const std::vector<std::string>& coas, const std::vector<double>& totals)
{
    std::vector<std::size_t> order(coas.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return totals[a] != totals[b] ? totals[a] > totals[b] : coas[a] < coas[b];
    });
    std::vector<std::string> out;
    for (auto i : order)
        out.push_back(coas[i]);
    return out;
}

std::vector<double> weighted_totals(const DecisionMatrix& m, const Weights& w)
{
    std::vector<double> totals;
    for (const auto& row : m.normalized) {
        double t = 0;
        for (std::size_t c = 0; c < kCriterionCount; ++c)
            t += w[c] * row[c];
        totals.push_back(t);
    }
    return totals;
}

Weights perturbed(const Weights& w, std::size_t c, double delta)
{
    Weights p = w;
    p[c] = std::max(0.0, p[c] + delta);
    double sum = 0;
    for (double v : p)
        sum += v;
    for (double& v : p)
        v /= sum;
    return p;
}

} // namespace

bool maximized(Criterion c) noexcept
{
    return c != Criterion::friendly_loss_rate && c != Criterion::mean_duration;
}

std::string_view to_string(Criterion c) noexcept
{
    switch (c) {
    case Criterion::success_probability: return "success_probability";
    case Criterion::friendly_loss_rate: return "friendly_loss_rate";
    case Criterion::enemy_attrition_rate: return "enemy_attrition_rate";
    case Criterion::mean_duration: return "mean_duration";
    case Criterion::reliability: return "reliability";
    }
    return "?";
}

Criterion criterion_from_string(std::string_view s)
{
    for (Criterion c : kCriteria)
        if (to_string(c) == s)
            return c;
    throw std::invalid_argument(fmt::format("unknown criterion '{}'", s));
}

std::string_view to_string(FindingKind k) noexcept
{
    return k == FindingKind::advantage ? "advantage" : "disadvantage";
}

double criterion_value(const WargameStats& s, Criterion c) noexcept
{
    switch (c) {
    case Criterion::success_probability: return s.success_probability;
    case Criterion::friendly_loss_rate: return s.friendly_loss_rate;
    case Criterion::enemy_attrition_rate: return s.enemy_attrition_rate;
    case Criterion::mean_duration: return s.mean_duration;
    case Criterion::reliability: return s.reliability;
    }
    return 0.0;
}

Weights default_weights() noexcept
{
    return {0.4, 0.2, 0.2, 0.1, 0.1};
}

void validate_weights(const Weights& w)
{
    double sum = 0;
    for (double v : w) {
        if (!std::isfinite(v) || v < 0)
            throw ContractViolation(fmt::format("weight {} is not a non-negative number", v));
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ContractViolation(fmt::format("weights sum to {}, not 1", sum));
}

Weights parse_weights(std::string_view text)
{
    Weights w{};
    std::vector<std::string> issues;
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = std::min(text.find(',', pos), text.size());
        std::string field(text.substr(pos, comma - pos));
        double v = 0;
        auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || end != field.data() + field.size())
            issues.push_back(fmt::format("weight {} '{}' is not a number", n + 1, field));
        if (n < kCriterionCount)
            w[n] = v;
        ++n;
        pos = comma + 1;
    }
    if (n != kCriterionCount)
        issues.push_back(fmt::format("expected {} weights, got {}", kCriterionCount, n));
    if (issues.empty()) {
        try {
            validate_weights(w);
        } catch (const ContractViolation& e) {
            issues.push_back(e.what());
        }
    }
    if (!issues.empty())
        throw ValidationError(issues);
    return w;
}

std::size_t DecisionMatrix::row(std::string_view coa_id) const
{
    for (std::size_t i = 0; i < coas.size(); ++i)
        if (coas[i] == coa_id)
            return i;
    throw NotFound(fmt::format("CoA '{}' is not in the decision matrix", coa_id));
}

int DecisionMatrix::rank(std::string_view coa_id) const
{
    for (std::size_t i = 0; i < ranking.size(); ++i)
        if (ranking[i] == coa_id)
            return static_cast<int>(i) + 1;
    throw NotFound(fmt::format("CoA '{}' is not ranked", coa_id));
}

DecisionMatrix build_decision_matrix(const std::vector<CoaResult>& results, const Weights& weights)
{
    if (results.empty())
        throw ContractViolation("decision matrix needs at least one result");
    validate_weights(weights);
    DecisionMatrix m;
    m.criteria.assign(kCriteria.begin(), kCriteria.end());
    std::set<std::string> seen;
    for (const auto& r : results) {
        if (!seen.insert(r.coa.id).second)
            throw ContractViolation(fmt::format("duplicate CoA id '{}'", r.coa.id));
        m.coas.push_back(r.coa.id);
        std::array<double, kCriterionCount> row{};
        for (std::size_t c = 0; c < kCriterionCount; ++c)
            row[c] = criterion_value(r.stats, kCriteria[c]);
        m.raw.push_back(row);
    }
    m.normalized.resize(m.raw.size());
    for (std::size_t c = 0; c < kCriterionCount; ++c) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& row : m.raw) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        for (std::size_t i = 0; i < m.raw.size(); ++i) {
            double v = hi > lo ? (m.raw[i][c] - lo) / (hi - lo) : 1.0;
            if (hi > lo && !maximized(kCriteria[c]))
                v = 1.0 - v;
            m.normalized[i][c] = v;
        }
    }
    return reweight(m, weights);
}

DecisionMatrix reweight(const DecisionMatrix& matrix, const Weights& weights)
{
    validate_weights(weights);
    DecisionMatrix m = matrix;
    m.weights = weights;
    m.totals = weighted_totals(m, weights);
    m.ranking = rank_by_total(m.coas, m.totals);
    return m;
}

std::vector<SensitivityCase> sensitivity(const DecisionMatrix& matrix, std::string_view coa_id)
{
    const int base = matrix.rank(coa_id);
    std::vector<SensitivityCase> out;
    for (std::size_t c = 0; c < kCriterionCount; ++c)
        for (double delta : {kPerturbation, -kPerturbation}) {
            const Weights w = perturbed(matrix.weights, c, delta);
            const auto ranking = rank_by_total(matrix.coas, weighted_totals(matrix, w));
            const int r = static_cast<int>(std::find(ranking.begin(), ranking.end(), coa_id) - ranking.begin()) + 1;
            out.push_back({kCriteria[c], delta, r != base, r});
        }
    return out;
}

Explanation explain(const CourseOfAction& coa, const WargameStats& stats,
    const std::vector<std::vector<Event>>& traces, const EnemySituationMap& esm, const GridMap& map)
{
    if (stats.per_phase.empty())
        throw ContractViolation(fmt::format("no per-phase statistics for {}", coa.id));
    Explanation e;
    e.coa_id = coa.id;
    e.verdict = fmt::format(
        "{}: success probability {:.3f} (reliability {:.3f}), friendly loss {:.1f}%, enemy attrition {:.1f}%, "
        "mean duration {:.1f} ticks over {} replications",
        coa.id, stats.success_probability, stats.reliability, 100 * stats.friendly_loss_rate,
        100 * stats.enemy_attrition_rate, stats.mean_duration, stats.replications);

    for (const auto& p : stats.per_phase) {
        PhaseFinding f;
        f.phase = p.phase;
        f.friendly_delta = p.friendly_cp_delta;
        f.enemy_delta = p.enemy_cp_delta;
        // A phase without friendly losses counts as an advantage even when
        // nothing was engaged.
        f.kind = std::abs(p.enemy_cp_delta) > std::abs(p.friendly_cp_delta) || p.friendly_cp_delta == 0.0
            ? FindingKind::advantage
            : FindingKind::disadvantage;
        f.narrative = fmt::format("Phase {}: {} - mean CP change friendly {:+.2f}, enemy {:+.2f} over {} replications",
            p.phase, to_string(f.kind), p.friendly_cp_delta, p.enemy_cp_delta, stats.replications);
        if (p.phase > 0 && !traces.empty()) {
            for (const auto& ev : traces.front())
                if (ev.kind == EventKind::phase_advance && ev.detail.size() >= 2 && ev.detail[1] == 0.0
                    && static_cast<int>(ev.detail[0]) == p.phase) {
                    f.narrative += fmt::format("; began at tick {} in the sample run", ev.tick);
                    break;
                }
        }
        e.per_phase.push_back(std::move(f));
    }

    std::vector<Coord> cells;
    for (const auto& phase : coa.phases)
        for (const auto& t : phase.tasks)
            cells.insert(cells.end(), t.route.begin(), t.route.end());
    for (const auto& entry : esm.units) {
        if (entry.provenance != Provenance::inferred || cells.empty())
            continue;
        int d = std::numeric_limits<int>::max();
        for (Coord c : cells)
            d = std::min(d, map.distance(entry.unit.position, c));
        if (d <= kAssumptionRadius)
            e.assumptions.push_back({entry.unit.id, entry.unit.role, entry.unit.position, entry.confidence, d});
    }
    return e;
}

Selection select_coa(
    const DecisionMatrix& matrix, const std::vector<CoaResult>& results, const EnemySituationMap& esm, const GridMap& map)
{
    Selection sel;
    sel.ranking = matrix.ranking;
    sel.recommended = matrix.ranking.front();
    const std::size_t top = matrix.row(sel.recommended);
    std::string tied_with;
    if (matrix.ranking.size() > 1) {
        const std::size_t second = matrix.row(matrix.ranking[1]);
        if (matrix.totals[top] == matrix.totals[second]) {
            sel.tie = true;
            tied_with = matrix.ranking[1];
        }
    }
    for (const auto& id : matrix.ranking) {
        const auto it = std::find_if(results.begin(), results.end(), [&](const CoaResult& r) { return r.coa.id == id; });
        if (it == results.end())
            throw NotFound(fmt::format("no wargame result for {}", id));
        Explanation e = explain(it->coa, it->stats, it->traces, esm, map);
        e.sensitivity = sensitivity(matrix, id);
        e.weight_sensitive =
            std::any_of(e.sensitivity.begin(), e.sensitivity.end(), [](const SensitivityCase& s) { return s.flips; });
        const int rank = matrix.rank(id);
        const double total = matrix.totals[matrix.row(id)];
        std::string head;
        if (rank == 1) {
            head = fmt::format("Recommended (weighted total {:.4f})", total);
            if (sel.tie)
                head += fmt::format("; tied with {} on total, lower id preferred", tied_with);
        } else {
            head = fmt::format("Rank {} of {} (weighted total {:.4f})", rank, matrix.ranking.size(), total);
        }
        if (e.weight_sensitive) {
            const auto& s = *std::find_if(
                e.sensitivity.begin(), e.sensitivity.end(), [](const SensitivityCase& c) { return c.flips; });
            head += fmt::format("; weight-sensitive: {} weight {:+.1f} moves it to rank {}", to_string(s.criterion),
                s.perturbation, s.rank);
        }
        e.verdict = head + ". " + e.verdict;
        sel.explanations.push_back(std::move(e));
    }
    return sel;
}

} // namespace coaforge
