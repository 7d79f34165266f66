#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "coaforge/ipb.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/wargame.hpp"

namespace coaforge {

enum class Criterion { success_probability, friendly_loss_rate, enemy_attrition_rate, mean_duration, reliability };

inline constexpr std::size_t kCriterionCount = 5;
inline constexpr std::array<Criterion, kCriterionCount> kCriteria{Criterion::success_probability,
    Criterion::friendly_loss_rate, Criterion::enemy_attrition_rate, Criterion::mean_duration, Criterion::reliability};

using Weights = std::array<double, kCriterionCount>;

bool maximized(Criterion c) noexcept;
std::string_view to_string(Criterion c) noexcept;
Criterion criterion_from_string(std::string_view s);
double criterion_value(const WargameStats& stats, Criterion c) noexcept;

/// 0.4 success, 0.2 loss, 0.2 attrition, 0.1 duration, 0.1 reliability.
Weights default_weights() noexcept;

/// Throws ContractViolation unless every weight is finite and >= 0 and the
/// sum is 1 within 1e-9.
void validate_weights(const Weights& w);

/// "w1,w2,w3,w4,w5" in criterion order. Throws ValidationError.
Weights parse_weights(std::string_view text);

struct CoaResult {
    CourseOfAction coa;
    WargameStats stats;
    std::vector<std::vector<Event>> traces; // sample replications, may be empty
};

struct DecisionMatrix {
    std::vector<std::string> coas;
    std::vector<Criterion> criteria;
    std::vector<std::array<double, kCriterionCount>> raw;
    std::vector<std::array<double, kCriterionCount>> normalized;
    Weights weights{};
    std::vector<double> totals;
    std::vector<std::string> ranking;

    /// Row of `coa_id`; throws NotFound.
    std::size_t row(std::string_view coa_id) const;
    /// 1-based rank of `coa_id`.
    int rank(std::string_view coa_id) const;

    friend bool operator==(const DecisionMatrix&, const DecisionMatrix&) = default;
};

/// Min-max normalization per criterion (constant column -> 1.0, minimized
/// criteria as 1 - minmax), weighted sum, ranking by total desc then id asc.
DecisionMatrix build_decision_matrix(const std::vector<CoaResult>& results, const Weights& weights);

/// Same matrix re-weighted.
DecisionMatrix reweight(const DecisionMatrix& matrix, const Weights& weights);

enum class FindingKind { advantage, disadvantage };

struct PhaseFinding {
    int phase = 0;
    FindingKind kind = FindingKind::advantage;
    double friendly_delta = 0.0;
    double enemy_delta = 0.0;
    std::string narrative;

    friend bool operator==(const PhaseFinding&, const PhaseFinding&) = default;
};

struct Assumption {
    std::string unit_id;
    Role role = Role::infantry;
    Coord position;
    double confidence = 0.0;
    int distance = 0; // cells to the nearest route cell

    friend bool operator==(const Assumption&, const Assumption&) = default;
};

struct SensitivityCase {
    Criterion criterion = Criterion::success_probability;
    double perturbation = 0.0; // +0.1 or -0.1 before renormalization
    bool flips = false;        // this CoA's rank changes
    int rank = 0;              // rank under the perturbed weights

    friend bool operator==(const SensitivityCase&, const SensitivityCase&) = default;
};

struct Explanation {
    std::string coa_id;
    std::string verdict;
    std::vector<PhaseFinding> per_phase;
    std::vector<Assumption> assumptions;
    std::vector<SensitivityCase> sensitivity;
    bool weight_sensitive = false;

    friend bool operator==(const Explanation&, const Explanation&) = default;
};

/// Phase findings from the per-phase means, assumptions from inferred units
/// within 2 cells of the CoA's routes. Sensitivity is filled by select_coa.
Explanation explain(const CourseOfAction& coa, const WargameStats& stats, const std::vector<std::vector<Event>>& traces,
    const EnemySituationMap& esm, const GridMap& map);

/// Re-ranks under each single-criterion +-0.1 weight perturbation
/// (clamped at 0, renormalized).
std::vector<SensitivityCase> sensitivity(const DecisionMatrix& matrix, std::string_view coa_id);

struct Selection {
    std::string recommended;
    std::vector<std::string> ranking;
    std::vector<Explanation> explanations; // in ranking order
    bool tie = false;

    friend bool operator==(const Selection&, const Selection&) = default;
};

Selection select_coa(
    const DecisionMatrix& matrix, const std::vector<CoaResult>& results, const EnemySituationMap& esm, const GridMap& map);

std::string_view to_string(FindingKind k) noexcept;

} // namespace coaforge
