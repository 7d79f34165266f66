#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coaforge/errors.hpp"
#include "coaforge/ipb.hpp"
#include "coaforge/mission.hpp"
#include "coaforge/plan.hpp"
#include "coaforge/scenario.hpp"

namespace coaforge {

struct ScreeningCheck {
    std::string name; // suitability, feasibility, acceptability, distinguishability
    bool passed = false;
    std::string detail;

    friend bool operator==(const ScreeningCheck&, const ScreeningCheck&) = default;
};

struct FeasibilityVerdict {
    bool feasible = false;
    std::vector<ScreeningCheck> checks;

    const ScreeningCheck* check(std::string_view name) const;

    friend bool operator==(const FeasibilityVerdict&, const FeasibilityVerdict&) = default;
};

struct CoaGenOptions {
    double force_ratio_threshold = 1.5;
    double loss_cap = 0.4;
    int screening_replications = 50;
    std::uint64_t seed = 1;
    double max_overlap = 0.5;
};

/// One point of the candidate space: an avenue per maneuver unit (index
/// into terrain.avenues()), the main-effort unit, and the phasing scheme.
struct CandidateSpec {
    std::map<std::string, std::size_t> avenue;
    std::string main_effort;
    bool two_phase = false;

    friend bool operator==(const CandidateSpec&, const CandidateSpec&) = default;
};

/// Maneuver units that have at least one avenue of their role, in scenario order.
std::vector<std::string> assignable_units(const TerrainAnalysisMap& terrain, const Scenario& scenario);

/// Candidate space in enumeration order: units vary slowest-first in
/// scenario order over their role's avenues, then main effort, then phasing.
std::vector<CandidateSpec> enumerate_candidates(const TerrainAnalysisMap& terrain, const Scenario& scenario);

/// Builds the plan for one candidate with id "COA-<index>", or nullopt when
/// route deconfliction leaves a unit without a route.
std::optional<CourseOfAction> build_candidate(const CandidateSpec& spec, std::size_t index,
    const MissionAnalysis& mission, const TerrainAnalysisMap& terrain, const EnemySituationMap& esm,
    const Scenario& scenario);

/// min(force ratio at the objectives, 5) minus the fraction of route cells
/// within 2 cells of an enemy unit.
double candidate_score(const CourseOfAction& coa, const EnemySituationMap& esm, const Scenario& scenario);

/// Runs all four checks. Distinguishability compares the main-effort route
/// against each CoA in `accepted`.
FeasibilityVerdict screen_coa(const CourseOfAction& coa, const MissionAnalysis& mission,
    const EnemySituationMap& esm, const Scenario& scenario, const std::vector<CourseOfAction>& accepted = {},
    const CoaGenOptions& options = {});

/// Per-unit corridors: each route dilated by one cell within the AO, plus
/// the route itself; contested cells go to the closer route, ties to the
/// lower unit id. Throws PlanningError "indistinct axes; regenerate CoA"
/// when two units share a route.
CourseOfAction assign_boundaries(const CourseOfAction& coa, const Scenario& scenario);

/// Raised when no candidate passes screening; carries the checks of the
/// best-scoring infeasible candidate.
class NoFeasibleCoA : public PlanningError {
public:
    NoFeasibleCoA(std::string coa_id, FeasibilityVerdict verdict);
    const std::string& coa_id() const noexcept { return coa_id_; }
    const FeasibilityVerdict& verdict() const noexcept { return verdict_; }

private:
    std::string coa_id_;
    FeasibilityVerdict verdict_;
};

std::vector<CourseOfAction> generate_friendly_coas(const MissionAnalysis& mission, const TerrainAnalysisMap& terrain,
    const EnemySituationMap& esm, const Scenario& scenario, int k, const CoaGenOptions& options = {});

/// Main-effort route of a CoA (full route of the main-effort unit).
std::vector<Coord> main_effort_route(const CourseOfAction& coa);

} // namespace coaforge
