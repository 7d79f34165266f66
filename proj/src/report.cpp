#include "coaforge/report.hpp"

#include <fmt/format.h>

#include "coaforge/errors.hpp"
#include "coaforge/scenario_io.hpp"

namespace coaforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string joined(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (const auto& p : parts)
        out += (out.empty() ? "" : std::string(sep)) + p;
    return out;
}

std::vector<std::string> texts(const std::vector<Task>& tasks)
{
    std::vector<std::string> out;
    for (const auto& t : tasks)
        out.push_back(t.text);
    return out;
}

ordered_json route_json(const std::vector<Coord>& cells)
{
    ordered_json a = ordered_json::array();
    for (Coord c : cells)
        a.push_back(to_json(c));
    return a;
}

ordered_json enemy_coa_json(const EnemyCoA& e)
{
    return {{"id", e.plan.id}, {"archetype", to_string(e.archetype)}, {"likelihood", e.likelihood},
        {"threat", e.threat}, {"score", e.score}, {"terrain_fit", e.terrain_fit}, {"posture_fit", e.posture_fit},
        {"summary", e.plan.summary}};
}

} // namespace

ordered_json PlanningConfig::to_json() const
{
    return {{"k", k}, {"replications", replications}, {"seed", seed},
        {"weights", ordered_json(std::vector<double>(weights.begin(), weights.end()))}, {"enemy_k", enemy_k}};
}

void PlanningConfig::apply(const json& j)
{
    std::vector<std::string> issues;
    if (!j.is_object())
        throw ValidationError({"config: expected an object"});
    PlanningConfig next = *this;
    auto positive = [&](const char* key, int& out) {
        if (!j.contains(key))
            return;
        if (!j[key].is_number_integer() || j[key].get<long long>() < 1)
            issues.push_back(fmt::format("config.{}: expected a positive integer", key));
        else
            out = j[key].get<int>();
    };
    positive("k", next.k);
    positive("replications", next.replications);
    positive("enemy_k", next.enemy_k);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            issues.push_back("config.seed: expected a non-negative integer");
        else
            next.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        if (w.is_string()) {
            try {
                next.weights = parse_weights(w.get<std::string>());
            } catch (const ValidationError& e) {
                for (const auto& i : e.issues())
                    issues.push_back("config.weights: " + i);
            }
        } else if (w.is_array() && w.size() == kCriterionCount) {
            Weights parsed{};
            bool ok = true;
            for (std::size_t i = 0; i < kCriterionCount; ++i) {
                if (!w[i].is_number())
                    ok = false;
                else
                    parsed[i] = w[i].get<double>();
            }
            try {
                if (!ok)
                    throw ContractViolation("weights must be numbers");
                validate_weights(parsed);
                next.weights = parsed;
            } catch (const ContractViolation& e) {
                issues.push_back(std::string("config.weights: ") + e.what());
            }
        } else {
            issues.push_back("config.weights: expected 5 numbers");
        }
    }
    for (const auto& [key, _] : j.items())
        if (key != "k" && key != "replications" && key != "enemy_k" && key != "seed" && key != "weights")
            issues.push_back(fmt::format("config.{}: unknown key", key));
    if (!issues.empty())
        throw ValidationError(issues);
    *this = next;
}

ordered_json to_json(const Task& t)
{
    return {{"verb", to_string(t.verb)}, {"object", t.object}, {"function", to_string(t.function)},
        {"source", to_string(t.source)}, {"text", t.text}, {"reference", t.reference}};
}

ordered_json to_json(const CourseOfAction& coa)
{
    ordered_json phases = ordered_json::array();
    for (const auto& p : coa.phases) {
        ordered_json tasks = ordered_json::array();
        for (const auto& t : p.tasks) {
            ordered_json jt = {{"unit", t.unit_id}, {"task", to_json(t.task)}, {"route", route_json(t.route)},
                {"target", t.target}};
            jt["posture"] = t.posture ? ordered_json(to_string(*t.posture)) : ordered_json(nullptr);
            tasks.push_back(jt);
        }
        phases.push_back({{"index", p.index}, {"tasks", tasks}});
    }
    ordered_json sync = ordered_json::array();
    for (const auto& s : coa.synchronization)
        sync.push_back(
            {{"phase", s.phase}, {"trigger", to_string(s.trigger)}, {"tick", s.tick}, {"objective", s.objective}});
    ordered_json bounds = ordered_json::object();
    for (const auto& [unit, zone] : coa.boundaries)
        bounds[unit] = to_json(zone);
    return {{"id", coa.id}, {"side", to_string(coa.side)}, {"main_effort", coa.main_effort},
        {"summary", coa.summary}, {"required_objectives", coa.required_objectives}, {"phases", phases},
        {"synchronization", sync}, {"boundaries", bounds}};
}

ordered_json to_json(const WargameStats& s)
{
    ordered_json phases = ordered_json::array();
    for (const auto& p : s.per_phase)
        phases.push_back({{"phase", p.phase}, {"friendly_cp_delta", p.friendly_cp_delta},
            {"enemy_cp_delta", p.enemy_cp_delta}});
    return {{"replications", s.replications}, {"success_probability", s.success_probability},
        {"friendly_loss_rate", s.friendly_loss_rate}, {"enemy_attrition_rate", s.enemy_attrition_rate},
        {"mean_duration", s.mean_duration}, {"reliability", s.reliability}, {"per_phase", phases}};
}

ordered_json to_json(const Observation& o)
{
    ordered_json j = {{"time", o.time}, {"location", to_json(o.location)}, {"role", to_string(o.role_guess)},
        {"size", o.size_estimate}, {"confidence", o.confidence}, {"sensor", to_string(o.sensor)}};
    if (!o.unit_id.empty())
        j["unit_id"] = o.unit_id;
    if (o.posture)
        j["posture"] = to_string(*o.posture);
    return j;
}

Observation observation_from_json(const json& j)
{
    std::vector<std::string> issues;
    Observation o;
    if (!j.is_object())
        throw ValidationError({"observation: expected an object"});
    auto field = [&](const char* key) -> const json* {
        if (!j.contains(key)) {
            issues.push_back(fmt::format("observation.{}: required", key));
            return nullptr;
        }
        return &j[key];
    };
    if (j.contains("time")) {
        if (j["time"].is_number_integer())
            o.time = j["time"].get<int>();
        else
            issues.push_back("observation.time: expected an integer");
    }
    if (const json* loc = field("location")) {
        try {
            o.location = coord_from_json(*loc);
        } catch (const std::exception&) {
            issues.push_back("observation.location: expected [col, row]");
        }
    }
    auto enum_field = [&](const char* key, bool required, auto parse, auto& out) {
        if (!j.contains(key)) {
            if (required)
                issues.push_back(fmt::format("observation.{}: required", key));
            return;
        }
        if (!j[key].is_string()) {
            issues.push_back(fmt::format("observation.{}: expected a string", key));
            return;
        }
        try {
            out = parse(j[key].get<std::string>());
        } catch (const std::exception&) {
            issues.push_back(fmt::format("observation.{}: unknown value '{}'", key, j[key].get<std::string>()));
        }
    };
    enum_field("role", true, role_from_string, o.role_guess);
    enum_field("sensor", false, sensor_from_string, o.sensor);
    if (j.contains("posture")) {
        Posture p{};
        enum_field("posture", false, posture_from_string, p);
        o.posture = p;
    }
    if (const json* size = field("size")) {
        if (size->is_number())
            o.size_estimate = size->get<double>();
        else
            issues.push_back("observation.size: expected a number");
    }
    if (const json* conf = field("confidence")) {
        if (conf->is_number())
            o.confidence = conf->get<double>();
        else
            issues.push_back("observation.confidence: expected a number");
    }
    if (j.contains("unit_id")) {
        if (j["unit_id"].is_string())
            o.unit_id = j["unit_id"].get<std::string>();
        else
            issues.push_back("observation.unit_id: expected a string");
    }
    if (!issues.empty())
        throw ValidationError(issues);
    return o;
}

ordered_json to_json(const EnemySituationMap& esm)
{
    ordered_json units = ordered_json::array();
    for (const auto& e : esm.units) {
        ordered_json u = to_json(e.unit);
        u["provenance"] = to_string(e.provenance);
        u["confidence"] = e.confidence;
        u["template_entry"] = e.template_entry;
        units.push_back(u);
    }
    ordered_json obs = ordered_json::array();
    for (const auto& o : esm.observations)
        obs.push_back(to_json(o));
    return {{"version", esm.version}, {"basis", esm.basis}, {"observed", esm.count(Provenance::observed)},
        {"inferred", esm.count(Provenance::inferred)}, {"units", units}, {"observations", obs},
        {"diagnostics", esm.diagnostics}};
}

std::vector<std::pair<std::string, std::string>> mission_rows(const MissionAnalysis& m)
{
    return {{"Specified task", joined(texts(m.specified_tasks), "; ")}, {"Operation purpose", m.operation_purpose},
        {"Implied task", joined(texts(m.implied_tasks), "; ")}, {"Constraint", joined(m.constraints, "; ")},
        {"End-state", m.end_state}, {"Mission", m.mission_statement}};
}

ordered_json to_json(const MissionAnalysis& m)
{
    ordered_json spec = ordered_json::array(), implied = ordered_json::array();
    for (const auto& t : m.specified_tasks)
        spec.push_back(to_json(t));
    for (const auto& t : m.implied_tasks)
        implied.push_back(to_json(t));
    ordered_json rows = ordered_json::object();
    for (const auto& [label, value] : mission_rows(m))
        rows[label] = value;
    return {{"mission_statement", m.mission_statement}, {"rows", rows}, {"specified_tasks", spec},
        {"implied_tasks", implied}, {"constraints", m.constraints}, {"operation_purpose", m.operation_purpose},
        {"end_state", m.end_state}};
}

ordered_json to_json(const Explanation& e)
{
    ordered_json phases = ordered_json::array();
    for (const auto& f : e.per_phase)
        phases.push_back({{"phase", f.phase}, {"finding", to_string(f.kind)}, {"friendly_delta", f.friendly_delta},
            {"enemy_delta", f.enemy_delta}, {"narrative", f.narrative}});
    ordered_json assumptions = ordered_json::array();
    for (const auto& a : e.assumptions)
        assumptions.push_back({{"unit", a.unit_id}, {"role", to_string(a.role)}, {"position", to_json(a.position)},
            {"confidence", a.confidence}, {"distance", a.distance}});
    ordered_json sens = ordered_json::array();
    for (const auto& s : e.sensitivity)
        sens.push_back({{"criterion", to_string(s.criterion)}, {"perturbation", s.perturbation}, {"flips", s.flips},
            {"rank", s.rank}});
    return {{"coa", e.coa_id}, {"verdict", e.verdict}, {"weight_sensitive", e.weight_sensitive},
        {"per_phase", phases}, {"assumptions", assumptions}, {"sensitivity", sens}};
}

ordered_json to_json(const DecisionMatrix& m)
{
    ordered_json criteria = ordered_json::array();
    for (Criterion c : m.criteria)
        criteria.push_back({{"name", to_string(c)}, {"direction", maximized(c) ? "maximize" : "minimize"}});
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.coas.size(); ++i)
        rows.push_back({{"coa", m.coas[i]}, {"raw", ordered_json(std::vector<double>(m.raw[i].begin(), m.raw[i].end()))},
            {"normalized", ordered_json(std::vector<double>(m.normalized[i].begin(), m.normalized[i].end()))},
            {"total", m.totals[i]}});
    return {{"criteria", criteria},
        {"weights", ordered_json(std::vector<double>(m.weights.begin(), m.weights.end()))}, {"rows", rows},
        {"ranking", m.ranking}};
}

ordered_json to_json(const PlanningReport& r)
{
    ordered_json enemy = ordered_json::array();
    for (const auto& e : r.enemy_coas)
        enemy.push_back(enemy_coa_json(e));
    ordered_json coas = ordered_json::array();
    for (const auto& c : r.coas) {
        ordered_json j = {{"rank", c.rank}, {"id", c.coa.id}, {"total", c.total}, {"stats", to_json(c.stats)}};
        j["robustness"] = c.robustness ? to_json(*c.robustness) : ordered_json(nullptr);
        j["explanation"] = to_json(c.explanation);
        j["plan"] = to_json(c.coa);
        coas.push_back(j);
    }
    return {{"session", r.session_id}, {"esm_version", r.esm_version}, {"config", r.config.to_json()},
        {"inputs", {{"scenario_digest", r.scenario_digest}, {"opord_digest", r.opord_digest}}},
        {"mission", to_json(r.mission)},
        {"enemy", {{"observed", r.observed_enemy}, {"inferred", r.inferred_enemy}, {"coas", enemy}}},
        {"decision_matrix", to_json(r.matrix)}, {"coas", coas}, {"recommended", r.recommended}, {"tie", r.tie},
        {"diagnostics", r.diagnostics}};
}

std::string render_report_json(const PlanningReport& r)
{
    return to_json(r).dump(2) + "\n";
}

std::string render_report_text(const PlanningReport& r)
{
    std::string out;
    auto line = [&](const std::string& s) { out += s + "\n"; };
    line(fmt::format("PLANNING REPORT  session {}  enemy situation v{}", r.session_id, r.esm_version));
    line(fmt::format("config: k={} replications={} seed={} weights={:.3g},{:.3g},{:.3g},{:.3g},{:.3g} enemy_k={}",
        r.config.k, r.config.replications, r.config.seed, r.config.weights[0], r.config.weights[1],
        r.config.weights[2], r.config.weights[3], r.config.weights[4], r.config.enemy_k));
    line("");
    line("MISSION ANALYSIS");
    for (const auto& [label, value] : mission_rows(r.mission))
        line(fmt::format("  {:<18} {}", label, value.empty() ? "-" : value));
    line("");
    line(fmt::format("ENEMY  ({} observed, {} inferred units)", r.observed_enemy, r.inferred_enemy));
    for (std::size_t i = 0; i < r.enemy_coas.size(); ++i) {
        const auto& e = r.enemy_coas[i];
        line(fmt::format("  {}{:<28} likelihood {:.3f}  threat {:.3f}  {}", i == 0 ? "* " : "  ", e.plan.id,
            e.likelihood, e.threat, e.plan.summary));
    }
    line("");
    line("DECISION MATRIX");
    line(fmt::format("  {:<6}{:<14}{:>9}{:>9}{:>11}{:>10}{:>13}{:>9}", "rank", "coa", "success", "loss",
        "attrition", "duration", "reliability", "total"));
    for (const auto& c : r.coas)
        line(fmt::format("  {:<6}{:<14}{:>9.3f}{:>9.3f}{:>11.3f}{:>10.1f}{:>13.3f}{:>9.4f}", c.rank, c.coa.id,
            c.stats.success_probability, c.stats.friendly_loss_rate, c.stats.enemy_attrition_rate,
            c.stats.mean_duration, c.stats.reliability, c.total));
    line(fmt::format("  weights {:.3g} / {:.3g} / {:.3g} / {:.3g} / {:.3g}", r.matrix.weights[0], r.matrix.weights[1],
        r.matrix.weights[2], r.matrix.weights[3], r.matrix.weights[4]));
    line("");
    line(fmt::format("RECOMMENDATION  {}{}", r.recommended, r.tie ? "  (tie broken by id)" : ""));
    for (const auto& c : r.coas) {
        line("");
        line(fmt::format("{}  main effort {}", c.coa.id, c.coa.main_effort));
        line("  " + c.coa.summary);
        line("  " + c.explanation.verdict);
        if (c.robustness)
            line(fmt::format("  against {}: success {:.3f}, friendly loss {:.1f}%", r.enemy_coas[1].plan.id,
                c.robustness->success_probability, 100 * c.robustness->friendly_loss_rate));
        for (const auto& f : c.explanation.per_phase)
            line("  - " + f.narrative);
        for (const auto& a : c.explanation.assumptions)
            line(fmt::format("  assumes {} ({}) at {}, confidence {:.2f}", a.unit_id, to_string(a.role),
                to_string(a.position), a.confidence));
    }
    if (!r.diagnostics.empty()) {
        line("");
        line("DIAGNOSTICS");
        for (const auto& d : r.diagnostics)
            line("  " + d);
    }
    return out;
}

} // namespace coaforge
