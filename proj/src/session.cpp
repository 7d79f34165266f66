#include "coaforge/session.hpp"

#include <fstream>

#include <fmt/format.h>

#include "coaforge/coa_gen.hpp"
#include "coaforge/hash.hpp"
#include "coaforge/scenario_io.hpp"
#include "coaforge/wargame.hpp"

namespace coaforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string digest(const std::string& text)
{
    Fnv1a h;
    h.add(text);
    return h.hex();
}

// Runs one stage, mapping document and planning errors to StageError.
template <typename F>
auto stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const NoFeasibleCoA& e) {
        std::vector<std::string> details;
        for (const auto& c : e.verdict().checks)
            details.push_back(fmt::format("{} {}: {}", c.name, c.passed ? "passed" : "failed", c.detail));
        throw StageError(name, e.what(), details);
    } catch (const ValidationError& e) {
        throw StageError(name, e.what(), e.issues());
    } catch (const ParseError& e) {
        throw StageError(name, e.what(), {fmt::format("line {}", e.line())});
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

} // namespace

StageError::StageError(std::string stage, std::string message, std::vector<std::string> details)
    : PlanningError(fmt::format("{}: {}", stage, message)), stage_(std::move(stage)), details_(std::move(details))
{
}

std::string_view to_string(SessionStatus s) noexcept
{
    switch (s) {
    case SessionStatus::fresh: return "fresh";
    case SessionStatus::planned: return "planned";
    case SessionStatus::stale: return "stale";
    }
    return "?";
}

ordered_json SessionEvent::to_json() const
{
    return {{"seq", seq}, {"kind", kind}, {"esm_version", esm_version}, {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j)
{
    try {
        return {j.at("seq").get<int>(), j.at("kind").get<std::string>(), j.at("esm_version").get<int>(),
            j.at("payload")};
    } catch (const json::exception& e) {
        throw ValidationError({fmt::format("session event: {}", e.what())});
    }
}

PlanningSession PlanningSession::create(
    std::string id, std::string scenario_doc, std::string opord_doc, PlanningConfig config, EventSink sink)
{
    PlanningSession s;
    s.id_ = std::move(id);
    s.config_ = config;
    s.scenario_ = stage("load", [&] { return load_scenario(scenario_doc); });
    s.order_ = stage("parse", [&] { return parse_opord(opord_doc); });
    s.mission_ = stage("analyze_mission", [&] { return analyze_mission(s.order_, s.scenario_); });
    s.frame_ = stage("evaluate_battlespace", [&] { return evaluate_battlespace(s.scenario_); });
    s.terrain_ = stage("analyze_battlespace", [&] { return analyze_battlespace(s.scenario_, s.frame_); });
    s.esm_ = stage("assess_enemy_capability", [&] {
        return assess_enemy_capability(s.terrain_, s.scenario_.enemy_template, observations_from(s.scenario_));
    });
    s.scenario_doc_ = std::move(scenario_doc);
    s.opord_doc_ = std::move(opord_doc);
    s.sink_ = std::move(sink);
    s.append("created", {{"scenario", s.scenario_doc_}, {"opord", s.opord_doc_}, {"config", config.to_json()}});
    return s;
}

PlanningSession PlanningSession::replay(const std::string& id, const std::vector<SessionEvent>& history, EventSink sink)
{
    if (history.empty() || history.front().kind != "created")
        throw ValidationError({fmt::format("session {}: history must start with a created event", id)});
    const auto& p = history.front().payload;
    PlanningConfig config;
    config.apply(p.at("config"));
    PlanningSession s = create(id, p.at("scenario").get<std::string>(), p.at("opord").get<std::string>(), config);
    s.history_.clear();
    for (const auto& ev : history) {
        if (ev.kind == "observation") {
            s.do_inject(observation_from_json(ev.payload));
        } else if (ev.kind == "replan") {
            try {
                s.do_replan(ev.payload);
            } catch (const StageError&) {
                // last_error_ is set; the logged error event follows.
            }
        } else if (ev.kind == "select") {
            s.do_select(ev.payload.at("coa").get<std::string>());
        }
        s.history_.push_back(ev);
    }
    s.sink_ = std::move(sink);
    return s;
}

void PlanningSession::append(std::string kind, json payload)
{
    SessionEvent ev{static_cast<int>(history_.size()) + 1, std::move(kind), esm_.version, std::move(payload)};
    history_.push_back(ev);
    if (sink_)
        sink_(ev);
}

std::vector<Observation> PlanningSession::all_observations() const
{
    auto obs = observations_from(scenario_);
    obs.insert(obs.end(), injected_.begin(), injected_.end());
    return obs;
}

int PlanningSession::inject_observation(const Observation& obs)
{
    do_inject(obs);
    append("observation", to_json(obs));
    return esm_.version;
}

void PlanningSession::do_inject(const Observation& obs)
{
    auto extended = injected_;
    extended.push_back(obs);
    auto all = observations_from(scenario_);
    all.insert(all.end(), extended.begin(), extended.end());
    // Throws ValidationError (outside the AI, bad confidence) without
    // touching the session.
    esm_ = assess_enemy_capability(terrain_, scenario_.enemy_template, all, &esm_);
    injected_ = std::move(extended);
    status_ = SessionStatus::stale;
}

const PlanningReport& PlanningSession::replan(const json& overrides)
{
    PlanningConfig probe = config_;
    probe.apply(overrides); // reject bad overrides before logging
    append("replan", overrides);
    try {
        do_replan(overrides);
    } catch (const StageError&) {
        append("error", json(*last_error_));
        throw;
    }
    return *report_;
}

const PlanningSession::CachedRun& PlanningSession::evaluate(const CourseOfAction& coa, const EnemyCoA& enemy)
{
    CacheKey key{esm_.version, coa.id, enemy.plan.id, config_.replications, config_.seed};
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        ++cache_hits_;
        return it->second;
    }
    ++cache_misses_;
    CachedRun run;
    run.stats = monte_carlo_evaluate(scenario_, coa, enemy, config_.replications, config_.seed);
    run.trace = simulate(scenario_, coa, enemy, hash64(config_.seed, 0)).state.event_log;
    return cache_.emplace(key, std::move(run)).first->second;
}

void PlanningSession::do_replan(const json& overrides)
{
    try {
        plan(overrides);
    } catch (const StageError& e) {
        last_error_ = ordered_json{{"stage", e.stage()}, {"message", e.what()}, {"details", e.details()}};
        throw;
    }
}

void PlanningSession::plan(const json& overrides)
{
    PlanningConfig config = config_;
    config.apply(overrides);
    config_ = config;

    auto enemy = stage("generate_enemy_coas", [&] {
        return generate_enemy_coas(esm_, terrain_, scenario_, config_.enemy_k, {50, config_.seed});
    });
    auto coas = stage("generate_friendly_coas",
        [&] { return generate_friendly_coas(mission_, terrain_, esm_, scenario_, config_.k); });

    std::vector<CoaResult> results;
    std::vector<std::optional<WargameStats>> robustness;
    stage("monte_carlo_evaluate", [&] {
        for (const auto& coa : coas) {
            const auto& run = evaluate(coa, enemy.coas.front());
            results.push_back({coa, run.stats, {run.trace}});
            robustness.push_back(
                enemy.coas.size() > 1 ? std::optional(evaluate(coa, enemy.coas[1]).stats) : std::nullopt);
        }
        return 0;
    });
    const auto matrix = stage("build_decision_matrix", [&] { return build_decision_matrix(results, config_.weights); });
    const auto selection = stage("select_coa", [&] { return select_coa(matrix, results, esm_, scenario_.map); });

    PlanningReport r;
    r.session_id = id_;
    r.esm_version = esm_.version;
    r.config = config_;
    r.scenario_digest = digest(scenario_doc_);
    r.opord_digest = digest(opord_doc_);
    r.mission = mission_;
    r.enemy_coas = enemy.coas;
    r.observed_enemy = esm_.count(Provenance::observed);
    r.inferred_enemy = esm_.count(Provenance::inferred);
    r.matrix = matrix;
    r.recommended = selection.recommended;
    r.tie = selection.tie;
    for (const auto& e : selection.explanations) {
        const std::size_t i = matrix.row(e.coa_id);
        r.coas.push_back({matrix.rank(e.coa_id), matrix.totals[i], results[i].coa, results[i].stats, robustness[i], e});
    }
    r.diagnostics = esm_.diagnostics;
    r.diagnostics.insert(r.diagnostics.end(), enemy.diagnostics.begin(), enemy.diagnostics.end());

    report_ = std::move(r);
    last_error_.reset();
    status_ = SessionStatus::planned;
}

void PlanningSession::select(const std::string& coa_id)
{
    do_select(coa_id);
    append("select", {{"coa", coa_id}});
}

void PlanningSession::do_select(const std::string& coa_id)
{
    if (!report_)
        throw ContractViolation(fmt::format("session {} has no plan to select from", id_));
    const auto& coas = report_->coas;
    if (std::none_of(coas.begin(), coas.end(), [&](const RankedCoa& c) { return c.coa.id == coa_id; }))
        throw NotFound(fmt::format("CoA '{}' is not in the current report", coa_id));
    selected_ = coa_id;
}

ordered_json PlanningSession::state_json() const
{
    ordered_json history = ordered_json::array();
    for (const auto& ev : history_)
        history.push_back({{"seq", ev.seq}, {"kind", ev.kind}, {"esm_version", ev.esm_version}});
    ordered_json j = {{"id", id_}, {"status", to_string(status_)}, {"scenario", scenario_.metadata.name},
        {"mission_statement", mission_.mission_statement}, {"esm_version", esm_.version},
        {"config", config_.to_json()}, {"history", history}};
    j["recommended"] = report_ ? ordered_json(report_->recommended) : ordered_json(nullptr);
    j["selected"] = selected_ ? ordered_json(*selected_) : ordered_json(nullptr);
    j["last_error"] = last_error_ ? *last_error_ : ordered_json(nullptr);
    return j;
}

PlanningReport run_pipeline(
    const std::string& scenario_doc, const std::string& opord_doc, const PlanningConfig& config, const std::string& id)
{
    auto s = PlanningSession::create(id, scenario_doc, opord_doc, config);
    return s.replan();
}

std::string derived_session_id(const std::string& scenario_doc, const std::string& opord_doc)
{
    Fnv1a h;
    h.add(scenario_doc);
    h.add(opord_doc);
    return "P-" + h.hex().substr(0, 12);
}

// Store ------------------------------------------------------------------------

std::vector<SessionEvent> read_event_log(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw NotFound(fmt::format("no event log at {}", file.string()));
    std::vector<SessionEvent> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        try {
            out.push_back(SessionEvent::from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ValidationError({fmt::format("{} line {}: {}", file.string(), n, e.what())});
        }
    }
    return out;
}

SessionStore::SessionStore(std::optional<std::filesystem::path> dir) : dir_(std::move(dir))
{
    if (!dir_)
        return;
    std::filesystem::create_directories(*dir_);
    std::vector<std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(*dir_))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "events.jsonl"))
            found.push_back(entry.path());
    std::sort(found.begin(), found.end());
    for (const auto& path : found) {
        const std::string id = path.filename().string();
        auto e = std::make_shared<Entry>();
        e->session = std::make_unique<PlanningSession>(
            PlanningSession::replay(id, read_event_log(path / "events.jsonl"), sink_for(id)));
        sessions_[id] = e;
        if (id.rfind("S-", 0) == 0)
            next_ = std::max(next_, std::atoi(id.c_str() + 2) + 1);
    }
}

PlanningSession::EventSink SessionStore::sink_for(const std::string& id) const
{
    if (!dir_)
        return {};
    const auto file = *dir_ / id / "events.jsonl";
    return [file](const SessionEvent& ev) {
        std::filesystem::create_directories(file.parent_path());
        std::ofstream out(file, std::ios::app);
        out << ev.to_json().dump() << '\n';
        if (!out)
            throw std::runtime_error(fmt::format("cannot append to {}", file.string()));
    };
}

std::string SessionStore::create(
    const std::string& scenario_doc, const std::string& opord_doc, const PlanningConfig& config,
    std::optional<std::string> id)
{
    std::string sid;
    {
        std::lock_guard lock(mutex_);
        if (id) {
            if (sessions_.count(*id))
                throw ContractViolation(fmt::format("session {} already exists", *id));
            sid = *id;
        } else {
            do
                sid = fmt::format("S-{:04}", next_++);
            while (sessions_.count(sid));
        }
    }
    // Analysis runs outside the store lock.
    auto session = PlanningSession::create(sid, scenario_doc, opord_doc, config, sink_for(sid));
    auto e = std::make_shared<Entry>();
    e->session = std::make_unique<PlanningSession>(std::move(session));
    std::lock_guard lock(mutex_);
    if (!sessions_.emplace(sid, e).second)
        throw ContractViolation(fmt::format("session {} already exists", sid));
    return sid;
}

bool SessionStore::contains(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    return sessions_.count(id) > 0;
}

std::vector<std::string> SessionStore::ids() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_)
        out.push_back(id);
    return out;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw NotFound(fmt::format("unknown session '{}'", id));
    return it->second;
}

} // namespace coaforge
