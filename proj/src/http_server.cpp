#include "coaforge/http_server.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace coaforge {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const ordered_json& body)
{
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void fail(httplib::Response& res, int status, const std::string& message,
    const std::vector<std::string>& details = {})
{
    reply(res, status, {{"error", message}, {"details", details}});
}

json body_of(const httplib::Request& req)
{
    if (req.body.empty())
        return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ValidationError({fmt::format("request body: {}", e.what())});
    }
}

std::string document(const json& body, const char* key)
{
    if (!body.contains(key))
        throw ValidationError({fmt::format("{}: required", key)});
    const json& v = body[key];
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_object())
        return v.dump();
    throw ValidationError({fmt::format("{}: expected a document string or object", key)});
}

// Maps library exceptions onto status codes.
template <typename F>
httplib::Server::Handler guarded(F f)
{
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const StageError& e) {
            reply(res, 422, {{"error", e.what()}, {"stage", e.stage()}, {"details", e.details()}});
        } catch (const NotFound& e) {
            fail(res, 404, e.what());
        } catch (const ValidationError& e) {
            fail(res, 400, e.what(), e.issues());
        } catch (const ContractViolation& e) {
            fail(res, 409, e.what());
        } catch (const std::exception& e) {
            fail(res, 500, e.what());
        }
    };
}

} // namespace

struct ApiServer::Impl {
    SessionStore& store;
    httplib::Server server;

    explicit Impl(SessionStore& s) : store(s) { routes(); }

    void routes()
    {
        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = body_of(req);
            PlanningConfig config;
            if (body.contains("config"))
                config.apply(body["config"]);
            const std::string id = store.create(document(body, "scenario"), document(body, "opord"), config);
            reply(res, 201, store.with_session(id, [](PlanningSession& s) { return s.state_json(); }));
        }));
        server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, store.ids());
        }));
        server.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, store.with_session(req.path_params.at("id"), [](PlanningSession& s) { return s.state_json(); }));
        }));
        server.Get("/sessions/:id/layers/:kind", guarded([this](const httplib::Request& req, httplib::Response& res) {
            LayerKind kind;
            try {
                kind = layer_kind_from_string(req.path_params.at("kind"));
            } catch (const std::exception&) {
                throw NotFound(fmt::format("unknown layer '{}'", req.path_params.at("kind")));
            }
            const std::string raster = store.with_session(
                req.path_params.at("id"), [&](PlanningSession& s) { return layer_raster(s.terrain(), kind); });
            res.set_content(raster, "text/plain");
        }));
        server.Get("/sessions/:id/esm", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, store.with_session(req.path_params.at("id"), [](PlanningSession& s) { return to_json(s.esm()); }));
        }));
        server.Post("/sessions/:id/observations", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const Observation obs = observation_from_json(body_of(req));
            reply(res, 200, store.with_session(req.path_params.at("id"), [&](PlanningSession& s) {
                const int version = s.inject_observation(obs);
                return ordered_json{{"esm_version", version}, {"status", to_string(s.status())}};
            }));
        }));
        server.Post("/sessions/:id/replan", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json overrides = body_of(req);
            reply(res, 200, store.with_session(req.path_params.at("id"), [&](PlanningSession& s) {
                return to_json(s.replan(overrides));
            }));
        }));
        server.Get("/sessions/:id/report", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, store.with_session(req.path_params.at("id"), [](PlanningSession& s) {
                if (!s.report())
                    throw ContractViolation(fmt::format("session {} has not been planned yet", s.id()));
                ordered_json j = to_json(*s.report());
                j["status"] = to_string(s.status());
                return j;
            }));
        }));
        server.Post("/sessions/:id/select", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = body_of(req);
            if (!body.contains("coa") || !body["coa"].is_string())
                throw ValidationError({"coa: required string"});
            const std::string coa = body["coa"].get<std::string>();
            reply(res, 200, store.with_session(req.path_params.at("id"), [&](PlanningSession& s) {
                s.select(coa);
                return ordered_json{{"selected", coa}};
            }));
        }));
    }
};

ApiServer::ApiServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}

ApiServer::~ApiServer()
{
    stop();
}

int ApiServer::bind(const std::string& host, int port)
{
    if (port == 0)
        return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::serve()
{
    return impl_->server.listen_after_bind();
}

void ApiServer::stop()
{
    impl_->server.stop();
}

void ApiServer::wait_until_ready() const
{
    impl_->server.wait_until_ready();
}

} // namespace coaforge
