#pragma once

#include <memory>
#include <string>

#include "coaforge/session.hpp"

namespace coaforge {

/// JSON-over-HTTP front end for a SessionStore:
///
///   POST /sessions                      {scenario, opord, config?} -> 201 {id, ...}
///   GET  /sessions                      -> [id, ...]
///   GET  /sessions/:id                  -> session state
///   GET  /sessions/:id/layers/:kind     -> text raster
///   GET  /sessions/:id/esm              -> enemy situation map
///   POST /sessions/:id/observations     observation -> {esm_version, status}
///   POST /sessions/:id/replan           config overrides -> report
///   GET  /sessions/:id/report           -> report (409 before the first plan)
///   POST /sessions/:id/select           {coa} -> {selected}
///
/// Errors are {"error", "details"[, "stage"]} with 400 for malformed input,
/// 404 for unknown ids, 409 for requests out of order and 422 when a
/// pipeline stage fails.
class ApiServer {
public:
    explicit ApiServer(SessionStore& store);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    bool serve();
    void stop();
    /// Blocks until the listener is accepting.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace coaforge
