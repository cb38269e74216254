#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "chiloc/session/session.hpp"

namespace chiloc {

/// Thread-safe collection of live sessions.
///
/// Commands to one session run one at a time under that session's write lock. Readers
/// only touch the snapshot published after each command, so a slow command never
/// blocks state, suggestion or event reads.
class SessionRegistry {
public:
    struct Snapshot {
        std::string state;
        std::string suggestions;
        std::vector<nlohmann::json> events;
        bool closed = false;
    };

    /// Body: {"scenario": "builtin:<name>" | path | scenario object, "seed"?, "config"?, "objectives"?}.
    /// Throws std::invalid_argument for a bad body.
    std::string create(const nlohmann::json& body);

    /// Throws std::out_of_range for an unknown id, and forwards Session::tick errors.
    nlohmann::json command(const std::string& id, const nlohmann::json& command);

    std::shared_ptr<const Snapshot> snapshot(const std::string& id) const;

    /// Events with seq >= since, waiting up to `timeout` for at least one to appear.
    std::shared_ptr<const Snapshot> wait_events(const std::string& id, std::size_t since,
                                                std::chrono::milliseconds timeout) const;

    std::vector<std::string> ids() const;

private:
    struct Entry {
        std::mutex write;
        mutable std::mutex publish;
        mutable std::condition_variable changed;
        std::unique_ptr<Session> session;
        std::shared_ptr<const Snapshot> snap;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    static void publish(Entry& e);

    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
    std::uint64_t next_id_ = 1;
};

/// HTTP front end:
///   POST /sessions                       -> 201 {"id": ...}
///   GET  /sessions                       -> {"sessions": [...]}
///   GET  /sessions/{id}/state            -> canonical state (the save-file document)
///   POST /sessions/{id}/command          -> command delta
///   GET  /sessions/{id}/suggestions      -> suggestions for the head objective
///   GET  /sessions/{id}/events?since=n[&timeout_ms=t] -> long-poll {"events": [...], "next": m, "closed": b}
/// Errors are {"error": message} with 400 (bad input), 404 (unknown session) or 409 (closed).
class HttpServer {
public:
    HttpServer();
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port. Returns the port.
    int start(const std::string& host, int port);
    /// Blocks serving on the calling thread.
    bool listen(const std::string& host, int port);
    void stop();

    SessionRegistry& registry() { return registry_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SessionRegistry registry_;
};

}  // namespace chiloc
