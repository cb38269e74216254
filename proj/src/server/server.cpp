#include "chiloc/server/server.hpp"

#include <thread>

#include <httplib.h>

namespace chiloc {

using nlohmann::json;

std::string SessionRegistry::create(const json& body) {
    if (!body.is_null() && !body.is_object()) throw std::invalid_argument("session request must be a JSON object");
    const json b = body.is_null() ? json::object() : body;
    for (const auto& [k, v] : b.items()) {
        if (k != "scenario" && k != "seed" && k != "config" && k != "objectives") {
            throw std::invalid_argument("unknown session request field '" + k + "'");
        }
    }
    std::uint64_t seed = 1;
    if (b.contains("seed")) {
        if (!b["seed"].is_number_unsigned()) throw std::invalid_argument("seed must be a non-negative integer");
        seed = b["seed"].get<std::uint64_t>();
    }
    Scenario scenario;
    const json sc = b.value("scenario", json("builtin:office17"));
    if (sc.is_string()) {
        scenario = resolve_scenario(sc.get<std::string>(), seed);
    } else {
        scenario = scenario_from_json(sc);
    }
    const SessionConfig config = session_config_from_json(b.value("config", json(nullptr)));

    auto entry = std::make_shared<Entry>();
    entry->session = std::make_unique<Session>(std::move(scenario), config, seed);
    if (b.contains("objectives")) entry->session->tick({{"type", "set_objectives"}, {"objectives", b["objectives"]}});
    publish(*entry);

    std::lock_guard lock(mutex_);
    const std::string id = std::to_string(next_id_++);
    entries_[id] = std::move(entry);
    return id;
}

std::shared_ptr<SessionRegistry::Entry> SessionRegistry::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw std::out_of_range("no session '" + id + "'");
    return it->second;
}

void SessionRegistry::publish(Entry& e) {
    auto snap = std::make_shared<Snapshot>();
    const json state = e.session->state_json();
    snap->state = state.dump();
    snap->suggestions = e.session->suggestions_json().dump();
    for (const auto& ev : state["events"]) snap->events.push_back(ev);
    snap->closed = e.session->closed();
    {
        std::lock_guard lock(e.publish);
        e.snap = std::move(snap);
    }
    e.changed.notify_all();
}

json SessionRegistry::command(const std::string& id, const json& command) {
    auto e = find(id);
    std::lock_guard lock(e->write);
    json delta = e->session->tick(command);
    publish(*e);
    return delta;
}

std::shared_ptr<const SessionRegistry::Snapshot> SessionRegistry::snapshot(const std::string& id) const {
    auto e = find(id);
    std::lock_guard lock(e->publish);
    return e->snap;
}

std::shared_ptr<const SessionRegistry::Snapshot> SessionRegistry::wait_events(const std::string& id, std::size_t since,
                                                                              std::chrono::milliseconds timeout) const {
    auto e = find(id);
    std::unique_lock lock(e->publish);
    e->changed.wait_for(lock, timeout, [&] { return e->snap->events.size() > since || e->snap->closed; });
    return e->snap;
}

std::vector<std::string> SessionRegistry::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, e] : entries_) out.push_back(id);
    return out;
}

struct HttpServer::Impl {
    httplib::Server http;
    std::thread thread;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json(nullptr);
    return json::parse(req.body);
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const json::parse_error& e) {
        send_error(res, 400, std::string("invalid JSON: ") + e.what());
    } catch (const SessionClosedError& e) {
        send_error(res, 409, e.what());
    } catch (const std::out_of_range& e) {
        send_error(res, 404, e.what());
    } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

}  // namespace

HttpServer::HttpServer() : impl_(std::make_unique<Impl>()) {
    auto& http = impl_->http;
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, {{"id", registry_.create(parse_body(req))}}); });
    });
    http.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, {{"sessions", registry_.ids()}}); });
    });
    http.Get(R"(/sessions/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto snap = registry_.snapshot(req.matches[1]);
            res.set_content(snap->state, "application/json");
        });
    });
    http.Get(R"(/sessions/([^/]+)/suggestions)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto snap = registry_.snapshot(req.matches[1]);
            res.set_content(snap->suggestions, "application/json");
        });
    });
    http.Post(R"(/sessions/([^/]+)/command)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, registry_.command(req.matches[1], parse_body(req))); });
    });
    http.Get(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            std::size_t since = 0;
            long timeout_ms = 0;
            try {
                if (req.has_param("since")) since = std::stoul(req.get_param_value("since"));
                if (req.has_param("timeout_ms")) timeout_ms = std::stol(req.get_param_value("timeout_ms"));
            } catch (const std::exception&) {
                throw std::invalid_argument("since and timeout_ms must be integers");
            }
            if (timeout_ms < 0 || timeout_ms > 60000) throw std::invalid_argument("timeout_ms must lie in [0, 60000]");
            auto snap = registry_.wait_events(req.matches[1], since, std::chrono::milliseconds(timeout_ms));
            json events = json::array();
            for (std::size_t i = since; i < snap->events.size(); ++i) events.push_back(snap->events[i]);
            send_json(res, 200, {{"events", events}, {"next", snap->events.size()}, {"closed", snap->closed}});
        });
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
    return bound;
}

bool HttpServer::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

void HttpServer::stop() {
    if (!impl_) return;
    impl_->http.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace chiloc
