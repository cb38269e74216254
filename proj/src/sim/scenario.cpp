#include "chiloc/sim/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "chiloc/core/sectors.hpp"

namespace chiloc {

using nlohmann::json;

std::map<ApId, Point2> Scenario::ap_positions() const {
    std::map<ApId, Point2> out;
    for (const auto& ap : floor.aps) out.emplace(ap.id, ap.position);
    return out;
}

std::map<ApId, std::vector<ApId>> Scenario::adjacency() const {
    std::map<ApId, std::vector<ApId>> adj;
    for (const auto& ap : floor.aps) adj[ap.id];
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& [id, nb] : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

bool trajectory_graph_connected(const Scenario& s) {
    if (s.floor.aps.empty()) return true;
    const auto adj = s.adjacency();
    std::set<ApId> seen{s.floor.aps.front().id};
    std::vector<ApId> stack{s.floor.aps.front().id};
    while (!stack.empty()) {
        const ApId x = stack.back();
        stack.pop_back();
        for (ApId y : adj.at(x)) {
            if (seen.insert(y).second) stack.push_back(y);
        }
    }
    return seen.size() == s.floor.aps.size();
}

namespace {

ApPair ordered(ApId a, ApId b) { return a < b ? ApPair{a, b} : ApPair{b, a}; }

// Sector edges with probability `prob`, then nearest-neighbour links for isolated APs.
std::vector<ApPair> build_sector_graph(const std::vector<AccessPoint>& aps, double prob, double range, Rng& rng) {
    std::set<ApPair> edges;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& ap : aps) {
        std::array<const AccessPoint*, kSectorCount> nearest{};
        std::array<double, kSectorCount> best{};
        best.fill(std::numeric_limits<double>::infinity());
        for (const auto& other : aps) {
            if (other.id == ap.id) continue;
            const double d = distance(ap.position, other.position);
            if (d > range || d == 0.0) continue;
            const int s = sector_index(ap.position, other.position);
            if (d < best[s]) {
                best[s] = d;
                nearest[s] = &other;
            }
        }
        for (int s = 0; s < kSectorCount; ++s) {
            if (nearest[s] && coin(rng) < prob) edges.insert(ordered(ap.id, nearest[s]->id));
        }
    }
    std::map<ApId, int> degree;
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
    for (const auto& ap : aps) {
        if (degree[ap.id] > 0) continue;
        const AccessPoint* nn = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& other : aps) {
            if (other.id == ap.id) continue;
            const double d = distance(ap.position, other.position);
            if (d < best) {
                best = d;
                nn = &other;
            }
        }
        // degrees stay as in the sector graph, so the repair does not depend on AP order
        if (nn) edges.insert(ordered(ap.id, nn->id));
    }
    return {edges.begin(), edges.end()};
}

}  // namespace

Scenario generate_random_scenario(const RandomScenarioParams& params) {
    if (params.n_aps < 2) throw std::invalid_argument("need at least 2 APs");
    if (!(params.width > 0.0) || !(params.height > 0.0)) throw std::invalid_argument("degenerate scenario area");
    if (params.sector_edge_prob < 0.0 || params.sector_edge_prob > 1.0) {
        throw std::invalid_argument("sector_edge_prob must be in [0, 1]");
    }
    Rng rng(params.seed);
    std::uniform_real_distribution<double> ux(0.0, params.width);
    std::uniform_real_distribution<double> uy(0.0, params.height);

    Scenario s;
    s.name = "random";
    s.seed = params.seed;
    s.floor.width = params.width;
    s.floor.height = params.height;
    for (std::size_t i = 0; i < params.n_aps; ++i) {
        const double x = ux(rng);
        const double y = uy(rng);
        s.floor.aps.push_back({ApId{static_cast<std::uint32_t>(i + 1)}, {x, y}});
    }
    s.edges = build_sector_graph(s.floor.aps, params.sector_edge_prob, params.neighbor_range, rng);
    s.imu = {30.0, 0.10};
    return s;
}

namespace {

Scenario office17(std::uint64_t seed) {
    Scenario s;
    s.name = "office17";
    s.seed = seed;
    s.floor.width = 60.0;
    s.floor.height = 30.0;
    for (int i = 0; i < 3; ++i) {
        const double x0 = 20.0 * i;
        s.floor.rooms.push_back({{{x0, 18.0}, {x0 + 20.0, 30.0}}, {{{x0 + 10.0, 18.0}, 1.5}}});
        s.floor.rooms.push_back({{{x0, 0.0}, {x0 + 20.0, 12.0}}, {{{x0 + 10.0, 12.0}, 1.5}}});
    }
    s.floor.obstacles.push_back(rect_polygon({{24.0, 20.0}, {26.0, 22.0}}));
    s.floor.obstacles.push_back(rect_polygon({{38.0, 2.0}, {40.0, 4.0}}));
    const std::array<Point2, 17> spots{{{5, 15},  {15, 15}, {25, 15}, {35, 15}, {45, 15}, {55, 15},
                                        {6, 25},  {14, 27}, {30, 24}, {46, 26}, {54, 23},
                                        {5, 5},   {15, 7},  {26, 4},  {35, 8},  {45, 5},  {55, 6}}};
    for (std::size_t i = 0; i < spots.size(); ++i) {
        s.floor.aps.push_back({ApId{static_cast<std::uint32_t>(i + 1)}, spots[i]});
    }
    Rng graph_rng(17);
    s.edges = build_sector_graph(s.floor.aps, 0.5, 20.0, graph_rng);
    s.start = {0.0, 15.0};
    s.imu = {30.0, 0.10};
    return s;
}

}  // namespace

Scenario builtin_scenario(std::string_view name, std::uint64_t seed) {
    if (name == "grid100") {
        // Redraw until every AP is reachable over trajectory edges; the average-error
        // metric cannot relate APs in unlinked components.
        RandomScenarioParams p;
        for (std::uint64_t attempt = 0;; ++attempt) {
            p.seed = seed + attempt * 0x9e3779b97f4a7c15ULL;
            Scenario s = generate_random_scenario(p);
            if (!trajectory_graph_connected(s)) continue;
            s.name = "grid100";
            s.seed = seed;
            return s;
        }
    }
    if (name == "office17") return office17(seed);
    throw std::invalid_argument("unknown builtin scenario '" + std::string(name) + "'");
}

Scenario resolve_scenario(const std::string& spec, std::uint64_t seed) {
    constexpr std::string_view prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) return builtin_scenario(std::string_view(spec).substr(prefix.size()), seed);
    return load_scenario(spec);
}

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("point must be [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
            throw std::invalid_argument(std::string("unknown field '") + it.key() + "' in " + where);
        }
    }
}

}  // namespace

json scenario_to_json(const Scenario& s) {
    json rooms = json::array();
    for (const auto& r : s.floor.rooms) {
        json ents = json::array();
        for (const auto& e : r.entrances) ents.push_back({{"position", point_json(e.position)}, {"width", e.width}});
        rooms.push_back({{"min", point_json(r.bounds.min)}, {"max", point_json(r.bounds.max)}, {"entrances", ents}});
    }
    json obstacles = json::array();
    for (const auto& o : s.floor.obstacles) {
        json verts = json::array();
        for (auto v : o.vertices) verts.push_back(point_json(v));
        obstacles.push_back(verts);
    }
    json aps = json::array();
    for (const auto& ap : s.floor.aps) aps.push_back({{"id", ap.id.to_mac()}, {"x", ap.position.x}, {"y", ap.position.y}});
    json edges = json::array();
    for (const auto& [a, b] : s.edges) edges.push_back(json::array({a.to_mac(), b.to_mac()}));
    return {
        {"format", "chi-walk-scenario"},
        {"version", kScenarioSchemaVersion},
        {"name", s.name},
        {"unit", s.unit},
        {"seed", s.seed},
        {"start", point_json(s.start)},
        {"floor", {{"width", s.floor.width}, {"height", s.floor.height}, {"rooms", rooms}, {"obstacles", obstacles}, {"aps", aps}}},
        {"rss",
         {{"tx_power", s.rss.tx_power},
          {"path_loss_exponent", s.rss.path_loss_exponent},
          {"reference_distance", s.rss.reference_distance},
          {"coverage_radius", s.rss.coverage_radius},
          {"noise_sigma", s.rss.noise_sigma}}},
        {"imu", {{"heading_error_bound", s.imu.heading_error_bound}, {"length_error_fraction", s.imu.length_error_fraction}}},
        {"edges", edges},
    };
}

Scenario scenario_from_json(const json& j) {
    try {
        if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
        if (j.value("format", "") != "chi-walk-scenario") throw std::invalid_argument("not a chi-walk scenario document");
        const int version = j.at("version").get<int>();
        if (version != kScenarioSchemaVersion) {
            throw std::invalid_argument("unsupported scenario version " + std::to_string(version) + " (expected " +
                                        std::to_string(kScenarioSchemaVersion) + ")");
        }
        reject_unknown(j, {"format", "version", "name", "unit", "seed", "start", "floor", "rss", "imu", "edges"}, "scenario");
        Scenario s;
        s.name = j.value("name", "");
        s.unit = j.value("unit", "length-units");
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("start")) s.start = point_from(j.at("start"));

        const json& f = j.at("floor");
        reject_unknown(f, {"width", "height", "rooms", "obstacles", "aps"}, "floor");
        s.floor.width = f.at("width").get<double>();
        s.floor.height = f.at("height").get<double>();
        for (const auto& r : f.value("rooms", json::array())) {
            Room room{{point_from(r.at("min")), point_from(r.at("max"))}, {}};
            for (const auto& e : r.value("entrances", json::array())) {
                room.entrances.push_back({point_from(e.at("position")), e.value("width", 1.0)});
            }
            s.floor.rooms.push_back(std::move(room));
        }
        for (const auto& o : f.value("obstacles", json::array())) {
            Polygon poly;
            for (const auto& v : o) poly.vertices.push_back(point_from(v));
            s.floor.obstacles.push_back(std::move(poly));
        }
        for (const auto& a : f.at("aps")) {
            s.floor.aps.push_back({ApId::parse(a.at("id").get<std::string>()), {a.at("x").get<double>(), a.at("y").get<double>()}});
        }
        if (j.contains("rss")) {
            const json& r = j.at("rss");
            reject_unknown(r, {"tx_power", "path_loss_exponent", "reference_distance", "coverage_radius", "noise_sigma"}, "rss");
            s.rss.tx_power = r.value("tx_power", s.rss.tx_power);
            s.rss.path_loss_exponent = r.value("path_loss_exponent", s.rss.path_loss_exponent);
            s.rss.reference_distance = r.value("reference_distance", s.rss.reference_distance);
            s.rss.coverage_radius = r.value("coverage_radius", s.rss.coverage_radius);
            s.rss.noise_sigma = r.value("noise_sigma", s.rss.noise_sigma);
        }
        if (j.contains("imu")) {
            const json& m = j.at("imu");
            reject_unknown(m, {"heading_error_bound", "length_error_fraction"}, "imu");
            s.imu.heading_error_bound = m.value("heading_error_bound", 0.0);
            s.imu.length_error_fraction = m.value("length_error_fraction", 0.0);
        }
        for (const auto& e : j.value("edges", json::array())) {
            const ApId a = ApId::parse(e.at(0).get<std::string>());
            const ApId b = ApId::parse(e.at(1).get<std::string>());
            if (a == b) throw std::invalid_argument("self edge in scenario");
            s.edges.push_back(a < b ? ApPair{a, b} : ApPair{b, a});
        }
        s.floor.validate();
        s.rss.validate();
        s.imu.validate();
        for (const auto& [a, b] : s.edges) {
            s.floor.at(a);
            s.floor.at(b);
        }
        return s;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario: ") + e.what());
    }
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << scenario_to_json(s).dump(2) << '\n';
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("corrupt scenario file " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace chiloc
