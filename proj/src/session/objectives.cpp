#include "chiloc/session/objectives.hpp"

#include <stdexcept>

namespace chiloc {

const char* to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::LocateAps: return "locate_aps";
        case ObjectiveKind::RefineTrajectories: return "refine_trajectories";
        case ObjectiveKind::TrackMovement: return "track_movement";
        case ObjectiveKind::FloorPlan: return "floor_plan";
    }
    return "?";
}

namespace {

Rect rect_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("area must be [x0, y0, x1, y1]");
    Rect r{{j[0].get<double>(), j[1].get<double>()}, {j[2].get<double>(), j[3].get<double>()}};
    if (!(r.max.x > r.min.x) || !(r.max.y > r.min.y)) throw std::invalid_argument("area must have positive extent");
    return r;
}

nlohmann::json rect_json(const Rect& r) { return {r.min.x, r.min.y, r.max.x, r.max.y}; }

void only_fields(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw std::invalid_argument("unexpected objective field '" + k + "'");
    }
}

}  // namespace

ObjectiveSpec objective_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw std::invalid_argument("objective needs a string 'kind'");
    }
    ObjectiveSpec s;
    const std::string kind = j["kind"];
    try {
        if (kind == "locate_aps") {
            only_fields(j, {"kind", "area", "aps", "marks"});
            s.kind = ObjectiveKind::LocateAps;
            if (j.contains("area") && !j["area"].is_null()) s.area = rect_from(j["area"]);
            if (j.contains("aps")) {
                for (const auto& a : j["aps"]) s.aps.push_back(ApId::parse(a.get<std::string>()));
            }
            s.marks = j.value("marks", 1);
            if (s.marks < 1) throw std::invalid_argument("marks must be >= 1");
        } else if (kind == "refine_trajectories") {
            only_fields(j, {"kind", "theta"});
            s.kind = ObjectiveKind::RefineTrajectories;
            s.theta = j.value("theta", 1.0);
            if (!(s.theta > 0.0)) throw std::invalid_argument("theta must be > 0");
        } else if (kind == "track_movement") {
            only_fields(j, {"kind", "t_begin", "t_end", "area"});
            s.kind = ObjectiveKind::TrackMovement;
            s.query.t_begin = j.at("t_begin").get<double>();
            s.query.t_end = j.at("t_end").get<double>();
            if (s.query.t_begin > s.query.t_end) throw std::invalid_argument("track range must satisfy t_begin <= t_end");
            s.query.area = rect_from(j.at("area"));
        } else if (kind == "floor_plan") {
            only_fields(j, {"kind", "width", "height"});
            s.kind = ObjectiveKind::FloorPlan;
            s.width = j.at("width").get<double>();
            s.height = j.at("height").get<double>();
            if (!(s.width > 0.0) || !(s.height > 0.0)) throw std::invalid_argument("floor plan size must be > 0");
        } else {
            throw std::invalid_argument("unknown objective kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed objective: ") + e.what());
    }
    return s;
}

nlohmann::json objective_to_json(const ObjectiveSpec& s) {
    nlohmann::json j{{"kind", to_string(s.kind)}};
    switch (s.kind) {
        case ObjectiveKind::LocateAps: {
            j["area"] = s.area ? rect_json(*s.area) : nlohmann::json(nullptr);
            auto aps = nlohmann::json::array();
            for (auto a : s.aps) aps.push_back(a.to_mac());
            j["aps"] = aps;
            j["marks"] = s.marks;
            break;
        }
        case ObjectiveKind::RefineTrajectories: j["theta"] = s.theta; break;
        case ObjectiveKind::TrackMovement:
            j["t_begin"] = s.query.t_begin;
            j["t_end"] = s.query.t_end;
            j["area"] = rect_json(s.query.area);
            break;
        case ObjectiveKind::FloorPlan:
            j["width"] = s.width;
            j["height"] = s.height;
            break;
    }
    return j;
}

namespace {

nlohmann::json pts(const std::vector<Point2>& v) {
    auto a = nlohmann::json::array();
    for (auto p : v) a.push_back({p.x, p.y});
    return a;
}

std::vector<Point2> pts_from(const nlohmann::json& j) {
    std::vector<Point2> v;
    for (const auto& p : j) v.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return v;
}

}  // namespace

nlohmann::json coverage_plan_to_json(const CoveragePlan& plan) {
    auto comps = nlohmann::json::array();
    for (const auto& c : plan.components) comps.push_back(pts(c));
    auto obs = nlohmann::json::array();
    for (const auto& o : plan.obstacles) obs.push_back(pts(o.vertices));
    return {{"spacing", plan.spacing}, {"start", {plan.start.x, plan.start.y}}, {"components", comps}, {"obstacles", obs}};
}

CoveragePlan coverage_plan_from_json(const nlohmann::json& j) {
    CoveragePlan p;
    p.spacing = j.at("spacing").get<double>();
    p.start = {j.at("start").at(0).get<double>(), j.at("start").at(1).get<double>()};
    for (const auto& c : j.at("components")) p.components.push_back(pts_from(c));
    for (const auto& o : j.at("obstacles")) p.obstacles.push_back(Polygon{pts_from(o)});
    return p;
}

}  // namespace chiloc
