#include "chiloc/floorplan/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>

namespace chiloc {

void PlanRuleConfig::validate() const {
    for (double v : {closure_radius, overlap_tolerance, turn_length_threshold, polyline_fit_tolerance,
                     straight_threshold, min_straight_length, passage_width, room_snap_ratio}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("floor-plan rule parameters must be > 0");
    }
}

const char* to_string(ComponentKind k) {
    switch (k) {
        case ComponentKind::Passage: return "passage";
        case ComponentKind::Entrance: return "entrance";
        case ComponentKind::Room: return "room";
    }
    return "?";
}

const char* to_string(ComponentSource s) { return s == ComponentSource::Inferred ? "inferred" : "corrected"; }

bool FloorComponent::covers(Point2 p) const {
    constexpr double eps = 1e-9;
    switch (kind) {
        case ComponentKind::Passage: return point_polyline_distance(p, polyline) <= width / 2 + eps;
        case ComponentKind::Entrance: return distance(p, position) <= width / 2 + eps;
        case ComponentKind::Room: return outline.contains(p) || hull.contains(p);
    }
    return false;
}

Rect FloorComponent::extent() const {
    switch (kind) {
        case ComponentKind::Passage: {
            Rect r = bounding_box(polyline);
            const double h = width / 2;
            return {{r.min.x - h, r.min.y - h}, {r.max.x + h, r.max.y + h}};
        }
        case ComponentKind::Entrance:
            return {{position.x - width / 2, position.y - width / 2}, {position.x + width / 2, position.y + width / 2}};
        case ComponentKind::Room: return bounding_box(outline.vertices);
    }
    return {};
}

std::vector<ClosedPath> detect_closed_paths(std::span<const Point2> t, double closure_radius) {
    std::vector<ClosedPath> loops;
    std::size_t i = 0;
    while (i + 1 < t.size()) {
        std::optional<std::size_t> end;
        double excursion = 0.0;
        std::size_t excursion_at = i;
        // furthest distance reached from t[i] up to each j, tracked incrementally
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const double d = distance(t[i], t[j]);
            if (d > excursion) {
                excursion = d;
                excursion_at = j;
            }
            if (d <= closure_radius && excursion > closure_radius && excursion_at < j) end = j;
        }
        if (end) {
            loops.push_back({i, *end});
            i = *end;
        } else {
            ++i;
        }
    }
    return loops;
}

namespace {

Polygon room_outline(const Polygon& hull, double snap_ratio) {
    if (hull.vertices.size() < 3) return hull;
    const Rect box = bounding_box(hull.vertices);
    if (box.area() > 0.0 && hull.area() >= snap_ratio * box.area()) return rect_polygon(box);
    return hull;
}

}  // namespace

LoopClass classify_loop(std::span<const Point2> loop, const PlanRuleConfig& config) {
    if (loop.size() < 2) throw std::invalid_argument("classify_loop needs at least two points");
    LoopClass out;
    out.closure = loop.front() + (loop.back() - loop.front()) * 0.5;
    std::size_t far = 0;
    for (std::size_t i = 1; i < loop.size(); ++i) {
        if (distance(loop[i], out.closure) > distance(loop[far], out.closure)) far = i;
    }
    out.far_point = loop[far];
    const std::vector<Point2> forward(loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(far) + 1);
    const std::vector<Point2> reverse(loop.rbegin(), loop.rend() - static_cast<std::ptrdiff_t>(far));
    const double tol = config.overlap_tolerance + 1e-9;
    if (directed_hausdorff(forward, reverse) <= tol && directed_hausdorff(reverse, forward) <= tol) {
        out.kind = LoopKind::DeadEnd;
        return out;
    }
    out.kind = LoopKind::Room;
    out.hull = convex_hull({loop.begin(), loop.end()});
    out.outline = room_outline(out.hull, config.room_snap_ratio);
    return out;
}

std::optional<TurnRoom> classify_turn(std::span<const Point2> p, const PlanRuleConfig& config) {
    if (p.size() < 2) return std::nullopt;
    if (!(polyline_length(p) > config.turn_length_threshold)) return std::nullopt;
    const std::size_t n = p.size();
    const Vec2 d1 = p[1] - p[0];
    const Vec2 d2 = p[n - 1] - p[n - 2];
    double deviation = std::numeric_limits<double>::infinity();
    const double denom = d1.cross(d2);
    if (std::fabs(denom) > 1e-12 * std::max(1.0, d1.norm() * d2.norm())) {
        const Vec2 w = p[n - 1] - p[0];
        const double s = w.cross(d2) / denom;  // along d1 from p[0]
        const double u = w.cross(d1) / denom;  // along d2 from p[n-1]
        if (s >= -1e-9 && u <= 1e-9) {
            const Point2 corner = p[0] + d1 * s;
            const std::vector<Point2> broken{p[0], corner, p[n - 1]};
            deviation = 0.0;
            for (auto q : p) deviation = std::max(deviation, point_polyline_distance(q, broken));
        }
    }
    if (deviation <= config.polyline_fit_tolerance) return std::nullopt;
    TurnRoom room;
    room.hull = convex_hull({p.begin(), p.end()});
    room.outline = room_outline(room.hull, config.room_snap_ratio);
    room.entrance_in = p.front();
    room.entrance_out = p.back();
    return room;
}

std::vector<ClosedPath> extract_turns(std::span<const Point2> t, const PlanRuleConfig& config) {
    struct Run {
        std::size_t first_seg, last_seg;  // segment k joins t[k] and t[k+1]
        double length;
    };
    std::vector<Run> runs;
    double start_heading = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const Vec2 d = t[k + 1] - t[k];
        const double len = d.norm();
        if (len == 0.0) {
            if (!runs.empty()) runs.back().last_seg = k;
            continue;
        }
        const double h = bearing_of(d);
        if (runs.empty() || heading_diff(h, start_heading) > config.straight_threshold) {
            runs.push_back({k, k, len});
            start_heading = h;
        } else {
            runs.back().last_seg = k;
            runs.back().length += len;
        }
    }
    std::vector<ClosedPath> turns;
    std::optional<std::size_t> prev_straight;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (runs[r].length < config.min_straight_length) continue;
        if (prev_straight && r > *prev_straight + 1) {
            turns.push_back({runs[*prev_straight].last_seg, runs[r].first_seg + 1});
        }
        prev_straight = r;
    }
    return turns;
}

const FloorComponent* FloorPlan::find(std::uint32_t id) const {
    for (const auto& c : components) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

namespace {

bool rects_overlap(const Rect& a, const Rect& b) {
    return a.min.x < b.max.x && b.min.x < a.max.x && a.min.y < b.max.y && b.min.y < a.max.y;
}

struct RoomCandidate {
    Polygon hull;
    Polygon outline;
    std::vector<Point2> entrances;
};

}  // namespace

FloorPlan apply_inference(const FloorPlan& plan, std::span<const std::vector<Point2>> trajectories,
                          const PlanRuleConfig& config, InferenceDiff* diff) {
    config.validate();
    std::vector<FloorComponent> locked, corrected;
    for (const auto& c : plan.components) {
        if (c.locked) {
            locked.push_back(c);
        } else if (c.source == ComponentSource::Corrected) {
            corrected.push_back(c);
        }
    }

    std::vector<FloorComponent> passages;
    std::vector<RoomCandidate> rooms;
    auto passage = [&](std::span<const Point2> pts, std::optional<Point2> block) {
        if (pts.empty()) return;
        FloorComponent c;
        c.kind = ComponentKind::Passage;
        c.polyline.assign(pts.begin(), pts.end());
        c.block = block;
        c.width = config.passage_width;
        passages.push_back(std::move(c));
    };
    for (const auto& traj : trajectories) {
        const std::span<const Point2> t(traj);
        std::size_t cursor = 0;
        auto open_stretch = [&](std::size_t end) {
            if (end <= cursor && t.size() > 1) return;
            const auto piece = t.subspan(cursor, end - cursor + 1);
            passage(piece, std::nullopt);
            for (const auto& turn : extract_turns(piece, config)) {
                const auto sub = piece.subspan(turn.first, turn.last - turn.first + 1);
                if (auto r = classify_turn(sub, config)) rooms.push_back({r->hull, r->outline, {r->entrance_in, r->entrance_out}});
            }
        };
        for (const auto& loop : detect_closed_paths(t, config.closure_radius)) {
            open_stretch(loop.first);
            const auto pts = t.subspan(loop.first, loop.last - loop.first + 1);
            const LoopClass lc = classify_loop(pts, config);
            if (lc.kind == LoopKind::DeadEnd) {
                passage(pts, lc.far_point);
            } else {
                rooms.push_back({lc.hull, lc.outline, {lc.closure}});
                passage(pts, std::nullopt);
            }
            cursor = loop.last;
        }
        if (!t.empty()) open_stretch(t.size() - 1);
    }

    std::uint32_t next_id = 1;
    for (const auto& c : locked) next_id = std::max(next_id, c.id + 1);
    for (const auto& c : corrected) next_id = std::max(next_id, c.id + 1);

    std::vector<FloorComponent> fresh;
    std::set<std::uint32_t> overwritten;
    std::vector<char> vetoed(rooms.size(), 0);
    for (std::size_t i = 0; i < rooms.size(); ++i) {
        const Rect box = bounding_box(rooms[i].outline.vertices);
        for (const auto& l : locked) {
            if (rects_overlap(box, l.extent()) && l.kind == ComponentKind::Room) vetoed[i] = 1;
        }
    }
    for (auto& p : passages) {
        p.id = next_id++;
        fresh.push_back(p);
    }
    for (std::size_t i = 0; i < rooms.size(); ++i) {
        if (vetoed[i]) continue;
        FloorComponent room;
        room.id = next_id++;
        room.kind = ComponentKind::Room;
        room.hull = rooms[i].hull;
        room.outline = rooms[i].outline;
        fresh.push_back(room);
        const Rect box = room.extent();
        for (const auto& c : corrected) {
            if (rects_overlap(box, c.extent())) overwritten.insert(c.id);
        }
        for (auto e : rooms[i].entrances) {
            FloorComponent ent;
            ent.id = next_id++;
            ent.kind = ComponentKind::Entrance;
            ent.position = e;
            ent.width = config.passage_width;
            ent.room = room.id;
            fresh.push_back(ent);
        }
    }

    FloorPlan out;
    out.width = plan.width;
    out.height = plan.height;
    out.components = locked;
    for (const auto& c : corrected) {
        if (!overwritten.count(c.id)) out.components.push_back(c);
    }
    out.components.insert(out.components.end(), fresh.begin(), fresh.end());
    std::sort(out.components.begin(), out.components.end(),
              [](const FloorComponent& a, const FloorComponent& b) { return a.id < b.id; });

    if (diff) {
        *diff = {};
        std::set<std::uint32_t> before, after;
        for (const auto& c : plan.components) before.insert(c.id);
        for (const auto& c : out.components) after.insert(c.id);
        for (auto id : after) {
            const FloorComponent* old = plan.find(id);
            if (!old || !(*old == *out.find(id))) diff->added.push_back(id);
        }
        for (auto id : before) {
            if (overwritten.count(id)) {
                diff->overwritten.push_back(id);
            } else if (!after.count(id) || !(*plan.find(id) == *out.find(id))) {
                diff->removed.push_back(id);
            }
        }
    }
    return out;
}

FloorPlan correct_component(const FloorPlan& plan, std::uint32_t id, const ComponentEdit& edit, bool lock) {
    FloorPlan out = plan;
    auto it = std::find_if(out.components.begin(), out.components.end(), [&](const FloorComponent& c) { return c.id == id; });
    if (it == out.components.end()) throw std::out_of_range("no floor component with id " + std::to_string(id));
    if (it->locked) throw std::logic_error("floor component " + std::to_string(id) + " is locked");
    FloorComponent& c = *it;
    if (edit.kind) c.kind = *edit.kind;
    if (edit.polyline) c.polyline = *edit.polyline;
    if (edit.outline) {
        c.outline = *edit.outline;
        c.hull = convex_hull(edit.outline->vertices);
    }
    if (edit.position) c.position = *edit.position;
    if (edit.width) c.width = *edit.width;
    switch (c.kind) {
        case ComponentKind::Passage:
            if (c.polyline.empty()) throw std::invalid_argument("a passage needs a polyline");
            if (!(c.width > 0.0)) c.width = 2.0;
            break;
        case ComponentKind::Room:
            if (c.outline.vertices.size() < 3) throw std::invalid_argument("a room needs an outline polygon");
            if (c.hull.vertices.empty()) c.hull = convex_hull(c.outline.vertices);
            break;
        case ComponentKind::Entrance:
            if (!(c.width > 0.0)) throw std::invalid_argument("an entrance needs a positive width");
            break;
    }
    c.source = ComponentSource::Corrected;
    c.locked = lock;
    return out;
}

namespace {

nlohmann::json pts_json(std::span<const Point2> pts) {
    auto a = nlohmann::json::array();
    for (auto p : pts) a.push_back({p.x, p.y});
    return a;
}

std::vector<Point2> json_pts(const nlohmann::json& j) {
    std::vector<Point2> out;
    for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return out;
}

ComponentKind kind_from(const std::string& s) {
    if (s == "passage") return ComponentKind::Passage;
    if (s == "entrance") return ComponentKind::Entrance;
    if (s == "room") return ComponentKind::Room;
    throw std::invalid_argument("unknown component kind '" + s + "'");
}

}  // namespace

nlohmann::json floorplan_to_json(const FloorPlan& plan) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : plan.components) {
        nlohmann::json j{{"id", c.id}, {"kind", to_string(c.kind)}, {"source", to_string(c.source)}, {"locked", c.locked}};
        switch (c.kind) {
            case ComponentKind::Passage:
                j["polyline"] = pts_json(c.polyline);
                j["width"] = c.width;
                j["block"] = c.block ? nlohmann::json{c.block->x, c.block->y} : nlohmann::json(nullptr);
                break;
            case ComponentKind::Room:
                j["outline"] = pts_json(c.outline.vertices);
                j["hull"] = pts_json(c.hull.vertices);
                break;
            case ComponentKind::Entrance:
                j["position"] = {c.position.x, c.position.y};
                j["width"] = c.width;
                j["room"] = c.room ? nlohmann::json(*c.room) : nlohmann::json(nullptr);
                break;
        }
        comps.push_back(std::move(j));
    }
    return {{"width", plan.width}, {"height", plan.height}, {"components", std::move(comps)}};
}

FloorPlan floorplan_from_json(const nlohmann::json& j) {
    FloorPlan plan;
    plan.width = j.at("width").get<double>();
    plan.height = j.at("height").get<double>();
    for (const auto& cj : j.at("components")) {
        FloorComponent c;
        c.id = cj.at("id").get<std::uint32_t>();
        c.kind = kind_from(cj.at("kind").get<std::string>());
        c.source = cj.at("source").get<std::string>() == "corrected" ? ComponentSource::Corrected : ComponentSource::Inferred;
        c.locked = cj.at("locked").get<bool>();
        switch (c.kind) {
            case ComponentKind::Passage:
                c.polyline = json_pts(cj.at("polyline"));
                c.width = cj.at("width").get<double>();
                if (!cj.at("block").is_null()) c.block = Point2{cj["block"].at(0).get<double>(), cj["block"].at(1).get<double>()};
                break;
            case ComponentKind::Room:
                c.outline.vertices = json_pts(cj.at("outline"));
                c.hull.vertices = json_pts(cj.at("hull"));
                break;
            case ComponentKind::Entrance:
                c.position = {cj.at("position").at(0).get<double>(), cj.at("position").at(1).get<double>()};
                c.width = cj.at("width").get<double>();
                if (!cj.at("room").is_null()) c.room = cj["room"].get<std::uint32_t>();
                break;
        }
        plan.components.push_back(std::move(c));
    }
    return plan;
}

std::string floorplan_to_svg(const FloorPlan& plan, std::span<const std::vector<Point2>> trajectories) {
    const double scale = 10.0;
    const double w = std::max(plan.width, 1.0) * scale;
    const double h = std::max(plan.height, 1.0) * scale;
    auto X = [&](double x) { return x * scale; };
    auto Y = [&](double y) { return h - y * scale; };
    auto pts_attr = [&](std::span<const Point2> pts) {
        std::string s;
        char buf[64];
        for (auto p : pts) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(p.x), Y(p.y));
            s += buf;
        }
        return s;
    };
    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  w, h, w, h);
    svg += buf;
    svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& c : plan.components) {
        const char* stroke = c.locked ? "#000" : (c.source == ComponentSource::Corrected ? "#a0a" : "#555");
        switch (c.kind) {
            case ComponentKind::Room:
                svg += "<polygon points=\"" + pts_attr(c.outline.vertices) + "\" fill=\"#cde\" stroke=\"" + stroke + "\"/>\n";
                break;
            case ComponentKind::Passage:
                svg += "<polyline points=\"" + pts_attr(c.polyline) + "\" fill=\"none\" stroke=\"#dca\" stroke-width=\"" +
                       std::to_string(c.width * scale) + "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
                if (c.block) {
                    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"red\"/>\n", X(c.block->x), Y(c.block->y));
                    svg += buf;
                }
                break;
            case ComponentKind::Entrance:
                std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"#3a3\"/>\n", X(c.position.x),
                              Y(c.position.y), c.width * scale / 2);
                svg += buf;
                break;
        }
    }
    for (const auto& t : trajectories) {
        svg += "<polyline points=\"" + pts_attr(t) + "\" fill=\"none\" stroke=\"#36c\" stroke-width=\"1\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace chiloc
