#include "chiloc/session/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "chiloc/planner/tracking.hpp"
#include "chiloc/positioning/positioning.hpp"
#include "chiloc/traj/ap_mark.hpp"

namespace chiloc {

using nlohmann::json;

namespace {

json point_json(Point2 p) { return {p.x, p.y}; }

json points_json(const std::vector<Point2>& pts) {
    json a = json::array();
    for (auto p : pts) a.push_back(point_json(p));
    return a;
}

Point2 point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a point [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point2> points_from(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected a list of points");
    std::vector<Point2> v;
    for (const auto& p : j) v.push_back(point_from(p));
    return v;
}

json scan_json(const Scan& scan) {
    json a = json::array();
    for (const auto& e : scan) a.push_back({e.ap.to_mac(), e.rss});
    return a;
}

json record_json(const MarkRecord& r) {
    return {{"t", r.timestamp}, {"heading", r.heading}, {"ap", r.ap.to_mac()}, {"rss", r.rss}, {"nearby", scan_json(r.nearby)}};
}

json mark_json(const ApMarkVector& m) {
    json recs = json::array();
    for (const auto& r : m.records) recs.push_back(record_json(r));
    return {{"ap", m.ap.to_mac()}, {"mark_point_index", m.mark_point_index}, {"records", recs}};
}

json pool_json(const FusionPool& p) {
    json members = json::array();
    for (const auto& m : p.members()) members.push_back({m.offset.x, m.offset.y, m.path_length, m.t_begin, m.t_end});
    json compounds = json::array();
    for (auto c : p.compounds()) compounds.push_back({c.x, c.y});
    json discarded = json::array();
    for (auto d : p.discarded()) discarded.push_back({d.begin, d.end});
    return {{"a", p.key().a.to_mac()}, {"b", p.key().b.to_mac()},   {"signature", p.key().signature},
            {"members", members},      {"compounds", compounds},    {"discarded", discarded},
            {"selected", p.selected()}};
}

double finite_number(const json& cmd, const char* field) {
    if (!cmd.contains(field) || !cmd[field].is_number()) {
        throw std::invalid_argument(std::string("command field '") + field + "' must be a number");
    }
    const double v = cmd[field].get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("command field '") + field + "' must be finite");
    return v;
}

std::uint32_t component_id(const json& cmd) {
    if (!cmd.contains("id") || !cmd["id"].is_number_unsigned()) {
        throw std::invalid_argument("command field 'id' must be a non-negative integer");
    }
    return cmd["id"].get<std::uint32_t>();
}

ComponentKind kind_named(const std::string& s) {
    if (s == "passage") return ComponentKind::Passage;
    if (s == "room") return ComponentKind::Room;
    if (s == "entrance") return ComponentKind::Entrance;
    throw std::invalid_argument("unknown component kind '" + s + "'");
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
            throw std::invalid_argument("unknown " + what + " field '" + k + "'");
        }
    }
}

constexpr double kMaxWalk = 1e6;

}  // namespace

json session_config_to_json(const SessionConfig& c) {
    return {{"direction_threshold", c.direction_threshold},
            {"step_length", c.step_length},
            {"imu", {{"heading_error_bound", c.imu.heading_error_bound}, {"length_error_fraction", c.imu.length_error_fraction}}},
            {"floorplan_spacing", c.floorplan_spacing},
            {"rules",
             {{"closure_radius", c.rules.closure_radius},
              {"overlap_tolerance", c.rules.overlap_tolerance},
              {"turn_length_threshold", c.rules.turn_length_threshold},
              {"polyline_fit_tolerance", c.rules.polyline_fit_tolerance},
              {"straight_threshold", c.rules.straight_threshold},
              {"min_straight_length", c.rules.min_straight_length},
              {"passage_width", c.rules.passage_width},
              {"room_snap_ratio", c.rules.room_snap_ratio}}},
            {"gaps",
             {{"neighbor_range", c.gaps.neighbor_range},
              {"theta", c.gaps.theta},
              {"grid_spacing", c.gaps.grid_spacing},
              {"mark_radius", c.gaps.mark_radius}}},
            {"infer_floorplan", c.infer_floorplan}};
}

SessionConfig session_config_from_json(const json& j) {
    SessionConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw std::invalid_argument("session config must be an object");
    try {
        reject_unknown(j, {"direction_threshold", "step_length", "imu", "floorplan_spacing", "rules", "gaps", "infer_floorplan"},
                       "session config");
        c.direction_threshold = j.value("direction_threshold", c.direction_threshold);
        c.step_length = j.value("step_length", c.step_length);
        if (j.contains("imu")) {
            reject_unknown(j["imu"], {"heading_error_bound", "length_error_fraction"}, "imu");
            c.imu.heading_error_bound = j["imu"].value("heading_error_bound", c.imu.heading_error_bound);
            c.imu.length_error_fraction = j["imu"].value("length_error_fraction", c.imu.length_error_fraction);
        }
        c.floorplan_spacing = j.value("floorplan_spacing", c.floorplan_spacing);
        if (j.contains("rules")) {
            const json& r = j["rules"];
            reject_unknown(r, {"closure_radius", "overlap_tolerance", "turn_length_threshold", "polyline_fit_tolerance",
                               "straight_threshold", "min_straight_length", "passage_width", "room_snap_ratio"},
                           "rules");
            c.rules.closure_radius = r.value("closure_radius", c.rules.closure_radius);
            c.rules.overlap_tolerance = r.value("overlap_tolerance", c.rules.overlap_tolerance);
            c.rules.turn_length_threshold = r.value("turn_length_threshold", c.rules.turn_length_threshold);
            c.rules.polyline_fit_tolerance = r.value("polyline_fit_tolerance", c.rules.polyline_fit_tolerance);
            c.rules.straight_threshold = r.value("straight_threshold", c.rules.straight_threshold);
            c.rules.min_straight_length = r.value("min_straight_length", c.rules.min_straight_length);
            c.rules.passage_width = r.value("passage_width", c.rules.passage_width);
            c.rules.room_snap_ratio = r.value("room_snap_ratio", c.rules.room_snap_ratio);
        }
        if (j.contains("gaps")) {
            const json& g = j["gaps"];
            reject_unknown(g, {"neighbor_range", "theta", "grid_spacing", "mark_radius"}, "gaps");
            c.gaps.neighbor_range = g.value("neighbor_range", c.gaps.neighbor_range);
            c.gaps.theta = g.value("theta", c.gaps.theta);
            c.gaps.grid_spacing = g.value("grid_spacing", c.gaps.grid_spacing);
            c.gaps.mark_radius = g.value("mark_radius", c.gaps.mark_radius);
        }
        c.infer_floorplan = j.value("infer_floorplan", c.infer_floorplan);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed session config: ") + e.what());
    }
    if (!(c.direction_threshold > 0.0) || !(c.step_length > 0.0) || !(c.floorplan_spacing > 0.0) ||
        !(c.gaps.grid_spacing > 0.0) || !(c.gaps.theta > 0.0) || !(c.gaps.mark_radius >= 0.0)) {
        throw std::invalid_argument("session config values must be positive");
    }
    c.imu.validate();
    c.rules.validate();
    return c;
}

Session::Session(Scenario scenario, SessionConfig config, std::uint64_t seed)
    : scenario_(std::move(scenario)), config_(config), seed_(seed), rng_(seed) {
    scenario_.floor.validate();
    scenario_.rss.validate();
    config_.imu.validate();
    config_.rules.validate();
    if (scenario_.floor.blocked(scenario_.start)) throw std::invalid_argument("session start lies outside the walkable floor");
    walker_.true_position = scenario_.start;
    truth_.push_back(scenario_.start);
    dr_.push_back(scenario_.start);
    floorplan_.width = scenario_.floor.width;
    floorplan_.height = scenario_.floor.height;
}

json Session::tick(const json& command) {
    if (closed_) throw SessionClosedError("session is closed");
    json delta = apply(command);
    delta["seq"] = events_.size();
    events_.push_back({events_.size(), command, delta});
    return delta;
}

json Session::apply(const json& cmd) {
    if (!cmd.is_object() || !cmd.contains("type") || !cmd["type"].is_string()) {
        throw std::invalid_argument("command must be an object with a string 'type'");
    }
    const std::string type = cmd["type"];
    json delta{{"type", type}};
    if (type == "walk" || type == "walk_to") {
        double heading = 0.0, dist = 0.0;
        if (type == "walk") {
            reject_unknown(cmd, {"type", "heading", "distance"}, "walk");
            heading = finite_number(cmd, "heading");
            dist = finite_number(cmd, "distance");
        } else {
            reject_unknown(cmd, {"type", "x", "y"}, "walk_to");
            const Point2 target{finite_number(cmd, "x"), finite_number(cmd, "y")};
            const Vec2 d = target - position();
            heading = bearing_of(d);
            dist = d.norm();
        }
        if (dist < 0.0 || dist > kMaxWalk) throw std::invalid_argument("walk distance must lie in [0, 1e6]");
        walk(heading, dist, delta);
    } else if (type == "terminate") {
        reject_unknown(cmd, {"type"}, "terminate");
        finalize_trajectories(false, delta);
        if (!objectives_.empty()) objectives_.front().terminated = true;
        check_completion(delta);
    } else if (type == "correct") {
        reject_unknown(cmd, {"type", "id", "kind", "outline", "polyline", "position", "width", "lock"}, "correct");
        const std::uint32_t id = component_id(cmd);
        ComponentEdit edit;
        try {
            if (cmd.contains("kind")) edit.kind = kind_named(cmd["kind"].get<std::string>());
            if (cmd.contains("outline")) edit.outline = Polygon{points_from(cmd["outline"])};
            if (cmd.contains("polyline")) edit.polyline = points_from(cmd["polyline"]);
            if (cmd.contains("position")) edit.position = point_from(cmd["position"]);
            if (cmd.contains("width")) edit.width = cmd["width"].get<double>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("malformed correction: ") + e.what());
        }
        const bool lock = cmd.value("lock", false);
        try {
            floorplan_ = correct_component(floorplan_, id, edit, lock);
        } catch (const std::out_of_range& e) {
            throw std::invalid_argument(e.what());
        } catch (const std::logic_error& e) {
            throw std::invalid_argument(e.what());
        }
        delta["component"] = id;
        delta["locked"] = lock;
    } else if (type == "lock") {
        reject_unknown(cmd, {"type", "id"}, "lock");
        const std::uint32_t id = component_id(cmd);
        auto it = std::find_if(floorplan_.components.begin(), floorplan_.components.end(),
                               [&](const FloorComponent& c) { return c.id == id; });
        if (it == floorplan_.components.end()) throw std::invalid_argument("no floor component with id " + std::to_string(id));
        it->locked = true;
        delta["component"] = id;
        delta["locked"] = true;
    } else if (type == "set_objectives") {
        reject_unknown(cmd, {"type", "objectives"}, "set_objectives");
        if (!cmd.contains("objectives") || !cmd["objectives"].is_array()) {
            throw std::invalid_argument("set_objectives needs an 'objectives' list");
        }
        set_objectives(cmd["objectives"], delta);
    } else if (type == "close") {
        reject_unknown(cmd, {"type"}, "close");
        flush_windows(delta);
        finalize_trajectories(true, delta);
        closed_ = true;
    } else {
        throw std::invalid_argument("unknown command type '" + type + "'");
    }
    return delta;
}

void Session::walk(double heading, double distance, json& delta) {
    const std::size_t first_point = dr_.size() - 1;
    const auto n = static_cast<std::size_t>(std::ceil(distance / config_.step_length));
    const double piece = n ? distance / static_cast<double>(n) : 0.0;
    std::vector<Polygon> learned;
    bool clipped = false;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const StepResult r =
            step_walker(scenario_.floor, walker_, {heading, piece}, config_.imu, scenario_.rss, rng_);
        if (r.travelled > 0.0) {
            walker_ = r.state;
            steps_.push_back({walker_.clock, r.reported, r.scan});
            truth_.push_back(walker_.true_position);
            dr_.push_back(dr_.back() + r.reported.offset());
            record_scan(r.scan, walker_.clock, r.reported.heading(), delta);
            ++taken;
        }
        if (r.clipped) {
            clipped = true;
            // Something blocks the way: remember a small square just ahead of the operator.
            const double s = config_.step_length;
            const Point2 c = dr_.back() + DisplacementVector(heading, s).offset();
            learned.push_back(rect_polygon({{c.x - s / 2, c.y - s / 2}, {c.x + s / 2, c.y + s / 2}}));
            break;
        }
    }
    learned_obstacles_.insert(learned_obstacles_.end(), learned.begin(), learned.end());
    finalize_trajectories(false, delta);

    const std::vector<Point2> walked(dr_.begin() + static_cast<std::ptrdiff_t>(first_point), dr_.end());
    for (auto& o : objectives_) {
        if (!o.plan) continue;
        const double radius = o.spec.kind == ObjectiveKind::FloorPlan ? config_.floorplan_spacing : scenario_.rss.coverage_radius;
        o.plan = update_coverage(std::move(*o.plan), taken ? std::span<const Point2>(walked) : std::span<const Point2>(), radius,
                                 learned);
    }
    if (config_.infer_floorplan && taken) {
        InferenceDiff diff;
        const std::vector<std::vector<Point2>> trajectories{dr_};
        floorplan_ = apply_inference(floorplan_, trajectories, config_.rules, &diff);
        delta["floorplan"] = {{"added", diff.added}, {"removed", diff.removed}, {"overwritten", diff.overwritten}};
    }
    check_completion(delta);
    delta["steps"] = taken;
    delta["clipped"] = clipped;
    delta["clock"] = walker_.clock;
    delta["position"] = point_json(position());
}

void Session::record_scan(const Scan& scan, double timestamp, double heading, json& delta) {
    std::set<ApId> heard;
    for (const auto& e : scan) {
        heard.insert(e.ap);
        MarkRecord rec{timestamp, heading, e.ap, e.rss, {}};
        for (const auto& o : scan) {
            if (o.ap != e.ap) rec.nearby.push_back(o);
        }
        open_windows_[e.ap].push_back(std::move(rec));
    }
    std::vector<ApId> left;
    for (const auto& [ap, w] : open_windows_) {
        if (!heard.count(ap)) left.push_back(ap);
    }
    for (auto ap : left) close_window(ap, delta);
}

void Session::close_window(ApId ap, json& delta) {
    auto it = open_windows_.find(ap);
    if (it == open_windows_.end()) return;
    const std::vector<MarkRecord> window = std::move(it->second);
    open_windows_.erase(it);
    auto mark = detect_ap_mark(window, config_.direction_threshold);
    if (!mark) return;
    auto pos = std::upper_bound(marks_.begin(), marks_.end(), *mark, [](const ApMarkVector& a, const ApMarkVector& b) {
        return a.timestamp() < b.timestamp() || (a.timestamp() == b.timestamp() && a.ap < b.ap);
    });
    delta["new_marks"].push_back({{"ap", mark->ap.to_mac()}, {"t", mark->timestamp()}, {"heading", mark->heading()}});
    marks_.insert(pos, std::move(*mark));
}

void Session::flush_windows(json& delta) {
    std::vector<ApId> confirmed, unconfirmed;
    for (const auto& [ap, w] : open_windows_) {
        std::size_t peak = 0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i].rss > w[peak].rss) peak = i;
        }
        // A peak on the newest record may still be rising; it is no closest approach yet.
        (peak + 1 < w.size() ? confirmed : unconfirmed).push_back(ap);
    }
    for (auto ap : confirmed) close_window(ap, delta);
    for (auto ap : unconfirmed) open_windows_.erase(ap);
}

void Session::finalize_trajectories(bool flush, json& delta) {
    double horizon = std::numeric_limits<double>::infinity();
    if (!flush) {
        for (const auto& [ap, w] : open_windows_) horizon = std::min(horizon, w.front().timestamp);
    }
    std::optional<SegmentedWalk> walk;
    std::size_t added = 0;
    while (finalized_pairs_ + 1 < marks_.size() && marks_[finalized_pairs_ + 1].timestamp() < horizon) {
        const ApMarkVector& a = marks_[finalized_pairs_];
        const ApMarkVector& b = marks_[finalized_pairs_ + 1];
        ++finalized_pairs_;
        if (a.ap == b.ap) continue;
        if (!walk) walk = segment_vectors(std::span<const WalkStep>(steps_), config_.direction_threshold);
        const std::vector<ApMarkVector> pair{a, b};
        for (const auto& t : build_ap_to_ap(*walk, pair)) {
            if (t.vectors.empty()) continue;
            auto [key, member] = pool_entry(t);
            auto [it, fresh] = pools_.try_emplace(key, FusionPool(key));
            it->second.add(member);
            ++trajectory_count_;
            ++added;
        }
    }
    if (added) {
        refresh_constellation();
        delta["new_trajectories"] = delta.value("new_trajectories", 0) + added;
    }
}

std::optional<std::size_t> Session::step_at(double timestamp) const {
    auto it = std::lower_bound(steps_.begin(), steps_.end(), timestamp,
                               [](const WalkStep& s, double t) { return s.timestamp < t; });
    if (it == steps_.end() || it->timestamp != timestamp) return std::nullopt;
    return static_cast<std::size_t>(it - steps_.begin());
}

void Session::refresh_constellation() {
    constellation_.clear();
    components_.clear();
    const auto edges = select_positioning_edges(pools_);
    if (edges.empty()) return;
    const ApConstellation c = position_aps(edges);
    components_ = c.components;
    // Each component is pinned at its anchor's first AP-mark in the operator's frame.
    for (const auto& comp : c.components) {
        const ApId anchor = comp.front();
        Vec2 shift;
        for (const auto& m : marks_) {
            if (m.ap != anchor) continue;
            if (auto k = step_at(m.timestamp())) shift = dr_[*k + 1] - c.positions.at(anchor);
            break;
        }
        for (auto id : comp) constellation_[id] = c.positions.at(id) + shift;
    }
}

CoveragePlan Session::plan_for(const ObjectiveSpec& spec) const {
    Rect area = scenario_.floor.bounds();
    double spacing = scenario_.rss.coverage_radius;
    if (spec.kind == ObjectiveKind::LocateAps && spec.area) area = *spec.area;
    if (spec.kind == ObjectiveKind::FloorPlan) {
        area = {{0.0, 0.0}, {spec.width, spec.height}};
        spacing = config_.floorplan_spacing;
    }
    CoveragePlan plan = make_coverage_plan(area, spacing, position(), learned_obstacles_);
    return update_coverage(std::move(plan), dr_, spacing, {});
}

void Session::set_objectives(const json& list, json& delta) {
    std::vector<ObjectiveSpec> specs;
    for (const auto& j : list) specs.push_back(objective_from_json(j));
    std::vector<ObjectiveSpec> current;
    for (const auto& o : objectives_) current.push_back(o.spec);
    if (specs == current) {
        delta["changed"] = false;
        return;
    }
    std::vector<Objective> next;
    std::vector<char> used(objectives_.size(), 0);
    for (const auto& s : specs) {
        bool reused = false;
        for (std::size_t i = 0; i < objectives_.size(); ++i) {
            if (!used[i] && objectives_[i].spec == s) {
                used[i] = 1;
                next.push_back(objectives_[i]);
                reused = true;
                break;
            }
        }
        if (reused) continue;
        Objective o;
        o.id = next_objective_id_++;
        o.spec = s;
        if (s.kind == ObjectiveKind::LocateAps || s.kind == ObjectiveKind::FloorPlan) o.plan = plan_for(s);
        next.push_back(std::move(o));
    }
    objectives_ = std::move(next);
    delta["changed"] = true;
    check_completion(delta);
}

void Session::check_completion(json& delta) {
    std::vector<Objective> keep;
    for (auto& o : objectives_) {
        bool done = o.terminated;
        switch (o.spec.kind) {
            case ObjectiveKind::LocateAps:
            case ObjectiveKind::FloorPlan: done = done || o.plan->done(); break;
            case ObjectiveKind::RefineTrajectories:
                done = done || (!pools_.empty() && retrace_suggestions(pools_, o.spec.theta).empty());
                break;
            case ObjectiveKind::TrackMovement:
                done = done || walker_.clock >= o.spec.query.t_end;
                if (done) {
                    json result{{"objective", o.id}, {"query", objective_to_json(o.spec)}};
                    try {
                        json pts = json::array();
                        for (const auto& p : track(o.spec.query, steps_, marks_, constellation_, scenario_.start, 0.0)) {
                            pts.push_back({p.timestamp, p.position.x, p.position.y, p.anchored});
                        }
                        result["points"] = pts;
                    } catch (const std::invalid_argument& e) {
                        result["error"] = e.what();
                    }
                    track_results_.push_back(std::move(result));
                }
                break;
        }
        if (done) {
            delta["completed"].push_back({{"id", o.id}, {"kind", to_string(o.spec.kind)}});
        } else {
            keep.push_back(std::move(o));
        }
    }
    objectives_ = std::move(keep);
}

json Session::suggestions_json() const {
    if (objectives_.empty()) return {{"objective", nullptr}, {"type", "idle"}};
    const Objective& head = objectives_.front();
    json out{{"objective", head.id}, {"kind", to_string(head.spec.kind)}};
    switch (head.spec.kind) {
        case ObjectiveKind::LocateAps:
        case ObjectiveKind::FloorPlan: {
            out["type"] = "coverage";
            json comps = json::array();
            for (const auto& c : head.plan->components) comps.push_back(points_json(c));
            out["pathway"] = comps;
            out["pending"] = head.plan->pending_count();
            std::optional<Point2> next;
            for (auto p : head.plan->pending_points()) {
                if (!next || distance(p, position()) < distance(*next, position())) next = p;
            }
            out["next"] = next ? point_json(*next) : json(nullptr);
            if (head.spec.kind == ObjectiveKind::LocateAps) {
                std::map<ApId, int> count;
                for (const auto& m : marks_) ++count[m.ap];
                std::set<ApId> heard;
                for (const auto& s : steps_) {
                    for (const auto& e : s.scan) heard.insert(e.ap);
                }
                json needed = json::array();
                for (auto ap : heard) {
                    const bool wanted = head.spec.aps.empty() ||
                                        std::find(head.spec.aps.begin(), head.spec.aps.end(), ap) != head.spec.aps.end();
                    if (wanted && count[ap] < head.spec.marks) needed.push_back(ap.to_mac());
                }
                out["marks_needed"] = needed;
            }
            break;
        }
        case ObjectiveKind::RefineTrajectories: {
            out["type"] = "refine";
            json retrace = json::array();
            for (const auto& r : retrace_suggestions(pools_, head.spec.theta)) {
                retrace.push_back({{"a", r.key.a.to_mac()},
                                   {"b", r.key.b.to_mac()},
                                   {"signature", r.key.signature},
                                   {"last_update", r.last_update},
                                   {"delta", std::isfinite(r.delta) ? json(r.delta) : json(nullptr)}});
            }
            out["retrace"] = retrace;
            GapOptions g = config_.gaps;
            g.theta = head.spec.theta;
            json gaps = json::array();
            for (const auto& s : sector_gap_paths(constellation_, pools_, learned_obstacles_, scenario_.floor.bounds(), g)) {
                gaps.push_back({{"a", s.a.to_mac()}, {"b", s.b.to_mac()}, {"path", points_json(s.path)}});
            }
            out["gaps"] = gaps;
            json sectors = json::object();
            for (const auto& [ap, slots] : sector_gap_report(constellation_, pools_, g).slots) {
                json row = json::array();
                for (const auto& s : slots) {
                    row.push_back(s.neighbor ? json{{"neighbor", s.neighbor->to_mac()}, {"status", to_string(s.status)}}
                                             : json(nullptr));
                }
                sectors[ap.to_mac()] = row;
            }
            out["sectors"] = sectors;
            break;
        }
        case ObjectiveKind::TrackMovement:
            out["type"] = "track";
            out["until"] = head.spec.query.t_end;
            break;
    }
    return out;
}

json Session::state_json() const {
    json steps = json::array();
    for (const auto& s : steps_) steps.push_back({s.timestamp, s.reported.heading(), s.reported.length(), scan_json(s.scan)});
    json marks = json::array();
    for (const auto& m : marks_) marks.push_back(mark_json(m));
    json windows = json::object();
    for (const auto& [ap, w] : open_windows_) {
        json recs = json::array();
        for (const auto& r : w) recs.push_back(record_json(r));
        windows[ap.to_mac()] = recs;
    }
    json pools = json::array();
    for (const auto& [key, pool] : pools_) pools.push_back(pool_json(pool));
    json constellation = json::object();
    for (const auto& [ap, p] : constellation_) constellation[ap.to_mac()] = point_json(p);
    json components = json::array();
    for (const auto& c : components_) {
        json ids = json::array();
        for (auto id : c) ids.push_back(id.to_mac());
        components.push_back(ids);
    }
    json objectives = json::array();
    for (std::size_t i = 0; i < objectives_.size(); ++i) {
        const auto& o = objectives_[i];
        objectives.push_back({{"id", o.id},
                              {"status", i == 0 ? "active" : "pending"},
                              {"spec", objective_to_json(o.spec)},
                              {"plan", o.plan ? coverage_plan_to_json(*o.plan) : json(nullptr)},
                              {"terminated", o.terminated}});
    }
    json obstacles = json::array();
    for (const auto& o : learned_obstacles_) obstacles.push_back(points_json(o.vertices));
    json events = json::array();
    for (const auto& e : events_) events.push_back({{"seq", e.seq}, {"command", e.command}, {"delta", e.delta}});
    std::ostringstream rng;
    rng << rng_;
    return {{"format", "chi-walk-session"},
            {"version", kSessionSchemaVersion},
            {"scenario", scenario_to_json(scenario_)},
            {"config", session_config_to_json(config_)},
            {"seed", seed_},
            {"closed", closed_},
            {"walker",
             {{"x", walker_.true_position.x},
              {"y", walker_.true_position.y},
              {"heading", walker_.true_heading},
              {"clock", walker_.clock}}},
            {"position", point_json(position())},
            {"steps", steps},
            {"marks", marks},
            {"open_windows", windows},
            {"finalized_pairs", finalized_pairs_},
            {"trajectories", trajectory_count_},
            {"pools", pools},
            {"constellation", constellation},
            {"components", components},
            {"objectives", objectives},
            {"next_objective_id", next_objective_id_},
            {"floorplan", floorplan_to_json(floorplan_)},
            {"learned_obstacles", obstacles},
            {"track_results", track_results_},
            {"events", events},
            {"rng", rng.str()}};
}

void save_session(const Session& session, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << session.canonical_state() << '\n';
    if (!f) throw std::runtime_error("failed writing " + path);
}

Session session_from_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("session file must hold a JSON object");
    if (doc.value("format", std::string()) != "chi-walk-session") throw std::invalid_argument("not a chi-walk session file");
    if (!doc.contains("version") || !doc["version"].is_number_integer()) {
        throw std::invalid_argument("session file has no schema version");
    }
    const int version = doc["version"].get<int>();
    if (version != kSessionSchemaVersion) {
        throw std::invalid_argument("unsupported session schema version " + std::to_string(version) + " (this build reads version " +
                                    std::to_string(kSessionSchemaVersion) + ")");
    }
    static const std::set<std::string> known{
        "format", "version", "scenario", "config", "seed", "closed", "walker", "position", "steps", "marks",
        "open_windows", "finalized_pairs", "trajectories", "pools", "constellation", "components", "objectives",
        "next_objective_id", "floorplan", "learned_obstacles", "track_results", "events", "rng"};
    for (const auto& [k, v] : doc.items()) {
        if (!known.count(k)) {
            throw std::invalid_argument("unknown field '" + k + "' for session schema version " + std::to_string(version));
        }
    }
    for (const auto& k : known) {
        if (!doc.contains(k)) throw std::invalid_argument("session file is missing field '" + k + "'");
    }
    Session s(scenario_from_json(doc["scenario"]), session_config_from_json(doc["config"]), doc["seed"].get<std::uint64_t>());
    for (const auto& e : doc["events"]) s.tick(e.at("command"));
    if (s.canonical_state() != doc.dump()) {
        throw ReplayMismatchError("replaying the event log does not reproduce the stored session state");
    }
    return s;
}

Session load_session(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("corrupt session file: ") + e.what());
    }
    return session_from_json(doc);
}

}  // namespace chiloc
