#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chiloc/floorplan/floorplan.hpp"

using namespace chiloc;

namespace {

// Samples the polyline through `corners` every `step` units, keeping every corner.
std::vector<Point2> densify(std::vector<Point2> corners, double step = 0.5) {
    std::vector<Point2> out{corners.front()};
    for (std::size_t i = 1; i < corners.size(); ++i) {
        const Point2 a = corners[i - 1], b = corners[i];
        const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / step)));
        for (int k = 1; k <= n; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / n));
    }
    return out;
}

std::vector<Point2> out_and_back() { return densify({{0, 0}, {10, 0}, {10, 0.3}, {0, 0.3}}); }

std::vector<Point2> rectangle_loop() { return densify({{0, 0}, {8, 0}, {8, 6}, {0, 6}, {0, 0.5}}); }

// Straight lead-in, half circle of length `arc`, straight lead-out, all along +x overall.
std::vector<Point2> detour(double lead, double arc, int samples = 24) {
    const double r = arc / std::numbers::pi;
    std::vector<Point2> p{{-lead, 0}};
    for (int k = 0; k <= samples; ++k) {
        const double a = std::numbers::pi * (1.0 - static_cast<double>(k) / samples);
        p.push_back({r + r * std::cos(a), r * std::sin(a)});
    }
    p.push_back({2 * r + lead, 0});
    return p;
}

std::size_t count_kind(const FloorPlan& plan, ComponentKind k) {
    std::size_t n = 0;
    for (const auto& c : plan.components) n += c.kind == k;
    return n;
}

const FloorComponent* first_of(const FloorPlan& plan, ComponentKind k) {
    for (const auto& c : plan.components) {
        if (c.kind == k) return &c;
    }
    return nullptr;
}

FloorPlan infer(const std::vector<Point2>& t, const FloorPlan& base = {30, 30, {}}, InferenceDiff* diff = nullptr) {
    const std::vector<std::vector<Point2>> ts{t};
    return apply_inference(base, ts, PlanRuleConfig{}, diff);
}

}  // namespace

TEST_CASE("rule parameters must be positive") {
    PlanRuleConfig c;
    CHECK_NOTHROW(c.validate());
    c.overlap_tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("closed path detection") {
    CHECK(detect_closed_paths(out_and_back(), 1.5).size() == 1);
    CHECK(detect_closed_paths(densify({{0, 0}, {20, 0}}), 1.5).empty());
    const auto rect = rectangle_loop();
    const auto loops = detect_closed_paths(rect, 1.5);
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].first == 0);
    CHECK(loops[0].last == rect.size() - 1);

    SUBCASE("two loops in sequence are time-disjoint") {
        auto walk = out_and_back();
        const auto second = densify({{0, 0.3}, {0, -10}, {0, -20}, {0.3, -20}, {0.3, -10}});
        walk.insert(walk.end(), second.begin() + 1, second.end());
        const auto two = detect_closed_paths(walk, 1.5);
        REQUIRE(two.size() == 2);
        CHECK(two[0].last <= two[1].first);
    }
}

TEST_CASE("out-and-back loop is a dead end blocked at its far point") {
    const auto loop = out_and_back();
    const LoopClass lc = classify_loop(loop, PlanRuleConfig{});
    CHECK(lc.kind == LoopKind::DeadEnd);
    CHECK(lc.far_point.x == doctest::Approx(10.0));

    const FloorPlan plan = infer(loop);
    CHECK(count_kind(plan, ComponentKind::Room) == 0);
    const FloorComponent* p = first_of(plan, ComponentKind::Passage);
    REQUIRE(p != nullptr);
    REQUIRE(p->block.has_value());
    CHECK(p->block->x == doctest::Approx(10.0));
}

TEST_CASE("rectangular loop is a room with one entrance at the closure") {
    const auto loop = rectangle_loop();
    const LoopClass lc = classify_loop(loop, PlanRuleConfig{});
    REQUIRE(lc.kind == LoopKind::Room);
    for (auto q : loop) CHECK(lc.hull.contains(q));
    CHECK(lc.outline.area() == doctest::Approx(48.0));

    const FloorPlan plan = infer(loop);
    CHECK(count_kind(plan, ComponentKind::Room) == 1);
    REQUIRE(count_kind(plan, ComponentKind::Entrance) == 1);
    const FloorComponent* e = first_of(plan, ComponentKind::Entrance);
    CHECK(e->position.x == doctest::Approx(0.0));
    CHECK(e->position.y == doctest::Approx(0.25));
    CHECK(e->room == first_of(plan, ComponentKind::Room)->id);
}

TEST_CASE("loop width exactly at the overlap tolerance still overlaps") {
    const PlanRuleConfig config;
    const auto at = densify({{0, 0}, {10, 0}, {10, config.overlap_tolerance}, {0, config.overlap_tolerance}});
    CHECK(classify_loop(at, config).kind == LoopKind::DeadEnd);
    const auto wider = densify({{0, 0}, {10, 0}, {10, 1.2}, {0, 1.2}});
    CHECK(classify_loop(wider, config).kind == LoopKind::Room);
}

TEST_CASE("loop class does not depend on walking direction") {
    for (auto loop : {out_and_back(), rectangle_loop()}) {
        std::vector<Point2> rev(loop.rbegin(), loop.rend());
        CHECK(classify_loop(loop, {}).kind == classify_loop(rev, {}).kind);
    }
}

TEST_CASE("turn classification") {
    const PlanRuleConfig config;
    SUBCASE("short sharp corner") { CHECK_FALSE(classify_turn(densify({{0, 0}, {1.5, 0}, {1.5, 1.5}}), config)); }
    SUBCASE("long turn that is exactly two segments") {
        const auto p = densify({{0, 0}, {3, 0}, {3, 3}});
        CHECK(polyline_length(p) == doctest::Approx(6.0));
        CHECK_FALSE(classify_turn(p, config));
    }
    SUBCASE("half-circle detour of length six") {
        const auto p = detour(0.5, 5.0);
        CHECK(polyline_length(p) == doctest::Approx(6.0).epsilon(0.01));
        const auto room = classify_turn(p, config);
        REQUIRE(room);
        CHECK(room->entrance_in == p.front());
        CHECK(room->entrance_out == p.back());
        for (auto q : p) CHECK(room->hull.contains(q));
    }
    SUBCASE("detour below the length threshold") { CHECK_FALSE(classify_turn(detour(0.25, 4.0), config)); }
}

TEST_CASE("long detour inside a walk becomes a room with two entrances") {
    auto walk = densify({{-6, 0}, {-0.5, 0}});
    const auto d = detour(0.5, 5.0);
    walk.insert(walk.end(), d.begin() + 1, d.end());
    const auto tail = densify({d.back(), {d.back().x + 6, 0}});
    walk.insert(walk.end(), tail.begin() + 1, tail.end());

    const FloorPlan plan = infer(walk);
    CHECK(count_kind(plan, ComponentKind::Room) == 1);
    CHECK(count_kind(plan, ComponentKind::Entrance) == 2);

    const auto corner = densify({{0, 0}, {8, 0}, {8, 8}});
    const FloorPlan corner_plan = infer(corner);
    CHECK(count_kind(corner_plan, ComponentKind::Room) == 0);
}

TEST_CASE("straight walk infers one passage covering it") {
    const auto walk = densify({{1, 1}, {15, 1}});
    const FloorPlan plan = infer(walk);
    REQUIRE(plan.components.size() == 1);
    CHECK(plan.components[0].kind == ComponentKind::Passage);
    CHECK(plan.components[0].source == ComponentSource::Inferred);
    for (auto q : walk) CHECK(plan.components[0].covers(q));
}

TEST_CASE("every trajectory point is covered by some component") {
    for (const auto& walk : {out_and_back(), rectangle_loop(), detour(3.0, 9.0)}) {
        const FloorPlan plan = infer(walk);
        for (auto q : walk) {
            bool covered = false;
            for (const auto& c : plan.components) covered = covered || c.covers(q);
            CHECK(covered);
        }
    }
}

TEST_CASE("inference is idempotent") {
    const FloorPlan once = infer(rectangle_loop());
    InferenceDiff diff;
    const FloorPlan twice = infer(rectangle_loop(), once, &diff);
    CHECK(twice == once);
    CHECK(diff.added.empty());
    CHECK(diff.removed.empty());
    CHECK(diff.overwritten.empty());
}

TEST_CASE("locked room survives reinference unchanged") {
    const FloorPlan inferred = infer(rectangle_loop());
    const FloorComponent* room = first_of(inferred, ComponentKind::Room);
    REQUIRE(room != nullptr);
    ComponentEdit edit;
    edit.outline = rect_polygon({{-1, -1}, {9, 7}});
    const FloorPlan locked = correct_component(inferred, room->id, edit, true);
    const FloorComponent before = *locked.find(room->id);
    CHECK(before.locked);
    CHECK(before.source == ComponentSource::Corrected);

    FloorPlan plan = locked;
    for (int i = 0; i < 5; ++i) plan = infer(rectangle_loop(), plan);
    REQUIRE(plan.find(room->id) != nullptr);
    CHECK(*plan.find(room->id) == before);
    CHECK(count_kind(plan, ComponentKind::Room) == 1);

    CHECK_THROWS_AS(correct_component(plan, room->id, edit, false), std::logic_error);
}

TEST_CASE("unlocked correction may be overwritten and is reported") {
    const FloorPlan inferred = infer(rectangle_loop());
    const std::uint32_t id = first_of(inferred, ComponentKind::Room)->id;
    ComponentEdit edit;
    edit.outline = rect_polygon({{1, 1}, {5, 5}});
    const FloorPlan corrected = correct_component(inferred, id, edit, false);
    CHECK(corrected.find(id)->outline.area() == doctest::Approx(16.0));

    InferenceDiff diff;
    const FloorPlan rerun = infer(rectangle_loop(), corrected, &diff);
    CHECK(rerun.find(id) == nullptr);
    CHECK(diff.overwritten == std::vector<std::uint32_t>{id});
    CHECK(count_kind(rerun, ComponentKind::Room) == 1);
}

TEST_CASE("correction errors") {
    const FloorPlan plan = infer(densify({{0, 0}, {10, 0}}));
    CHECK_THROWS_AS(correct_component(plan, 999, {}, false), std::out_of_range);
    ComponentEdit to_room;
    to_room.kind = ComponentKind::Room;
    CHECK_THROWS_AS(correct_component(plan, plan.components[0].id, to_room, false), std::invalid_argument);
    ComponentEdit narrow;
    narrow.kind = ComponentKind::Entrance;
    narrow.width = -1.0;
    CHECK_THROWS_AS(correct_component(plan, plan.components[0].id, narrow, false), std::invalid_argument);
}

TEST_CASE("floor plan json round trip and svg") {
    FloorPlan plan = infer(out_and_back());
    const FloorPlan rooms = infer(rectangle_loop());
    plan.components.insert(plan.components.end(), rooms.components.begin(), rooms.components.end());
    for (std::size_t i = 0; i < plan.components.size(); ++i) plan.components[i].id = static_cast<std::uint32_t>(i + 1);
    plan.components.back().locked = true;
    const FloorPlan back = floorplan_from_json(floorplan_to_json(plan));
    CHECK(back == plan);
    CHECK(floorplan_to_json(back).dump() == floorplan_to_json(plan).dump());

    nlohmann::json bad = floorplan_to_json(plan);
    bad["components"][0]["kind"] = "atrium";
    CHECK_THROWS_AS(floorplan_from_json(bad), std::invalid_argument);

    const std::vector<std::vector<Point2>> ts{out_and_back()};
    const std::string svg = floorplan_to_svg(plan, ts);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polygon") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}
