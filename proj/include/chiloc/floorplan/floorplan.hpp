#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chiloc/core/geometry.hpp"

namespace chiloc {

struct PlanRuleConfig {
    double closure_radius = 1.5;
    double overlap_tolerance = 1.0;
    double turn_length_threshold = 5.0;
    double polyline_fit_tolerance = 1.0;
    double straight_threshold = 20.0;   // degrees; heading spread allowed inside a straight run
    double min_straight_length = 2.0;   // a run this long bounds a turn
    double passage_width = 2.0;
    double room_snap_ratio = 0.9;       // hull/bounding-box area ratio that snaps a room to its box

    void validate() const;

    friend bool operator==(const PlanRuleConfig&, const PlanRuleConfig&) = default;
};

enum class ComponentKind { Passage, Entrance, Room };
enum class ComponentSource { Inferred, Corrected };

const char* to_string(ComponentKind k);
const char* to_string(ComponentSource s);

struct FloorComponent {
    std::uint32_t id = 0;
    ComponentKind kind = ComponentKind::Passage;
    ComponentSource source = ComponentSource::Inferred;
    bool locked = false;

    std::vector<Point2> polyline;    // Passage
    std::optional<Point2> block;     // Passage ending in a dead end
    Polygon outline;                 // Room: snapped rectangle or hull
    Polygon hull;                    // Room: convex hull of the evidence
    Point2 position;                 // Entrance
    double width = 0.0;              // Entrance and Passage
    std::optional<std::uint32_t> room;  // Entrance: owning room

    /// Passage: within width/2 of the polyline. Room: inside the outline. Entrance: within width/2.
    bool covers(Point2 p) const;
    Rect extent() const;

    friend bool operator==(const FloorComponent&, const FloorComponent&) = default;
};

struct ClosedPath {
    std::size_t first = 0;  // index into the trajectory
    std::size_t last = 0;   // inclusive
};

/// Greedy scan for maximal, time-disjoint sub-paths whose endpoints are within
/// `closure_radius` of each other and which move further than that radius in between.
std::vector<ClosedPath> detect_closed_paths(std::span<const Point2> trajectory, double closure_radius);

enum class LoopKind { DeadEnd, Room };

struct LoopClass {
    LoopKind kind = LoopKind::DeadEnd;
    Point2 far_point;  // split point (the block for a dead end)
    Point2 closure;    // midpoint of the loop's endpoints (the entrance for a room)
    Polygon hull;
    Polygon outline;
};

LoopClass classify_loop(std::span<const Point2> loop, const PlanRuleConfig& config);

struct TurnRoom {
    Polygon hull;
    Polygon outline;
    Point2 entrance_in;
    Point2 entrance_out;
};

/// A turn bounded by straight first and last segments becomes a room when it is longer
/// than the threshold and strays from the broken line formed by extending those two
/// segments to their intersection.
std::optional<TurnRoom> classify_turn(std::span<const Point2> sub_path, const PlanRuleConfig& config);

/// Sub-paths between consecutive straight runs of a trajectory (each including the
/// adjacent end segments of the bounding runs), as index ranges.
std::vector<ClosedPath> extract_turns(std::span<const Point2> trajectory, const PlanRuleConfig& config);

struct FloorPlan {
    double width = 0.0;
    double height = 0.0;
    std::vector<FloorComponent> components;  // ascending id

    const FloorComponent* find(std::uint32_t id) const;

    friend bool operator==(const FloorPlan&, const FloorPlan&) = default;
};

struct InferenceDiff {
    std::vector<std::uint32_t> added;
    std::vector<std::uint32_t> removed;
    std::vector<std::uint32_t> overwritten;  // corrected, unlocked components replaced by inference
};

/// Re-derives every inferred component from the trajectories. Locked components are kept
/// verbatim and suppress overlapping inferred rooms. Corrected, unlocked components are
/// kept unless an inferred room overlaps them.
FloorPlan apply_inference(const FloorPlan& plan, std::span<const std::vector<Point2>> trajectories,
                          const PlanRuleConfig& config, InferenceDiff* diff = nullptr);

struct ComponentEdit {
    std::optional<ComponentKind> kind;
    std::optional<std::vector<Point2>> polyline;
    std::optional<Polygon> outline;
    std::optional<Point2> position;
    std::optional<double> width;
};

/// Throws std::out_of_range for an unknown id and std::logic_error for a locked component.
FloorPlan correct_component(const FloorPlan& plan, std::uint32_t id, const ComponentEdit& edit, bool lock);

nlohmann::json floorplan_to_json(const FloorPlan& plan);
FloorPlan floorplan_from_json(const nlohmann::json& j);
std::string floorplan_to_svg(const FloorPlan& plan, std::span<const std::vector<Point2>> trajectories = {});

}  // namespace chiloc
