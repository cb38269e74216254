#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "chiloc/core/geometry.hpp"
#include "chiloc/planner/coverage.hpp"
#include "chiloc/planner/tracking.hpp"

namespace chiloc {

enum class ObjectiveKind { LocateAps, RefineTrajectories, TrackMovement, FloorPlan };

const char* to_string(ObjectiveKind k);

/// What the operator asked for. Two specs compare equal when every field matches.
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::LocateAps;
    std::optional<Rect> area;   // LocateAps: area of interest (whole floor when absent)
    std::vector<ApId> aps;      // LocateAps: APs of interest (all when empty)
    int marks = 1;              // LocateAps: AP-marks wanted per AP of interest
    double theta = 1.0;         // RefineTrajectories: convergence threshold
    TrackQuery query;           // TrackMovement
    double width = 0.0;         // FloorPlan
    double height = 0.0;        // FloorPlan

    friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

/// Throws std::invalid_argument on malformed input.
ObjectiveSpec objective_from_json(const nlohmann::json& j);
nlohmann::json objective_to_json(const ObjectiveSpec& spec);

struct Objective {
    std::uint32_t id = 0;
    ObjectiveSpec spec;
    std::optional<CoveragePlan> plan;  // LocateAps and FloorPlan
    bool terminated = false;

    friend bool operator==(const Objective&, const Objective&) = default;
};

nlohmann::json coverage_plan_to_json(const CoveragePlan& plan);
CoveragePlan coverage_plan_from_json(const nlohmann::json& j);

}  // namespace chiloc
