#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "chiloc/core/sectors.hpp"
#include "chiloc/positioning/positioning.hpp"

namespace chiloc {

enum class GapStatus { Missing, Collected, Converged };

const char* to_string(GapStatus s);

struct SectorSlot {
    std::optional<ApId> neighbor;
    GapStatus status = GapStatus::Missing;
};

struct SectorGapReport {
    std::map<ApId, std::array<SectorSlot, kSectorCount>> slots;

    /// Unordered AP pairs (a < b) still missing in some sector.
    std::vector<std::pair<ApId, ApId>> missing_pairs() const;
};

struct GapOptions {
    double neighbor_range = 20.0;  // neighbours further than this are not sector candidates
    double theta = 1.0;            // convergence threshold for the Converged status
    double grid_spacing = 5.0;     // search lattice spacing
    double mark_radius = 10.0;     // third-AP exclusion disk

    friend bool operator==(const GapOptions&, const GapOptions&) = default;
};

/// Nearest constellation neighbour in each of the 8 sectors around every AP, with the
/// collection status of the pair's pools.
SectorGapReport sector_gap_report(const PositionMap& constellation, const PoolMap& pools, const GapOptions& options);

struct GapSuggestion {
    ApId a;
    ApId b;
    std::vector<Point2> path;  // from a's position to b's position
};

/// Paths for every missing sector pair that avoid obstacles and the mark disks of third
/// APs. Pairs with no such path inside `area` are omitted.
std::vector<GapSuggestion> sector_gap_paths(const PositionMap& constellation, const PoolMap& pools,
                                            std::span<const Polygon> obstacles, const Rect& area,
                                            const GapOptions& options);

/// Grid A* between two points (8-connected). `blocked_disks` are (centre, radius) pairs.
std::optional<std::vector<Point2>> grid_path(Point2 from, Point2 to, std::span<const Polygon> obstacles,
                                             std::span<const std::pair<Point2, double>> blocked_disks,
                                             const Rect& area, double spacing);

struct RetraceSuggestion {
    PoolKey key;
    double last_update = 0.0;
    double delta = 0.0;  // distance between the last two compounds; infinity with one fusion
};

/// Positioning-selected pools that have not converged, oldest update first.
std::vector<RetraceSuggestion> retrace_suggestions(const PoolMap& pools, double theta);

}  // namespace chiloc
