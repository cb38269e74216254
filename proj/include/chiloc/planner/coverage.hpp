#pragma once

#include <span>
#include <vector>

#include "chiloc/core/geometry.hpp"

namespace chiloc {

/// Axis-aligned lattice anchored at the area's lower-left corner. The far edges are
/// added when the spacing does not divide the extent. Points inside obstacles are
/// dropped. Sorted by (y, x).
std::vector<Point2> grid_points(const Rect& area, double spacing, std::span<const Polygon> obstacles = {});

/// Visits every point once, starting from the point nearest `start`.
///
/// A complete lattice gets the serpentine order with the first row walked left to right.
/// Other point sets get a nearest-neighbour tour improved with 2-opt and or-opt moves.
std::vector<Point2> shortest_hamilton_path(std::span<const Point2> points, Point2 start);

std::vector<Point2> nearest_neighbor_path(std::span<const Point2> points, Point2 start);
/// Local search on an open path with a fixed first point. Returns the number of passes.
std::size_t improve_path(std::vector<Point2>& path, std::size_t max_passes = 10000);

struct CoveragePlan {
    double spacing = 0.0;
    Point2 start;
    std::vector<std::vector<Point2>> components;
    std::vector<Polygon> obstacles;  // obstacles known when the plan was last updated

    std::size_t pending_count() const;
    std::vector<Point2> pending_points() const;
    bool done() const { return pending_count() == 0; }

    friend bool operator==(const CoveragePlan&, const CoveragePlan&) = default;
};

/// Lattice over `area` ordered into a single suggested pathway.
CoveragePlan make_coverage_plan(const Rect& area, double spacing, Point2 start, std::span<const Polygon> obstacles = {});

/// Removes points within `radius` of the walked polyline (distance <= radius), bridges the
/// remaining neighbours of each component, drops points inside newly known obstacles and
/// splits every pathway edge that crosses one. Components are never reconnected.
CoveragePlan update_coverage(CoveragePlan plan, std::span<const Point2> trajectory, double radius,
                             std::span<const Polygon> new_obstacles = {});

}  // namespace chiloc
