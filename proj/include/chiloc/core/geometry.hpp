#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chiloc {

/// Planar offset between two positions, in abstract length units.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    friend constexpr bool operator==(Vec2, Vec2) = default;

    double norm() const { return std::hypot(x, y); }
    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
};

/// Position on the floor. Subtracting two points yields the offset between them.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Point2 operator+(Vec2 v) const { return {x + v.x, y + v.y}; }
    constexpr Point2 operator-(Vec2 v) const { return {x - v.x, y - v.y}; }
    constexpr Vec2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
    constexpr Point2& operator+=(Vec2 v) { x += v.x; y += v.y; return *this; }
    friend constexpr bool operator==(Point2, Point2) = default;

    constexpr Vec2 as_vec() const { return {x, y}; }
};

inline double distance(Point2 a, Point2 b) { return (b - a).norm(); }

/// Opaque access-point identifier. Exported as a locally administered MAC address.
struct ApId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(ApId, ApId) = default;

    std::string to_mac() const;
    /// Accepts "02:00:00:00:00:2a" style addresses or a plain decimal id.
    static ApId parse(const std::string& text);
};

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Maps any finite angle into [0, 360).
double normalize_heading(double deg);

/// Smallest absolute angular separation of two headings, in [0, 180].
double heading_diff(double a, double b);

/// Bearing of an offset in degrees, [0, 360). The zero offset has bearing 0.
double bearing_of(Vec2 v);

/// One planar step of the laborer: heading in [0, 360) and a non-negative length.
class DisplacementVector {
public:
    DisplacementVector() = default;
    DisplacementVector(double heading_deg, double length);

    static DisplacementVector from_offset(Vec2 offset);

    double heading() const { return heading_; }
    double length() const { return length_; }
    Vec2 offset() const;

    friend bool operator==(const DisplacementVector&, const DisplacementVector&) = default;

private:
    double heading_ = 0.0;
    double length_ = 0.0;
};

Vec2 sum_displacements(std::span<const DisplacementVector> vectors);

double polyline_length(std::span<const Point2> points);

/// Axis-aligned rectangle, min corner inclusive.
struct Rect {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double area() const { return width() * height(); }
    bool contains(Point2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    bool intersects(const Rect& o) const {
        return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

Rect bounding_box(std::span<const Point2> points);

/// Simple polygon given by its vertices in order (closed implicitly).
struct Polygon {
    std::vector<Point2> vertices;

    bool contains(Point2 p) const;
    double area() const;
    friend bool operator==(const Polygon&, const Polygon&) = default;
};

Polygon rect_polygon(const Rect& r);

struct Segment {
    Point2 a;
    Point2 b;
};

double point_segment_distance(Point2 p, Point2 a, Point2 b);
Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b);
double point_polyline_distance(Point2 p, std::span<const Point2> polyline);

/// Proper or touching intersection of two closed segments.
bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2);

/// True when the segment touches the polygon's interior or boundary.
bool segment_hits_polygon(Point2 a, Point2 b, const Polygon& poly);

/// Parameter t in [0,1] of the first point where segment a->b meets the polygon boundary.
std::optional<double> first_boundary_hit(Point2 a, Point2 b, const Polygon& poly);

/// Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped.
Polygon convex_hull(std::vector<Point2> points);

/// Largest directed distance from points of `from` to the polyline `to`.
double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to);

}  // namespace chiloc

template <>
struct std::hash<chiloc::ApId> {
    std::size_t operator()(chiloc::ApId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
