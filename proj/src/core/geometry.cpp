#include "chiloc/core/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "chiloc/core/records.hpp"

namespace chiloc {

std::string ApId::to_mac() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "02:00:%02x:%02x:%02x:%02x", (value >> 24) & 0xffu, (value >> 16) & 0xffu,
                  (value >> 8) & 0xffu, value & 0xffu);
    return buf;
}

ApId ApId::parse(const std::string& text) {
    if (text.find(':') == std::string::npos) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(text, &used, 10);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad AP id: '" + text + "'");
        }
        if (used != text.size() || v > 0xffffffffUL) throw std::invalid_argument("bad AP id: '" + text + "'");
        return ApId{static_cast<std::uint32_t>(v)};
    }
    unsigned b[6];
    char tail = 0;
    if (std::sscanf(text.c_str(), "%2x:%2x:%2x:%2x:%2x:%2x%c", &b[0], &b[1], &b[2], &b[3], &b[4], &b[5], &tail) != 6) {
        throw std::invalid_argument("bad AP MAC address: '" + text + "'");
    }
    return ApId{(b[2] << 24) | (b[3] << 16) | (b[4] << 8) | b[5]};
}

double normalize_heading(double deg) {
    double h = std::fmod(deg, 360.0);
    if (h < 0.0) h += 360.0;
    // fmod of a tiny negative can round up to exactly 360
    if (h >= 360.0) h = 0.0;
    return h;
}

double heading_diff(double a, double b) {
    double d = std::fabs(normalize_heading(a) - normalize_heading(b));
    return d > 180.0 ? 360.0 - d : d;
}

double bearing_of(Vec2 v) {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    return normalize_heading(rad_to_deg(std::atan2(v.y, v.x)));
}

DisplacementVector::DisplacementVector(double heading_deg, double length)
    : heading_(normalize_heading(heading_deg)), length_(length) {
    if (!(length >= 0.0) || !std::isfinite(length)) throw std::invalid_argument("displacement length must be finite and >= 0");
    if (!std::isfinite(heading_deg)) throw std::invalid_argument("displacement heading must be finite");
}

DisplacementVector DisplacementVector::from_offset(Vec2 offset) {
    return DisplacementVector(bearing_of(offset), offset.norm());
}

Vec2 DisplacementVector::offset() const {
    const double r = deg_to_rad(heading_);
    return {length_ * std::cos(r), length_ * std::sin(r)};
}

Vec2 sum_displacements(std::span<const DisplacementVector> vectors) {
    Vec2 total;
    for (const auto& v : vectors) total += v.offset();
    return total;
}

double polyline_length(std::span<const Point2> points) {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
    return total;
}

double ApToApTrajectory::path_length() const {
    double total = 0.0;
    for (const auto& v : vectors) total += v.length();
    return total;
}

Rect bounding_box(std::span<const Point2> points) {
    if (points.empty()) throw std::invalid_argument("bounding box of an empty point set");
    Rect r{points.front(), points.front()};
    for (auto p : points) {
        r.min.x = std::min(r.min.x, p.x);
        r.min.y = std::min(r.min.y, p.y);
        r.max.x = std::max(r.max.x, p.x);
        r.max.y = std::max(r.max.y, p.y);
    }
    return r;
}

bool Polygon::contains(Point2 p) const {
    // even-odd ray casting; boundary points count as inside
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices[i];
        const Point2 b = vertices[j];
        if (point_segment_distance(p, a, b) <= 1e-12) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double Polygon::area() const {
    double s = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices[i];
        const Point2 b = vertices[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    return std::fabs(s) * 0.5;
}

Polygon rect_polygon(const Rect& r) {
    return Polygon{{r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}}};
}

Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 == 0.0) return a;
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return a + ab * t;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    return distance(p, closest_point_on_segment(p, a, b));
}

double point_polyline_distance(Point2 p, std::span<const Point2> polyline) {
    if (polyline.empty()) return std::numeric_limits<double>::infinity();
    if (polyline.size() == 1) return distance(p, polyline.front());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < polyline.size(); ++i) {
        best = std::min(best, point_segment_distance(p, polyline[i - 1], polyline[i]));
    }
    return best;
}

namespace {

int orientation(Point2 a, Point2 b, Point2 c) {
    const double v = (b - a).cross(c - a);
    if (std::fabs(v) <= 1e-12) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
    return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
           std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

bool segment_hits_polygon(Point2 a, Point2 b, const Polygon& poly) {
    if (poly.contains(a) || poly.contains(b)) return true;
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segments_intersect(a, b, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
    }
    return false;
}

std::optional<double> first_boundary_hit(Point2 a, Point2 b, const Polygon& poly) {
    const Vec2 d = b - a;
    std::optional<double> best;
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 c = poly.vertices[i];
        const Vec2 e = poly.vertices[(i + 1) % n] - c;
        const double denom = d.cross(e);
        if (std::fabs(denom) < 1e-15) continue;
        const Vec2 ac = c - a;
        const double t = ac.cross(e) / denom;
        const double u = ac.cross(d) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
            if (!best || t < *best) best = t;
        }
    }
    return best;
}

Polygon convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return Polygon{pts};
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(p - hull[k - 2]) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        const Point2 p = pts[i];
        while (k >= lower && (hull[k - 1] - hull[k - 2]).cross(p - hull[k - 2]) <= 0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return Polygon{hull};
}

double directed_hausdorff(std::span<const Point2> from, std::span<const Point2> to) {
    double worst = 0.0;
    for (auto p : from) worst = std::max(worst, point_polyline_distance(p, to));
    return worst;
}

}  // namespace chiloc
