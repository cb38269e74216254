#include "chiloc/planner/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace chiloc {

namespace {

std::vector<double> axis_values(double lo, double hi, double spacing) {
    std::vector<double> v;
    const double eps = 1e-9 * std::max(1.0, hi - lo);
    for (std::size_t k = 0;; ++k) {
        const double x = lo + static_cast<double>(k) * spacing;
        if (x > hi + eps) break;
        v.push_back(std::min(x, hi));
    }
    if (hi - v.back() > eps) v.push_back(hi);
    return v;
}

bool by_row(Point2 a, Point2 b) { return a.y < b.y || (a.y == b.y && a.x < b.x); }

std::size_t nearest_index(std::span<const Point2> pts, Point2 p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double di = distance(pts[i], p), db = distance(pts[best], p);
        if (di < db || (di == db && by_row(pts[i], pts[best]))) best = i;
    }
    return best;
}

// Serpentine order when the point set is exactly the product of its x and y values.
bool serpentine(std::span<const Point2> pts, std::vector<Point2>& out) {
    std::set<double> xs, ys;
    for (auto p : pts) {
        xs.insert(p.x);
        ys.insert(p.y);
    }
    if (xs.size() * ys.size() != pts.size()) return false;
    std::set<std::pair<double, double>> have;
    for (auto p : pts) have.insert({p.x, p.y});
    if (have.size() != pts.size()) return false;
    out.clear();
    bool forward = true;
    for (double y : ys) {
        if (forward) {
            for (double x : xs) out.push_back({x, y});
        } else {
            for (auto it = xs.rbegin(); it != xs.rend(); ++it) out.push_back({*it, y});
        }
        forward = !forward;
    }
    return true;
}

}  // namespace

std::vector<Point2> grid_points(const Rect& area, double spacing, std::span<const Polygon> obstacles) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    if (!(area.max.x > area.min.x) || !(area.max.y > area.min.y)) throw std::invalid_argument("degenerate grid area");
    std::vector<Point2> out;
    for (double y : axis_values(area.min.y, area.max.y, spacing)) {
        for (double x : axis_values(area.min.x, area.max.x, spacing)) {
            const Point2 p{x, y};
            if (std::none_of(obstacles.begin(), obstacles.end(), [&](const Polygon& o) { return o.contains(p); })) {
                out.push_back(p);
            }
        }
    }
    return out;
}

std::vector<Point2> nearest_neighbor_path(std::span<const Point2> points, Point2 start) {
    std::vector<Point2> rest(points.begin(), points.end());
    std::vector<Point2> path;
    if (rest.empty()) return path;
    Point2 cur = start;
    while (!rest.empty()) {
        const std::size_t i = nearest_index(rest, cur);
        cur = rest[i];
        path.push_back(cur);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return path;
}

std::size_t improve_path(std::vector<Point2>& path, std::size_t max_passes) {
    const std::size_t n = path.size();
    if (n < 4) return 0;
    auto d = [&](std::size_t i, std::size_t j) { return distance(path[i], path[j]); };
    const double eps = 1e-10;
    std::size_t passes = 0;
    bool improved = true;
    while (improved && passes < max_passes) {
        improved = false;
        ++passes;
        // 2-opt: reverse path[i+1..j]; the first point stays fixed, the tail end is free.
        for (std::size_t i = 0; i + 2 < n; ++i) {
            for (std::size_t j = i + 2; j < n; ++j) {
                const double before = d(i, i + 1) + (j + 1 < n ? d(j, j + 1) : 0.0);
                const double after = d(i, j) + (j + 1 < n ? d(i + 1, j + 1) : 0.0);
                if (after < before - eps) {
                    std::reverse(path.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                 path.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    improved = true;
                }
            }
        }
        // or-opt: move a run of 1..3 points elsewhere, either orientation.
        for (std::size_t len = 1; len <= 3; ++len) {
            for (std::size_t s = 1; s + len <= n; ++s) {
                const std::size_t e = s + len - 1;
                const double remove_gain = d(s - 1, s) + (e + 1 < n ? d(e, e + 1) - d(s - 1, e + 1) : 0.0);
                for (std::size_t k = 0; k < n; ++k) {
                    if (k + 1 >= s && k <= e) continue;  // insertion edge (k, k+1) must lie outside the run
                    const bool tail = k + 1 == n;
                    for (int flip = 0; flip < 2; ++flip) {
                        const std::size_t first = flip ? e : s;
                        const std::size_t last = flip ? s : e;
                        const double add = d(k, first) + (tail ? 0.0 : d(last, k + 1) - d(k, k + 1));
                        if (add < remove_gain - eps) {
                            std::vector<Point2> run(path.begin() + static_cast<std::ptrdiff_t>(s),
                                                    path.begin() + static_cast<std::ptrdiff_t>(e + 1));
                            if (flip) std::reverse(run.begin(), run.end());
                            std::vector<Point2> next;
                            next.reserve(n);
                            for (std::size_t i = 0; i < n; ++i) {
                                if (i >= s && i <= e) continue;
                                next.push_back(path[i]);
                                if (i == k) next.insert(next.end(), run.begin(), run.end());
                            }
                            path = std::move(next);
                            improved = true;
                            goto next_pass;
                        }
                    }
                }
            }
        }
    next_pass:;
    }
    return passes;
}

std::vector<Point2> shortest_hamilton_path(std::span<const Point2> points, Point2 start) {
    if (points.empty()) return {};
    std::vector<Point2> out;
    if (serpentine(points, out) && distance(out.front(), start) <= distance(points[nearest_index(points, start)], start)) {
        return out;
    }
    const std::size_t first = nearest_index(points, start);
    out = nearest_neighbor_path(points, points[first]);
    improve_path(out);
    return out;
}

std::size_t CoveragePlan::pending_count() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.size();
    return n;
}

std::vector<Point2> CoveragePlan::pending_points() const {
    std::vector<Point2> out;
    for (const auto& c : components) out.insert(out.end(), c.begin(), c.end());
    return out;
}

CoveragePlan make_coverage_plan(const Rect& area, double spacing, Point2 start, std::span<const Polygon> obstacles) {
    CoveragePlan plan;
    plan.spacing = spacing;
    plan.start = start;
    plan.obstacles.assign(obstacles.begin(), obstacles.end());
    const auto pts = grid_points(area, spacing, obstacles);
    plan.components.push_back(shortest_hamilton_path(pts, start));
    // splits the pathway wherever an edge runs through a known obstacle
    return update_coverage(std::move(plan), {}, 0.0, {});
}

CoveragePlan update_coverage(CoveragePlan plan, std::span<const Point2> trajectory, double radius,
                             std::span<const Polygon> new_obstacles) {
    plan.obstacles.insert(plan.obstacles.end(), new_obstacles.begin(), new_obstacles.end());
    std::vector<std::vector<Point2>> next;
    for (const auto& comp : plan.components) {
        std::vector<Point2> kept;
        for (auto p : comp) {
            if (!trajectory.empty() && point_polyline_distance(p, trajectory) <= radius) continue;
            if (std::any_of(new_obstacles.begin(), new_obstacles.end(), [&](const Polygon& o) { return o.contains(p); })) {
                continue;
            }
            kept.push_back(p);
        }
        std::vector<Point2> cur;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            if (i > 0 && std::any_of(plan.obstacles.begin(), plan.obstacles.end(), [&](const Polygon& o) {
                    return segment_hits_polygon(kept[i - 1], kept[i], o);
                })) {
                next.push_back(std::move(cur));
                cur.clear();
            }
            cur.push_back(kept[i]);
        }
        if (!cur.empty()) next.push_back(std::move(cur));
    }
    plan.components = std::move(next);
    return plan;
}

}  // namespace chiloc
