#include "chiloc/planner/gaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace chiloc {

const char* to_string(GapStatus s) {
    switch (s) {
        case GapStatus::Missing: return "missing";
        case GapStatus::Collected: return "collected";
        case GapStatus::Converged: return "converged";
    }
    return "?";
}

std::vector<std::pair<ApId, ApId>> SectorGapReport::missing_pairs() const {
    std::set<std::pair<ApId, ApId>> out;
    for (const auto& [ap, slots_of] : slots) {
        for (const auto& s : slots_of) {
            if (s.neighbor && s.status == GapStatus::Missing) out.insert(std::minmax(ap, *s.neighbor));
        }
    }
    return {out.begin(), out.end()};
}

namespace {

const FusionPool* selected_pool(const PoolMap& pools, ApId a, ApId b) {
    const FusionPool* best = nullptr;
    for (auto it = pools.lower_bound(PoolKey{a, b, std::numeric_limits<int>::min()});
         it != pools.end() && it->first.a == a && it->first.b == b; ++it) {
        if (it->second.empty()) continue;
        if (!best || it->second.mean_path_length() < best->mean_path_length()) best = &it->second;
    }
    return best;
}

}  // namespace

SectorGapReport sector_gap_report(const PositionMap& constellation, const PoolMap& pools, const GapOptions& options) {
    SectorGapReport report;
    for (const auto& [ap, p] : constellation) {
        auto& slots = report.slots[ap];
        std::array<double, kSectorCount> best;
        best.fill(std::numeric_limits<double>::infinity());
        for (const auto& [other, q] : constellation) {
            if (other == ap) continue;
            const double d = distance(p, q);
            if (d == 0.0 || d > options.neighbor_range) continue;
            const int k = sector_index(p, q);
            if (d < best[k]) {
                best[k] = d;
                slots[k].neighbor = other;
            }
        }
        for (auto& s : slots) {
            if (!s.neighbor) continue;
            const auto [a, b] = std::minmax(ap, *s.neighbor);
            const FusionPool* pool = selected_pool(pools, a, b);
            if (!pool) {
                s.status = GapStatus::Missing;
            } else if (pool->iteration() >= 2 && fusion_converged(*pool, options.theta)) {
                s.status = GapStatus::Converged;
            } else {
                s.status = GapStatus::Collected;
            }
        }
    }
    return report;
}

namespace {

bool segment_clear(Point2 a, Point2 b, std::span<const Polygon> obstacles,
                   std::span<const std::pair<Point2, double>> disks) {
    for (const auto& [c, r] : disks) {
        if (point_segment_distance(c, a, b) < r) return false;
    }
    return std::none_of(obstacles.begin(), obstacles.end(),
                        [&](const Polygon& o) { return segment_hits_polygon(a, b, o); });
}

}  // namespace

std::optional<std::vector<Point2>> grid_path(Point2 from, Point2 to, std::span<const Polygon> obstacles,
                                             std::span<const std::pair<Point2, double>> blocked_disks,
                                             const Rect& area, double spacing) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid_path spacing must be > 0");
    if (segment_clear(from, to, obstacles, blocked_disks)) return std::vector<Point2>{from, to};

    // Lattice anchored at `from`, clipped to the area.
    const auto lo_i = static_cast<long>(std::ceil((area.min.x - from.x) / spacing));
    const auto hi_i = static_cast<long>(std::floor((area.max.x - from.x) / spacing));
    const auto lo_j = static_cast<long>(std::ceil((area.min.y - from.y) / spacing));
    const auto hi_j = static_cast<long>(std::floor((area.max.y - from.y) / spacing));
    if (lo_i > 0 || hi_i < 0 || lo_j > 0 || hi_j < 0) return std::nullopt;
    const long w = hi_i - lo_i + 1;
    const long h = hi_j - lo_j + 1;
    auto node_point = [&](long id) {
        return Point2{from.x + static_cast<double>(id % w + lo_i) * spacing,
                      from.y + static_cast<double>(id / w + lo_j) * spacing};
    };
    const long start = (0 - lo_j) * w + (0 - lo_i);

    std::unordered_map<long, double> g;
    std::unordered_map<long, long> parent;
    using Item = std::pair<double, long>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    g[start] = 0.0;
    open.push({distance(from, to), start});
    std::set<long> closed;
    long reached = -1;
    while (!open.empty()) {
        const long u = open.top().second;
        open.pop();
        if (!closed.insert(u).second) continue;
        const Point2 pu = node_point(u);
        if (segment_clear(pu, to, obstacles, blocked_disks) && distance(pu, to) <= spacing * 1.5) {
            reached = u;
            break;
        }
        const long ui = u % w, uj = u / w;
        for (long di = -1; di <= 1; ++di) {
            for (long dj = -1; dj <= 1; ++dj) {
                if (!di && !dj) continue;
                const long vi = ui + di, vj = uj + dj;
                if (vi < 0 || vi >= w || vj < 0 || vj >= h) continue;
                const long v = vj * w + vi;
                if (closed.count(v)) continue;
                const Point2 pv = node_point(v);
                if (!segment_clear(pu, pv, obstacles, blocked_disks)) continue;
                const double cost = g[u] + distance(pu, pv);
                auto it = g.find(v);
                if (it == g.end() || cost < it->second) {
                    g[v] = cost;
                    parent[v] = u;
                    open.push({cost + distance(pv, to), v});
                }
            }
        }
    }
    if (reached < 0) return std::nullopt;
    std::vector<Point2> path{to};
    for (long u = reached; u != start; u = parent.at(u)) path.push_back(node_point(u));
    path.push_back(from);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<GapSuggestion> sector_gap_paths(const PositionMap& constellation, const PoolMap& pools,
                                            std::span<const Polygon> obstacles, const Rect& area,
                                            const GapOptions& options) {
    std::vector<GapSuggestion> out;
    for (const auto& [a, b] : sector_gap_report(constellation, pools, options).missing_pairs()) {
        std::vector<std::pair<Point2, double>> disks;
        for (const auto& [id, p] : constellation) {
            if (id != a && id != b) disks.push_back({p, options.mark_radius});
        }
        if (auto path = grid_path(constellation.at(a), constellation.at(b), obstacles, disks, area, options.grid_spacing)) {
            out.push_back({a, b, std::move(*path)});
        }
    }
    return out;
}

std::vector<RetraceSuggestion> retrace_suggestions(const PoolMap& pools, double theta) {
    std::vector<RetraceSuggestion> out;
    for (const auto& edge : select_positioning_edges(pools)) {
        const FusionPool* pool = selected_pool(pools, edge.ap_a, edge.ap_b);
        const auto& c = pool->compounds();
        const double delta = c.size() >= 2 ? (c[c.size() - 1] - c[c.size() - 2]).norm()
                                           : std::numeric_limits<double>::infinity();
        if (delta < theta) continue;
        out.push_back({pool->key(), pool->last_update(), delta});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RetraceSuggestion& x, const RetraceSuggestion& y) { return x.last_update < y.last_update; });
    return out;
}

}  // namespace chiloc
