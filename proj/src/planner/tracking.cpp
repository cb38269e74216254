#include "chiloc/planner/tracking.hpp"

#include <optional>
#include <stdexcept>

namespace chiloc {

std::vector<TrackPoint> track(const TrackQuery& query, std::span<const WalkStep> steps,
                              std::span<const ApMarkVector> marks, const PositionMap& constellation, Point2 origin,
                              double origin_time) {
    if (query.t_begin > query.t_end) throw std::invalid_argument("track: inverted time range");

    // index 0 is the walk origin, index k the end of step k
    std::vector<Point2> dr{origin};
    std::vector<double> along{0.0};
    std::vector<double> times{origin_time};
    for (const auto& s : steps) {
        dr.push_back(dr.back() + s.reported.offset());
        along.push_back(along.back() + s.reported.length());
        times.push_back(s.timestamp);
    }

    std::vector<std::pair<std::size_t, Vec2>> anchors{{0, Vec2{}}};
    std::vector<std::optional<Point2>> snapped(dr.size());
    for (const auto& m : marks) {
        auto known = constellation.find(m.ap);
        if (known == constellation.end()) continue;
        std::size_t idx = 0;
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (times[k] == m.timestamp()) {
                idx = k;
                break;
            }
        }
        if (idx == 0 || idx <= anchors.back().first) continue;
        anchors.push_back({idx, known->second - dr[idx]});
        snapped[idx] = known->second;
    }

    std::vector<Vec2> corr(dr.size());
    for (std::size_t j = 1; j < anchors.size(); ++j) {
        const auto [i0, c0] = anchors[j - 1];
        const auto [i1, c1] = anchors[j];
        const double span = along[i1] - along[i0];
        for (std::size_t k = i0; k <= i1; ++k) {
            const double f = span > 0.0 ? (along[k] - along[i0]) / span : 1.0;
            corr[k] = c0 + (c1 - c0) * f;
        }
    }
    for (std::size_t k = anchors.back().first + 1; k < dr.size(); ++k) corr[k] = anchors.back().second;

    std::vector<TrackPoint> out;
    for (std::size_t k = 0; k < dr.size(); ++k) {
        if (times[k] < query.t_begin || times[k] > query.t_end) continue;
        const Point2 p = snapped[k] ? *snapped[k] : dr[k] + corr[k];
        if (!query.area.contains(p)) continue;
        out.push_back({times[k], p, snapped[k].has_value()});
    }
    if (out.empty()) throw std::invalid_argument("track: no walk data in the query range");
    return out;
}

}  // namespace chiloc
