#pragma once

#include <span>
#include <vector>

#include "chiloc/positioning/positioning.hpp"
#include "chiloc/traj/segmentation.hpp"

namespace chiloc {

struct TrackQuery {
    double t_begin = 0.0;
    double t_end = 0.0;
    Rect area;

    friend bool operator==(const TrackQuery&, const TrackQuery&) = default;
};

struct TrackPoint {
    double timestamp = 0.0;
    Point2 position;
    bool anchored = false;  // snapped onto a known AP
};

/// Dead-reckoned walk calibrated at AP-marks of known APs.
///
/// `origin` is where the walk starts at `origin_time`; it acts as a zero-correction anchor. At each
/// mark of a known AP the dead-reckoned point is replaced by the AP position and the
/// correction is spread linearly (by path length) back to the previous anchor. Points
/// after the last anchor keep its correction. The result is cut to the query's time
/// range and area. Throws std::invalid_argument when the range is inverted or holds no
/// step.
std::vector<TrackPoint> track(const TrackQuery& query, std::span<const WalkStep> steps,
                              std::span<const ApMarkVector> marks, const PositionMap& constellation,
                              Point2 origin = {}, double origin_time = 0.0);

}  // namespace chiloc
