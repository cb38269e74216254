#pragma once

#include <span>
#include <vector>

#include "chiloc/core/records.hpp"

namespace chiloc {

/// One reported step with the scan taken at its end.
struct WalkStep {
    double timestamp = 0.0;  // time at the end of the step
    DisplacementVector reported;
    Scan scan;

    friend bool operator==(const WalkStep&, const WalkStep&) = default;
};

struct WalkSegment {
    DisplacementVector vector;
    std::size_t first_step = 0;  // inclusive
    std::size_t last_step = 0;   // inclusive
    double t_begin = 0.0;
    double t_end = 0.0;
};

struct SegmentedWalk {
    std::vector<WalkStep> steps;
    std::vector<WalkSegment> segments;

    std::vector<DisplacementVector> vectors() const;
};

/// Greedy left-to-right grouping: a new vector starts when a step deviates more than
/// `threshold` degrees from the current vector's start heading. Zero-length steps join
/// the current group.
SegmentedWalk segment_vectors(std::span<const WalkStep> steps, double threshold);
SegmentedWalk segment_vectors(std::span<const DisplacementVector> steps, double threshold);

/// Splits the walk at consecutive AP-marks (ordered by timestamp). A pair of consecutive
/// marks of different APs yields one trajectory made of the segment pieces with step
/// timestamps in (t_start, t_end].
std::vector<ApToApTrajectory> build_ap_to_ap(const SegmentedWalk& walk, std::span<const ApMarkVector> marks);

}  // namespace chiloc
