#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "chiloc/core/geometry.hpp"

namespace chiloc {

struct ScanEntry {
    ApId ap;
    double rss = 0.0;  // dBm

    friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

using Scan = std::vector<ScanEntry>;

/// One phone record while an AP is in range.
struct MarkRecord {
    double timestamp = 0.0;
    double heading = 0.0;
    ApId ap;
    double rss = 0.0;
    Scan nearby;  // other APs heard at the same instant; never contains `ap`

    friend bool operator==(const MarkRecord&, const MarkRecord&) = default;
};

/// Records around the strongest-RSS point of one AP, all within the direction threshold
/// of the mark-point heading.
struct ApMarkVector {
    ApId ap;
    std::vector<MarkRecord> records;
    std::size_t mark_point_index = 0;

    const MarkRecord& mark_point() const { return records.at(mark_point_index); }
    double timestamp() const { return mark_point().timestamp; }
    double heading() const { return mark_point().heading; }

    friend bool operator==(const ApMarkVector&, const ApMarkVector&) = default;
};

/// Walk between two AP-marks with no AP-mark of a third AP in between.
struct ApToApTrajectory {
    ApMarkVector start_mark;
    ApMarkVector end_mark;
    std::vector<DisplacementVector> vectors;
    double first_timestamp = 0.0;
    double last_timestamp = 0.0;

    Vec2 displacement() const { return sum_displacements(vectors); }
    double path_length() const;
};

struct DisplacementEdge {
    ApId ap_a;
    ApId ap_b;
    Vec2 displacement;  // position(b) - position(a)
    std::size_t source_count = 1;

    friend bool operator==(const DisplacementEdge&, const DisplacementEdge&) = default;
};

}  // namespace chiloc
