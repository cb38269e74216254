#pragma once

#include <optional>
#include <span>

#include "chiloc/core/records.hpp"

namespace chiloc {

inline constexpr double kDefaultDirectionThreshold = 20.0;

/// Looks for an AP-mark in a time-ordered window of records of a single AP.
///
/// The strongest-RSS record is the candidate mark point. It is accepted only when the
/// heading of each adjacent record differs from it by at most `direction_threshold`
/// degrees; a turn at the peak means the peak is not the closest-approach point. On
/// acceptance the mark keeps the maximal contiguous span of records whose headings stay
/// within the threshold of the mark-point heading.
///
/// Throws std::invalid_argument on an empty window or records of mixed APs.
std::optional<ApMarkVector> detect_ap_mark(std::span<const MarkRecord> window,
                                           double direction_threshold = kDefaultDirectionThreshold);

}  // namespace chiloc
