#pragma once

#include "chiloc/core/geometry.hpp"

namespace chiloc {

inline constexpr int kSectorCount = 8;

/// Sector of a bearing: sector k spans (45k - 22.5, 45k + 22.5], sector 0 centred on +x.
int sector_of_bearing(double bearing_deg);

/// Sector of `to` as seen from `from`. Throws std::invalid_argument for coincident points.
int sector_index(Point2 from, Point2 to);

/// Centre bearing of a sector in degrees.
constexpr double sector_center(int sector) { return 45.0 * sector; }

}  // namespace chiloc
