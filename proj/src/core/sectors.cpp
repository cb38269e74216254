#include "chiloc/core/sectors.hpp"

#include <cmath>
#include <stdexcept>

namespace chiloc {

int sector_of_bearing(double bearing_deg) {
    const double b = normalize_heading(bearing_deg);
    // shift so that each sector's closed upper edge lands on a multiple of 45
    const double shifted = normalize_heading(b + 22.5);
    int k = static_cast<int>(std::ceil(shifted / 45.0)) - 1;
    if (shifted == 0.0) k = kSectorCount - 1;
    return ((k % kSectorCount) + kSectorCount) % kSectorCount;
}

int sector_index(Point2 from, Point2 to) {
    if (from == to) throw std::invalid_argument("sector_index: coincident points");
    return sector_of_bearing(bearing_of(to - from));
}

}  // namespace chiloc
