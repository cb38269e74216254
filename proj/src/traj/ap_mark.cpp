#include "chiloc/traj/ap_mark.hpp"

#include <stdexcept>

namespace chiloc {

std::optional<ApMarkVector> detect_ap_mark(std::span<const MarkRecord> window, double direction_threshold) {
    if (window.empty()) throw std::invalid_argument("detect_ap_mark: empty window");
    const ApId ap = window.front().ap;
    std::size_t peak = 0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (window[i].ap != ap) throw std::invalid_argument("detect_ap_mark: window mixes APs");
        if (window[i].rss > window[peak].rss) peak = i;
    }
    const double h = window[peak].heading;
    if (peak > 0 && heading_diff(window[peak - 1].heading, h) > direction_threshold) return std::nullopt;
    if (peak + 1 < window.size() && heading_diff(window[peak + 1].heading, h) > direction_threshold) return std::nullopt;

    std::size_t first = peak;
    while (first > 0 && heading_diff(window[first - 1].heading, h) <= direction_threshold) --first;
    std::size_t last = peak;
    while (last + 1 < window.size() && heading_diff(window[last + 1].heading, h) <= direction_threshold) ++last;

    ApMarkVector mark;
    mark.ap = ap;
    mark.records.assign(window.begin() + static_cast<std::ptrdiff_t>(first),
                        window.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    mark.mark_point_index = peak - first;
    return mark;
}

}  // namespace chiloc
