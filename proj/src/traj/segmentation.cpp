#include "chiloc/traj/segmentation.hpp"

#include <stdexcept>

namespace chiloc {

std::vector<DisplacementVector> SegmentedWalk::vectors() const {
    std::vector<DisplacementVector> out;
    out.reserve(segments.size());
    for (const auto& s : segments) out.push_back(s.vector);
    return out;
}

SegmentedWalk segment_vectors(std::span<const WalkStep> steps, double threshold) {
    SegmentedWalk walk;
    walk.steps.assign(steps.begin(), steps.end());
    if (steps.empty()) return walk;

    std::size_t begin = 0;
    bool have_heading = false;
    double start_heading = 0.0;
    Vec2 sum;
    auto close = [&](std::size_t end) {
        walk.segments.push_back({DisplacementVector::from_offset(sum), begin, end, steps[begin].timestamp, steps[end].timestamp});
    };
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& v = steps[i].reported;
        if (v.length() > 0.0) {
            if (!have_heading) {
                have_heading = true;
                start_heading = v.heading();
            } else if (heading_diff(v.heading(), start_heading) > threshold) {
                close(i - 1);
                begin = i;
                sum = {};
                start_heading = v.heading();
            }
        }
        sum += v.offset();
    }
    close(steps.size() - 1);
    return walk;
}

SegmentedWalk segment_vectors(std::span<const DisplacementVector> steps, double threshold) {
    std::vector<WalkStep> ws;
    ws.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) ws.push_back({static_cast<double>(i + 1), steps[i], {}});
    return segment_vectors(std::span<const WalkStep>(ws), threshold);
}

std::vector<ApToApTrajectory> build_ap_to_ap(const SegmentedWalk& walk, std::span<const ApMarkVector> marks) {
    std::vector<ApToApTrajectory> out;
    for (std::size_t i = 1; i < marks.size(); ++i) {
        if (marks[i].timestamp() < marks[i - 1].timestamp()) throw std::invalid_argument("build_ap_to_ap: marks not time-ordered");
    }
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        const ApMarkVector& a = marks[i];
        const ApMarkVector& b = marks[i + 1];
        if (a.ap == b.ap) continue;
        const double t0 = a.timestamp();
        const double t1 = b.timestamp();
        ApToApTrajectory traj{a, b, {}, t0, t1};
        for (const auto& seg : walk.segments) {
            if (seg.t_end <= t0 || seg.t_begin > t1) continue;
            Vec2 piece;
            bool any = false;
            for (std::size_t k = seg.first_step; k <= seg.last_step; ++k) {
                const double t = walk.steps[k].timestamp;
                if (t > t0 && t <= t1) {
                    piece += walk.steps[k].reported.offset();
                    any = true;
                }
            }
            if (any) traj.vectors.push_back(DisplacementVector::from_offset(piece));
        }
        out.push_back(std::move(traj));
    }
    return out;
}

}  // namespace chiloc
