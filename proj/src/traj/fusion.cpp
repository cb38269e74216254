#include "chiloc/traj/fusion.hpp"

#include <stdexcept>

#include "chiloc/core/sectors.hpp"

namespace chiloc {

void FusionPool::add(const PoolMember& member, const McdOptions& options) {
    members_.push_back(member);
    if (members_.size() == 1) {
        selected_ = {0};
        compounds_.push_back(member.offset);
        return;
    }
    std::vector<Vec2> pts;
    pts.reserve(members_.size());
    for (const auto& m : members_) pts.push_back(m.offset);
    const McdResult fit = fuse_mcd(pts, options);
    selected_ = fit.selected;
    if (members_.size() > kPruneTrigger) keep_only(fit.selected);
    compounds_.push_back(fit.location);
}

void FusionPool::prune(const McdOptions& options) {
    if (members_.size() <= kPruneTrigger) return;
    std::vector<Vec2> pts;
    for (const auto& m : members_) pts.push_back(m.offset);
    keep_only(fuse_mcd(pts, options).selected);
}

void FusionPool::keep_only(const std::vector<std::size_t>& selected) {
    std::vector<PoolMember> kept;
    std::size_t next = 0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (next < selected.size() && selected[next] == i) {
            kept.push_back(members_[i]);
            ++next;
        } else {
            discarded_.push_back({members_[i].t_begin, members_[i].t_end});
        }
    }
    members_ = std::move(kept);
    selected_.resize(members_.size());
    for (std::size_t i = 0; i < selected_.size(); ++i) selected_[i] = i;
}

Vec2 FusionPool::fused() const {
    if (compounds_.empty()) throw std::logic_error("fusion pool has no observations");
    return compounds_.back();
}

double FusionPool::mean_path_length() const {
    if (members_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& m : members_) s += m.path_length;
    return s / static_cast<double>(members_.size());
}

double FusionPool::last_update() const {
    double t = 0.0;
    for (const auto& m : members_) t = std::max(t, m.t_end);
    return t;
}

FusionPool FusionPool::restore(PoolKey key, std::vector<PoolMember> members, std::vector<Vec2> compounds,
                               std::vector<TimeSpan> discarded, std::vector<std::size_t> selected) {
    FusionPool p(key);
    p.members_ = std::move(members);
    p.compounds_ = std::move(compounds);
    p.discarded_ = std::move(discarded);
    p.selected_ = std::move(selected);
    return p;
}

FusionPool prune_pool(FusionPool pool, const McdOptions& options) {
    pool.prune(options);
    return pool;
}

bool fusion_converged(const FusionPool& pool, double theta) {
    const auto& c = pool.compounds();
    if (c.size() < 2) throw std::logic_error("fusion_converged needs at least two fusion iterations");
    return (c[c.size() - 1] - c[c.size() - 2]).norm() < theta;
}

std::pair<PoolKey, PoolMember> pool_entry(const ApToApTrajectory& t) {
    const ApId from = t.start_mark.ap;
    const ApId to = t.end_mark.ap;
    if (from == to) throw std::invalid_argument("trajectory starts and ends at the same AP");
    PoolMember m{t.displacement(), t.path_length(), t.first_timestamp, t.last_timestamp};
    if (from < to) return {PoolKey{from, to, sector_of_bearing(t.start_mark.heading())}, m};
    m.offset = m.offset * -1.0;
    return {PoolKey{to, from, sector_of_bearing(t.end_mark.heading() + 180.0)}, m};
}

}  // namespace chiloc
