#pragma once

#include <compare>
#include <utility>
#include <vector>

#include "chiloc/core/records.hpp"
#include "chiloc/traj/mcd.hpp"

namespace chiloc {

inline constexpr std::size_t kPruneTrigger = 10;

/// Trajectories sharing an unordered AP pair and a start-mark signature overlap.
/// `a < b` always; a walk from b to a is stored reversed.
struct PoolKey {
    ApId a;
    ApId b;
    int signature = 0;  // 45-degree sector of the departure heading at `a`

    friend auto operator<=>(const PoolKey&, const PoolKey&) = default;
};

struct PoolMember {
    Vec2 offset;  // position(b) - position(a) as observed
    double path_length = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;

    friend bool operator==(const PoolMember&, const PoolMember&) = default;
};

struct TimeSpan {
    double begin = 0.0;
    double end = 0.0;

    friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

class FusionPool {
public:
    FusionPool() = default;
    explicit FusionPool(PoolKey key) : key_(key) {}

    /// Adds an observation, fuses, and prunes once more than 10 members overlap.
    void add(const PoolMember& member, const McdOptions& options = {});

    const PoolKey& key() const { return key_; }
    const std::vector<PoolMember>& members() const { return members_; }
    /// Compound offset after each fusion, oldest first.
    const std::vector<Vec2>& compounds() const { return compounds_; }
    const std::vector<TimeSpan>& discarded() const { return discarded_; }
    const std::vector<std::size_t>& selected() const { return selected_; }

    bool empty() const { return members_.empty(); }
    std::size_t iteration() const { return compounds_.size(); }
    Vec2 fused() const;
    double mean_path_length() const;
    /// End time of the most recent member.
    double last_update() const;

    /// Applies the n > 10 pruning rule using a fresh MCD fit.
    void prune(const McdOptions& options = {});

    friend bool operator==(const FusionPool&, const FusionPool&) = default;

    // Restores a pool verbatim (deserialization).
    static FusionPool restore(PoolKey key, std::vector<PoolMember> members, std::vector<Vec2> compounds,
                              std::vector<TimeSpan> discarded, std::vector<std::size_t> selected);

private:
    void keep_only(const std::vector<std::size_t>& selected);

    PoolKey key_;
    std::vector<PoolMember> members_;
    std::vector<Vec2> compounds_;
    std::vector<TimeSpan> discarded_;
    std::vector<std::size_t> selected_;
};

FusionPool prune_pool(FusionPool pool, const McdOptions& options = {});

/// True iff the last two compounds are closer than theta. Throws std::logic_error with
/// fewer than two fusions recorded.
bool fusion_converged(const FusionPool& pool, double theta);

/// Pool key and canonically oriented member of a trajectory.
std::pair<PoolKey, PoolMember> pool_entry(const ApToApTrajectory& trajectory);

}  // namespace chiloc
