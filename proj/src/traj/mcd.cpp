#include "chiloc/traj/mcd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace chiloc {

std::size_t mcd_subset_size(std::size_t n, std::size_t d) {
    if (n < 1 || d < 1) throw std::invalid_argument("mcd_subset_size needs n >= 1 and d >= 1");
    return (n + d + 1) / 2;
}

void subset_moments(std::span<const Vec2> points, std::span<const std::size_t> subset, Vec2& mean, Cov2& cov) {
    mean = {};
    for (std::size_t i : subset) mean += points[i];
    const double h = static_cast<double>(subset.size());
    mean = mean / h;
    cov = {};
    if (subset.size() < 2) return;
    for (std::size_t i : subset) {
        const Vec2 c = points[i] - mean;
        cov.xx += c.x * c.x;
        cov.xy += c.x * c.y;
        cov.yy += c.y * c.y;
    }
    cov.xx /= h - 1.0;
    cov.xy /= h - 1.0;
    cov.yy /= h - 1.0;
}

namespace {

void check_members(std::span<const Vec2> members) {
    if (members.size() < 2) throw std::invalid_argument("fuse_mcd needs at least two members");
    for (auto v : members) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw std::invalid_argument("fuse_mcd member is not finite");
    }
}

McdResult make_result(std::span<const Vec2> members, std::vector<std::size_t> subset) {
    std::sort(subset.begin(), subset.end());
    McdResult r;
    subset_moments(members, subset, r.location, r.covariance);
    r.determinant = std::max(0.0, r.covariance.det());
    r.selected = std::move(subset);
    return r;
}

// Returns the h points closest to (mean, cov) in Mahalanobis distance, ties by index.
std::vector<std::size_t> concentrate(std::span<const Vec2> pts, Vec2 mean, const Cov2& cov, std::size_t h) {
    const double det = cov.det();
    std::vector<std::pair<double, std::size_t>> dist(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 c = pts[i] - mean;
        const double m = (cov.yy * c.x * c.x - 2.0 * cov.xy * c.x * c.y + cov.xx * c.y * c.y) / det;
        dist[i] = {m, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(h), dist.end());
    std::vector<std::size_t> out(h);
    for (std::size_t i = 0; i < h; ++i) out[i] = dist[i].second;
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

McdResult fuse_mcd_exact(std::span<const Vec2> members) {
    check_members(members);
    const std::size_t n = members.size();
    const std::size_t h = mcd_subset_size(n, 2);
    std::vector<std::size_t> idx(h);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::size_t> best;
    double best_det = std::numeric_limits<double>::infinity();
    while (true) {
        Vec2 mean;
        Cov2 cov;
        subset_moments(members, idx, mean, cov);
        const double det = std::max(0.0, cov.det());
        if (det < best_det) {
            best_det = det;
            best = idx;
        }
        // next combination in lexicographic order
        std::size_t i = h;
        while (i > 0 && idx[i - 1] == n - h + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < h; ++j) idx[j] = idx[j - 1] + 1;
    }
    return make_result(members, std::move(best));
}

McdResult fuse_mcd_concentration(std::span<const Vec2> members, const McdOptions& options) {
    check_members(members);
    const std::size_t n = members.size();
    const std::size_t h = mcd_subset_size(n, 2);
    std::mt19937_64 rng(options.seed);
    std::vector<std::size_t> order(n);

    std::vector<std::size_t> best;
    double best_det = std::numeric_limits<double>::infinity();
    for (int start = 0; start < std::max(1, options.random_starts); ++start) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        // Elemental start of d + 1 points, grown while the covariance stays singular.
        std::size_t take = std::min<std::size_t>(3, h);
        std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
        Vec2 mean;
        Cov2 cov;
        subset_moments(members, subset, mean, cov);
        while (cov.det() <= 0.0 && take < h) {
            subset.push_back(order[take++]);
            subset_moments(members, subset, mean, cov);
        }
        if (cov.det() <= 0.0) {
            std::sort(subset.begin(), subset.end());
        } else {
            double det = std::numeric_limits<double>::infinity();
            for (int it = 0; it < options.max_iterations; ++it) {
                std::vector<std::size_t> next = concentrate(members, mean, cov, h);
                Vec2 next_mean;
                Cov2 next_cov;
                subset_moments(members, next, next_mean, next_cov);
                const double next_det = std::max(0.0, next_cov.det());
                if (next == subset || next_det >= det) {
                    if (next_det < det) subset = std::move(next);
                    break;
                }
                subset = std::move(next);
                mean = next_mean;
                cov = next_cov;
                det = next_det;
                if (det == 0.0) break;
            }
        }
        Vec2 m;
        Cov2 c;
        subset_moments(members, subset, m, c);
        const double d = std::max(0.0, c.det());
        if (subset.size() == h && d < best_det) {
            best_det = d;
            best = subset;
        }
    }
    if (best.empty()) {
        // every start stayed singular below h points; fall back to the first h members
        best.resize(h);
        std::iota(best.begin(), best.end(), 0);
    }
    return make_result(members, std::move(best));
}

McdResult fuse_mcd(std::span<const Vec2> members, const McdOptions& options) {
    if (members.size() <= options.exact_limit) return fuse_mcd_exact(members);
    return fuse_mcd_concentration(members, options);
}

}  // namespace chiloc
