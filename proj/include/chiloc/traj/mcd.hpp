#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chiloc/core/geometry.hpp"

namespace chiloc {

/// floor((n + d + 1) / 2)
std::size_t mcd_subset_size(std::size_t n, std::size_t d);

/// Symmetric 2x2 sample covariance (denominator h - 1).
struct Cov2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
};

struct McdOptions {
    std::size_t exact_limit = 12;  // largest n solved by full enumeration
    int random_starts = 20;
    int max_iterations = 50;
    std::uint64_t seed = 0x6d6364;
};

struct McdResult {
    Vec2 location;
    std::vector<std::size_t> selected;  // ascending member indices, size h
    double determinant = 0.0;
    Cov2 covariance;
};

/// Mean and covariance of the given subset of points.
void subset_moments(std::span<const Vec2> points, std::span<const std::size_t> subset, Vec2& mean, Cov2& cov);

/// Minimum-covariance-determinant fusion of planar offsets (d = 2). Enumerates every
/// h-subset when n <= exact_limit and runs seeded concentration steps otherwise.
McdResult fuse_mcd(std::span<const Vec2> members, const McdOptions& options = {});

McdResult fuse_mcd_exact(std::span<const Vec2> members);
McdResult fuse_mcd_concentration(std::span<const Vec2> members, const McdOptions& options = {});

}  // namespace chiloc
