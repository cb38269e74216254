#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "chiloc/core/records.hpp"
#include "chiloc/traj/fusion.hpp"

namespace chiloc {

using PoolMap = std::map<PoolKey, FusionPool>;
using PositionMap = std::map<ApId, Point2>;

/// One displacement per AP pair: the compound of the pool with the shortest mean member
/// path. Ties go to the lowest start-mark signature.
std::vector<DisplacementEdge> select_positioning_edges(const PoolMap& pools);

enum class PositioningSolver {
    ConjugateGradient,  // Krylov steps on the anchored normal equations
    GaussSeidel,        // in-place neighbour averaging, optionally over-relaxed
};

struct PositioningOptions {
    std::size_t max_iterations = 100;
    double tolerance = 1e-6;  // stop once no AP moves further than this in one iteration
    PositioningSolver solver = PositioningSolver::ConjugateGradient;
    /// Gauss-Seidel only: over-relaxation factor in (0, 2); 1 is plain averaging.
    double relaxation = 1.0;
};

struct ApConstellation {
    PositionMap positions;
    std::size_t iteration = 0;
    double last_move = 0.0;
    /// Connected components, each sorted by id; the first id of each is the pinned anchor.
    std::vector<std::vector<ApId>> components;

    bool disconnected() const { return components.size() > 1; }
};

/// Least-squares positions from the displacement graph with the lowest id of every
/// component pinned at the origin. All positions start at the origin and every iteration
/// lowers the edge residual energy. APs in `extra_aps` that no edge touches are reported at (0, 0).
ApConstellation position_aps(std::span<const DisplacementEdge> edges, const PositioningOptions& options = {},
                             std::span<const ApId> extra_aps = {});

/// Sum over edges of |p_b - p_a - d|^2.
double edge_residual_energy(std::span<const DisplacementEdge> edges, const PositionMap& positions);

struct RigidAlignment {
    double rotation = 0.0;  // degrees, applied after the optional reflection about the x axis
    Vec2 translation;
    bool reflected = false;

    Point2 apply(Point2 p) const;
};

struct AlignmentResult {
    RigidAlignment alignment;
    double average_error = 0.0;
};

/// Least-squares rigid fit of `estimate` onto `truth`. Both maps must hold the same ids.
AlignmentResult align_to_truth(const PositionMap& estimate, const PositionMap& truth);

void write_constellation_csv(std::ostream& out, const PositionMap& positions);
PositionMap read_constellation_csv(std::istream& in);
nlohmann::json alignment_to_json(const AlignmentResult& result, const ApConstellation& constellation);

}  // namespace chiloc
