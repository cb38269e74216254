#include "chiloc/positioning/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace chiloc {

std::vector<DisplacementEdge> select_positioning_edges(const PoolMap& pools) {
    std::map<std::pair<ApId, ApId>, const FusionPool*> best;
    for (const auto& [key, pool] : pools) {
        if (pool.empty()) continue;
        auto& slot = best[{key.a, key.b}];
        if (!slot || pool.mean_path_length() < slot->mean_path_length()) slot = &pool;
    }
    std::vector<DisplacementEdge> edges;
    edges.reserve(best.size());
    for (const auto& [pair, pool] : best) {
        edges.push_back({pair.first, pair.second, pool->fused(), pool->members().size()});
    }
    return edges;
}

namespace {

struct Link {
    std::size_t other;
    Vec2 shift;  // own position estimate = p_other + shift
};

void gauss_seidel(const std::vector<std::vector<Link>>& links, const std::vector<char>& pinned,
                  const PositioningOptions& options, std::vector<Point2>& pos, ApConstellation& out) {
    const double w = options.relaxation;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        double max_move = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (pinned[i] || links[i].empty()) continue;
            Vec2 acc;
            for (const auto& l : links[i]) acc += (pos[l.other] + l.shift) - Point2{};
            const Point2 target = Point2{} + acc / static_cast<double>(links[i].size());
            const Point2 next = pos[i] + (target - pos[i]) * w;
            max_move = std::max(max_move, distance(next, pos[i]));
            pos[i] = next;
        }
        out.iteration = it + 1;
        out.last_move = max_move;
        if (max_move < options.tolerance) break;
    }
}

// Minimizes the edge residual energy over the free APs. The normal equations are the
// graph Laplacian with pinned rows removed; x and y share the matrix and are solved as
// two independent Krylov sequences.
void conjugate_gradient(const std::vector<std::vector<Link>>& links, const std::vector<char>& pinned,
                        const PositioningOptions& options, std::vector<Point2>& pos, ApConstellation& out) {
    const std::size_t n = pos.size();
    auto free = [&](std::size_t i) { return !pinned[i] && !links[i].empty(); };
    auto apply = [&](const std::vector<Vec2>& v, std::vector<Vec2>& av) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!free(i)) {
                av[i] = {};
                continue;
            }
            Vec2 acc = v[i] * static_cast<double>(links[i].size());
            for (const auto& l : links[i]) {
                if (free(l.other)) acc -= v[l.other];
            }
            av[i] = acc;
        }
    };
    // pinned positions are the origin, so they drop out of the right-hand side
    std::vector<Vec2> r(n), d(n), ad(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!free(i)) continue;
        for (const auto& l : links[i]) r[i] += l.shift;
    }
    d = r;
    double rrx = 0.0, rry = 0.0;
    for (const auto& v : r) {
        rrx += v.x * v.x;
        rry += v.y * v.y;
    }
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        apply(d, ad);
        double dadx = 0.0, dady = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dadx += d[i].x * ad[i].x;
            dady += d[i].y * ad[i].y;
        }
        const double ax = dadx > 0.0 ? rrx / dadx : 0.0;
        const double ay = dady > 0.0 ? rry / dady : 0.0;
        double max_move = 0.0, nrx = 0.0, nry = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 step{ax * d[i].x, ay * d[i].y};
            pos[i] += step;
            max_move = std::max(max_move, step.norm());
            r[i] -= Vec2{ax * ad[i].x, ay * ad[i].y};
            nrx += r[i].x * r[i].x;
            nry += r[i].y * r[i].y;
        }
        out.iteration = it + 1;
        out.last_move = max_move;
        if (max_move < options.tolerance) break;
        const double bx = rrx > 0.0 ? nrx / rrx : 0.0;
        const double by = rry > 0.0 ? nry / rry : 0.0;
        for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + Vec2{bx * d[i].x, by * d[i].y};
        rrx = nrx;
        rry = nry;
    }
}

}  // namespace

ApConstellation position_aps(std::span<const DisplacementEdge> edges, const PositioningOptions& options,
                             std::span<const ApId> extra_aps) {
    if (edges.empty() && extra_aps.empty()) throw std::invalid_argument("position_aps: empty edge set");
    if (!(options.relaxation > 0.0 && options.relaxation < 2.0)) {
        throw std::invalid_argument("position_aps: relaxation must lie in (0, 2)");
    }
    std::set<ApId> ids(extra_aps.begin(), extra_aps.end());
    for (const auto& e : edges) {
        if (e.ap_a == e.ap_b) throw std::invalid_argument("position_aps: self-loop edge");
        if (!std::isfinite(e.displacement.x) || !std::isfinite(e.displacement.y)) {
            throw std::invalid_argument("position_aps: non-finite displacement");
        }
        ids.insert(e.ap_a);
        ids.insert(e.ap_b);
    }
    const std::vector<ApId> order(ids.begin(), ids.end());
    auto index_of = [&](ApId id) {
        return static_cast<std::size_t>(std::lower_bound(order.begin(), order.end(), id) - order.begin());
    };
    const std::size_t n = order.size();
    std::vector<std::vector<Link>> links(n);
    for (const auto& e : edges) {
        const std::size_t a = index_of(e.ap_a), b = index_of(e.ap_b);
        links[a].push_back({b, -e.displacement});
        links[b].push_back({a, e.displacement});
    }
    // A fixed summation order keeps the result independent of the edge list order.
    for (auto& l : links) {
        std::sort(l.begin(), l.end(), [](const Link& x, const Link& y) {
            if (x.other != y.other) return x.other < y.other;
            if (x.shift.x != y.shift.x) return x.shift.x < y.shift.x;
            return x.shift.y < y.shift.y;
        });
    }

    ApConstellation out;
    std::vector<char> pinned(n, 0);
    std::vector<char> seen(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        pinned[s] = 1;
        std::vector<ApId> comp;
        std::queue<std::size_t> q;
        q.push(s);
        seen[s] = 1;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            comp.push_back(order[u]);
            for (const auto& l : links[u]) {
                if (!seen[l.other]) {
                    seen[l.other] = 1;
                    q.push(l.other);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
    }

    std::vector<Point2> pos(n);
    if (options.solver == PositioningSolver::GaussSeidel) {
        gauss_seidel(links, pinned, options, pos, out);
    } else {
        conjugate_gradient(links, pinned, options, pos, out);
    }
    for (std::size_t i = 0; i < n; ++i) out.positions[order[i]] = pos[i];
    return out;
}

double edge_residual_energy(std::span<const DisplacementEdge> edges, const PositionMap& positions) {
    double e = 0.0;
    for (const auto& edge : edges) {
        const Vec2 r = (positions.at(edge.ap_b) - positions.at(edge.ap_a)) - edge.displacement;
        e += r.dot(r);
    }
    return e;
}

Point2 RigidAlignment::apply(Point2 p) const {
    const double y = reflected ? -p.y : p.y;
    const double r = deg_to_rad(rotation);
    const double c = std::cos(r), s = std::sin(r);
    return {c * p.x - s * y + translation.x, s * p.x + c * y + translation.y};
}

namespace {

AlignmentResult fit(const std::vector<Point2>& est, const std::vector<Point2>& truth, bool reflect, double& sse) {
    const std::size_t n = est.size();
    std::vector<Point2> a(est);
    if (reflect) {
        for (auto& p : a) p.y = -p.y;
    }
    Vec2 ca, cb;
    for (std::size_t i = 0; i < n; ++i) {
        ca += a[i] - Point2{};
        cb += truth[i] - Point2{};
    }
    ca = ca / static_cast<double>(n);
    cb = cb / static_cast<double>(n);
    double sdot = 0.0, scross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 u = (a[i] - Point2{}) - ca;
        const Vec2 v = (truth[i] - Point2{}) - cb;
        sdot += u.dot(v);
        scross += u.cross(v);
    }
    const double theta = std::atan2(scross, sdot);
    const double c = std::cos(theta), s = std::sin(theta);
    AlignmentResult r;
    r.alignment.rotation = normalize_heading(rad_to_deg(theta));
    r.alignment.reflected = reflect;
    r.alignment.translation = cb - Vec2{c * ca.x - s * ca.y, s * ca.x + c * ca.y};
    sse = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = distance(r.alignment.apply(est[i]), truth[i]);
        sse += d * d;
        total += d;
    }
    r.average_error = total / static_cast<double>(n);
    return r;
}

}  // namespace

AlignmentResult align_to_truth(const PositionMap& estimate, const PositionMap& truth) {
    if (estimate.size() < 2) throw std::invalid_argument("align_to_truth needs at least two APs");
    if (estimate.size() != truth.size()) throw std::invalid_argument("align_to_truth: AP id sets differ");
    std::vector<Point2> est, tru;
    for (const auto& [id, p] : estimate) {
        auto it = truth.find(id);
        if (it == truth.end()) throw std::invalid_argument("align_to_truth: AP " + id.to_mac() + " has no truth position");
        est.push_back(p);
        tru.push_back(it->second);
    }
    double sse_plain = 0.0, sse_mirror = 0.0;
    AlignmentResult plain = fit(est, tru, false, sse_plain);
    AlignmentResult mirror = fit(est, tru, true, sse_mirror);
    const double slack = 1e-9 * std::max(1.0, sse_plain);
    return sse_mirror < sse_plain - slack ? mirror : plain;
}

void write_constellation_csv(std::ostream& out, const PositionMap& positions) {
    out << "ap_id,x,y\n";
    char buf[96];
    for (const auto& [id, p] : positions) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.x, p.y);
        out << id.to_mac() << ',' << buf << '\n';
    }
}

PositionMap read_constellation_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "ap_id,x,y") throw std::invalid_argument("constellation CSV: bad header");
    PositionMap out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, x, y;
        if (!std::getline(ss, id, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y)) {
            throw std::invalid_argument("constellation CSV: bad row '" + line + "'");
        }
        out[ApId::parse(id)] = {std::stod(x), std::stod(y)};
    }
    return out;
}

nlohmann::json alignment_to_json(const AlignmentResult& result, const ApConstellation& constellation) {
    return {{"rotation_deg", result.alignment.rotation},
            {"translation", {result.alignment.translation.x, result.alignment.translation.y}},
            {"reflected", result.alignment.reflected},
            {"average_error", result.average_error},
            {"iterations", constellation.iteration},
            {"components", constellation.components.size()}};
}

}  // namespace chiloc
