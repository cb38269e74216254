#include "chiloc/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chiloc {

const AccessPoint* GroundTruthFloor::find(ApId id) const {
    for (const auto& ap : aps) {
        if (ap.id == id) return &ap;
    }
    return nullptr;
}

const AccessPoint& GroundTruthFloor::at(ApId id) const {
    if (const auto* ap = find(id)) return *ap;
    throw std::invalid_argument("unknown AP " + id.to_mac());
}

bool GroundTruthFloor::blocked(Point2 p) const {
    if (!bounds().contains(p)) return true;
    return std::any_of(obstacles.begin(), obstacles.end(), [&](const Polygon& o) { return o.contains(p); });
}

void GroundTruthFloor::validate() const {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw std::invalid_argument("floor dimensions must be positive");
    }
    const Rect b = bounds();
    for (const auto& room : rooms) {
        if (!b.contains(room.bounds.min) || !b.contains(room.bounds.max)) throw std::invalid_argument("room outside floor");
    }
    for (const auto& o : obstacles) {
        for (auto v : o.vertices) {
            if (!b.contains(v)) throw std::invalid_argument("obstacle outside floor");
        }
    }
    for (std::size_t i = 0; i < aps.size(); ++i) {
        if (!b.contains(aps[i].position)) throw std::invalid_argument("AP " + aps[i].id.to_mac() + " outside floor");
        for (std::size_t j = 0; j < i; ++j) {
            if (aps[i].id == aps[j].id) throw std::invalid_argument("duplicate AP id " + aps[i].id.to_mac());
        }
    }
}

void RssModel::validate() const {
    if (!(coverage_radius > 0.0)) throw std::invalid_argument("coverage_radius must be > 0");
    if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("path_loss_exponent must be > 0");
    if (!(reference_distance > 0.0)) throw std::invalid_argument("reference_distance must be > 0");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
}

double RssModel::noiseless(double d) const {
    return tx_power - 10.0 * path_loss_exponent * std::log10(std::max(d, reference_distance) / reference_distance);
}

std::optional<double> rss_at(const GroundTruthFloor& floor, ApId ap, Point2 p, const RssModel& model, Rng& rng) {
    const AccessPoint& a = floor.at(ap);
    const double d = distance(a.position, p);
    if (d > model.coverage_radius) return std::nullopt;
    double value = model.noiseless(d);
    if (model.noise_sigma > 0.0) value += std::normal_distribution<double>(0.0, model.noise_sigma)(rng);
    return value;
}

Scan scan_at(const GroundTruthFloor& floor, Point2 p, const RssModel& model, Rng& rng) {
    std::vector<const AccessPoint*> order;
    order.reserve(floor.aps.size());
    for (const auto& ap : floor.aps) order.push_back(&ap);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
    Scan scan;
    for (const auto* ap : order) {
        if (auto v = rss_at(floor, ap->id, p, model, rng)) scan.push_back({ap->id, *v});
    }
    return scan;
}

void ImuNoiseModel::validate() const {
    if (!(heading_error_bound >= 0.0) || !(length_error_fraction >= 0.0) || length_error_fraction >= 1.0) {
        throw std::invalid_argument("IMU error bounds must be >= 0 (length fraction < 1)");
    }
}

namespace {

// Largest t in [0,1] keeping a + t*(b-a) inside the rectangle; `a` is assumed inside.
double clip_to_rect(Point2 a, Point2 b, const Rect& r) {
    double t = 1.0;
    const Vec2 d = b - a;
    auto axis = [&](double start, double delta, double lo, double hi) {
        if (delta > 0.0 && start + delta > hi) t = std::min(t, (hi - start) / delta);
        if (delta < 0.0 && start + delta < lo) t = std::min(t, (lo - start) / delta);
    };
    axis(a.x, d.x, r.min.x, r.max.x);
    axis(a.y, d.y, r.min.y, r.max.y);
    return std::max(t, 0.0);
}

}  // namespace

StepResult step_walker(const GroundTruthFloor& floor, const WalkerState& state, WalkCommand command,
                       const ImuNoiseModel& noise, const RssModel& rss, Rng& rng) {
    if (!(command.distance >= 0.0) || !std::isfinite(command.distance) || !std::isfinite(command.heading)) {
        throw std::invalid_argument("walk command needs a finite heading and distance >= 0");
    }
    const double heading = normalize_heading(command.heading);
    const Point2 from = state.true_position;
    const Point2 target = from + DisplacementVector(heading, command.distance).offset();

    double t = clip_to_rect(from, target, floor.bounds());
    for (const auto& obstacle : floor.obstacles) {
        if (auto hit = first_boundary_hit(from, target, obstacle)) t = std::min(t, *hit);
    }
    const bool clipped = t < 1.0;
    double travelled = command.distance * t;
    if (clipped) travelled = std::max(0.0, travelled - 1e-9);

    const double heading_err =
        std::uniform_real_distribution<double>(-noise.heading_error_bound, noise.heading_error_bound)(rng);
    const double length_factor = std::uniform_real_distribution<double>(1.0 - noise.length_error_fraction,
                                                                        1.0 + noise.length_error_fraction)(rng);

    StepResult out;
    out.clipped = clipped;
    out.travelled = travelled;
    out.state = state;
    out.state.true_position = from + DisplacementVector(heading, travelled).offset();
    if (!clipped) out.state.true_position = from + (target - from);
    out.state.true_heading = heading;
    out.state.clock = state.clock + travelled / state.speed;
    out.reported = DisplacementVector(heading + heading_err, travelled * length_factor);
    out.scan = scan_at(floor, out.state.true_position, rss, rng);
    return out;
}

}  // namespace chiloc
