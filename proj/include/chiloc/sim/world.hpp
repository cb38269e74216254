#pragma once

#include <optional>
#include <random>
#include <vector>

#include "chiloc/core/geometry.hpp"
#include "chiloc/core/records.hpp"

namespace chiloc {

using Rng = std::mt19937_64;

struct AccessPoint {
    ApId id;
    Point2 position;

    friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

struct Entrance {
    Point2 position;
    double width = 1.0;

    friend bool operator==(const Entrance&, const Entrance&) = default;
};

struct Room {
    Rect bounds;
    std::vector<Entrance> entrances;

    friend bool operator==(const Room&, const Room&) = default;
};

/// Ground truth of one synthetic floor. Origin is the lower-left corner.
struct GroundTruthFloor {
    double width = 0.0;
    double height = 0.0;
    std::vector<Room> rooms;
    std::vector<Polygon> obstacles;
    std::vector<AccessPoint> aps;

    Rect bounds() const { return {{0.0, 0.0}, {width, height}}; }
    const AccessPoint* find(ApId id) const;
    const AccessPoint& at(ApId id) const;
    bool blocked(Point2 p) const;
    /// Throws std::invalid_argument when a room, obstacle or AP lies outside the floor.
    void validate() const;

    friend bool operator==(const GroundTruthFloor&, const GroundTruthFloor&) = default;
};

/// Log-distance path loss with a hard coverage cut-off.
struct RssModel {
    double tx_power = -30.0;  // dBm at the reference distance
    double path_loss_exponent = 3.0;
    double reference_distance = 1.0;
    double coverage_radius = 10.0;
    double noise_sigma = 0.0;  // dB

    void validate() const;
    double noiseless(double d) const;

    friend bool operator==(const RssModel&, const RssModel&) = default;
};

/// Reported RSS of `ap` at `p`, or nullopt when out of coverage.
std::optional<double> rss_at(const GroundTruthFloor& floor, ApId ap, Point2 p, const RssModel& model, Rng& rng);

/// Every in-range AP at `p`, ordered by id.
Scan scan_at(const GroundTruthFloor& floor, Point2 p, const RssModel& model, Rng& rng);

/// Uniform error bounds on each reported step.
struct ImuNoiseModel {
    double heading_error_bound = 0.0;   // degrees
    double length_error_fraction = 0.0;

    /// Bounds multiplied by p (the fingerprinting accuracy factor).
    ImuNoiseModel scaled(double p) const { return {heading_error_bound * p, length_error_fraction * p}; }
    void validate() const;

    friend bool operator==(const ImuNoiseModel&, const ImuNoiseModel&) = default;
};

struct WalkerState {
    Point2 true_position;
    double true_heading = 0.0;
    double clock = 0.0;
    double speed = 1.0;

    friend bool operator==(const WalkerState&, const WalkerState&) = default;
};

struct WalkCommand {
    double heading = 0.0;
    double distance = 0.0;
};

struct StepResult {
    WalkerState state;
    DisplacementVector reported;
    Scan scan;
    bool clipped = false;
    double travelled = 0.0;
};

/// Advance the walker by the command. The move is clipped at the floor boundary and at
/// obstacles; the reported vector carries the IMU error.
StepResult step_walker(const GroundTruthFloor& floor, const WalkerState& state, WalkCommand command,
                       const ImuNoiseModel& noise, const RssModel& rss, Rng& rng);

}  // namespace chiloc
