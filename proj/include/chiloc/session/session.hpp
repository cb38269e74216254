#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chiloc/floorplan/floorplan.hpp"
#include "chiloc/planner/gaps.hpp"
#include "chiloc/session/objectives.hpp"
#include "chiloc/sim/scenario.hpp"
#include "chiloc/traj/segmentation.hpp"

namespace chiloc {

inline constexpr int kSessionSchemaVersion = 1;

struct SessionConfig {
    double direction_threshold = 20.0;  // AP-mark and segmentation threshold, degrees
    double step_length = 1.0;           // walk commands are split into steps of at most this length
    ImuNoiseModel imu{5.0, 0.05};       // per-step reporting error
    double floorplan_spacing = 2.0;
    PlanRuleConfig rules;
    GapOptions gaps;
    bool infer_floorplan = true;

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

nlohmann::json session_config_to_json(const SessionConfig& c);
/// Missing fields keep their defaults; unknown fields are rejected.
SessionConfig session_config_from_json(const nlohmann::json& j);

/// Rejected because the session was closed.
class SessionClosedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Rejected by the stored-state check while loading a save file.
class ReplayMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SessionEvent {
    std::uint64_t seq = 0;
    nlohmann::json command;
    nlohmann::json delta;
};

/// One operator's interaction with one simulated floor. Every state change goes through
/// tick(); the event log therefore replays to the same state.
class Session {
public:
    Session(Scenario scenario, SessionConfig config, std::uint64_t seed);
    explicit Session(Scenario scenario) : Session(scenario, {}, scenario.seed) {}

    /// Applies a command and returns its delta. Commands:
    ///   {"type":"walk","heading":deg,"distance":d}
    ///   {"type":"walk_to","x":x,"y":y}             (in the operator's frame)
    ///   {"type":"terminate"}                       (ends the head objective)
    ///   {"type":"correct","id":n, "kind"?, "outline"?, "polyline"?, "position"?, "width"?, "lock"?}
    ///   {"type":"lock","id":n}
    ///   {"type":"set_objectives","objectives":[...]}
    ///   {"type":"close"}
    /// Throws std::invalid_argument for a malformed command and SessionClosedError after close.
    nlohmann::json tick(const nlohmann::json& command);

    nlohmann::json state_json() const;
    std::string canonical_state() const { return state_json().dump(); }
    nlohmann::json suggestions_json() const;

    const Scenario& scenario() const { return scenario_; }
    const SessionConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    bool closed() const { return closed_; }
    const WalkerState& walker() const { return walker_; }
    Point2 position() const { return dr_.back(); }
    const std::vector<WalkStep>& steps() const { return steps_; }
    const std::vector<Point2>& true_path() const { return truth_; }
    const std::vector<Point2>& dead_reckoned_path() const { return dr_; }
    const std::vector<ApMarkVector>& marks() const { return marks_; }
    const PoolMap& pools() const { return pools_; }
    const PositionMap& constellation() const { return constellation_; }
    const std::vector<Objective>& objectives() const { return objectives_; }
    const FloorPlan& floorplan() const { return floorplan_; }
    const std::vector<SessionEvent>& events() const { return events_; }
    std::size_t trajectory_count() const { return trajectory_count_; }

private:
    nlohmann::json apply(const nlohmann::json& command);
    void walk(double heading, double distance, nlohmann::json& delta);
    void record_scan(const Scan& scan, double timestamp, double heading, nlohmann::json& delta);
    void close_window(ApId ap, nlohmann::json& delta);
    void flush_windows(nlohmann::json& delta);
    void finalize_trajectories(bool flush, nlohmann::json& delta);
    void refresh_constellation();
    void check_completion(nlohmann::json& delta);
    void set_objectives(const nlohmann::json& list, nlohmann::json& delta);
    CoveragePlan plan_for(const ObjectiveSpec& spec) const;
    std::optional<std::size_t> step_at(double timestamp) const;

    Scenario scenario_;
    SessionConfig config_;
    std::uint64_t seed_ = 0;
    Rng rng_;
    bool closed_ = false;

    WalkerState walker_;
    std::vector<WalkStep> steps_;
    std::vector<Point2> truth_;  // index 0 is the start, index k the end of step k
    std::vector<Point2> dr_;
    std::vector<Polygon> learned_obstacles_;

    std::map<ApId, std::vector<MarkRecord>> open_windows_;
    std::vector<ApMarkVector> marks_;  // time-ordered
    std::size_t finalized_pairs_ = 0;  // consecutive mark pairs already turned into trajectories
    std::size_t trajectory_count_ = 0;
    PoolMap pools_;
    PositionMap constellation_;
    std::vector<std::vector<ApId>> components_;

    std::vector<Objective> objectives_;
    std::uint32_t next_objective_id_ = 1;
    FloorPlan floorplan_;
    std::vector<nlohmann::json> track_results_;
    std::vector<SessionEvent> events_;
};

/// Save file = canonical state. Loading replays the event log from the stored scenario,
/// config and seed, then byte-compares against the stored state.
void save_session(const Session& session, const std::string& path);
Session load_session(const std::string& path);
/// Same as load_session on an already parsed document. Throws std::invalid_argument for
/// schema and version problems and ReplayMismatchError when the replay disagrees.
Session session_from_json(const nlohmann::json& doc);

}  // namespace chiloc
