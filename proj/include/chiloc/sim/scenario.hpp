#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chiloc/sim/world.hpp"

namespace chiloc {

using ApPair = std::pair<ApId, ApId>;

/// Everything a session or an evaluation replica needs to stand up a world.
struct Scenario {
    std::string name;
    std::string unit = "length-units";
    GroundTruthFloor floor;
    RssModel rss;
    ImuNoiseModel imu;
    std::uint64_t seed = 0;
    Point2 start;                // walker start, lower-left by default
    std::vector<ApPair> edges;   // AP pairs joined by an AP-to-AP trajectory, first < second

    std::map<ApId, Point2> ap_positions() const;
    std::map<ApId, std::vector<ApId>> adjacency() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct RandomScenarioParams {
    std::size_t n_aps = 100;
    double width = 100.0;
    double height = 100.0;
    double sector_edge_prob = 0.5;
    /// Only APs within this distance count as neighbours when building sector edges.
    double neighbor_range = 20.0;
    std::uint64_t seed = 1;
};

/// Uniform AP deployment plus the sector-neighbour trajectory graph with isolated-AP repair.
Scenario generate_random_scenario(const RandomScenarioParams& params);

bool trajectory_graph_connected(const Scenario& s);

/// "grid100" (seeded 100-AP square, redrawn until its trajectory graph is connected) or "office17" (fixed 17-AP office floor).
Scenario builtin_scenario(std::string_view name, std::uint64_t seed);

/// Resolves "builtin:<name>" or a scenario file path. For builtins, `seed` selects the replica.
Scenario resolve_scenario(const std::string& spec, std::uint64_t seed);

inline constexpr int kScenarioSchemaVersion = 1;

nlohmann::json scenario_to_json(const Scenario& s);
/// Throws std::invalid_argument on schema or version errors.
Scenario scenario_from_json(const nlohmann::json& j);

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace chiloc
