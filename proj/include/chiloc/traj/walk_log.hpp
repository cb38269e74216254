#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chiloc/traj/segmentation.hpp"

namespace chiloc {

// Walk-log CSV. Header and column order:
//   timestamp,reported_heading_deg,reported_step_len,scan
// `scan` holds `ap:rss` pairs joined by ';' where ap is the MAC-style id. Numbers are
// written with round-trip precision.
inline constexpr const char* kWalkLogHeader = "timestamp,reported_heading_deg,reported_step_len,scan";

void write_walk_log(std::ostream& out, const std::vector<WalkStep>& steps);
std::vector<WalkStep> read_walk_log(std::istream& in);  // throws std::invalid_argument with a line number

void save_walk_log(const std::string& path, const std::vector<WalkStep>& steps);
std::vector<WalkStep> load_walk_log(const std::string& path);

}  // namespace chiloc
