#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chiloc/positioning/positioning.hpp"
#include "chiloc/sim/scenario.hpp"

namespace chiloc {

enum class ApproachKind { Chi, Fingerprinting, Crowdsourcing };

struct ApproachConfig {
    ApproachKind kind = ApproachKind::Chi;
    double p = 1.0;   // fingerprinting error scale, 0 < p < 1
    double c = 1.0;   // fingerprinting time per length, > 1
    int crowds = 1;   // crowdsourcing walkers
    std::string label = "chi";

    /// "chi", "fp:<p>,<c>" (p may be a fraction such as 1/5) or "crowd:<k>".
    /// Throws std::invalid_argument.
    static ApproachConfig parse(const std::string& text);
};

struct CostParams {
    double e_l = 0.0;  // expense per laborer time unit
    double e_d = 0.0;  // expense per device
    double b = 0.0;    // device count
};

/// E = t * e_l + b * e_d
double expense(double t, const CostParams& params);

/// CHI (0.1, 36), fingerprinting (0.1, 36/p), crowdsourcing (0, 0); one device per walker.
CostParams default_cost(const ApproachConfig& approach);

struct EvalOptions {
    double horizon = 24000.0;
    double checkpoint = 250.0;
    std::size_t position_iterations = 100;
    double mark_turn_threshold = 20.0;  // crowdsourcing walkers only mark an AP they pass this straight
};

struct SeriesPoint {
    double t = 0.0;
    double error = 0.0;

    friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct ProcessResult {
    std::vector<SeriesPoint> series;
    std::vector<DisplacementEdge> edges;  // positioning edges at the horizon
    std::size_t observations = 0;
};

using Adjacency = std::map<ApId, std::vector<ApId>>;

/// Uniform choice among the incident edges of `current`. Throws std::invalid_argument
/// when `current` has none.
ApId random_walk_policy(const Adjacency& graph, ApId current, Rng& rng);

/// One replica of a localization process. `seed` drives every random draw.
ProcessResult run_process(const Scenario& scenario, const ApproachConfig& approach, const EvalOptions& options,
                          std::uint64_t seed);

/// First checkpoint whose error is below `target`, or nullopt.
std::optional<double> time_to_reach(const std::vector<SeriesPoint>& series, double target);

struct ExpenseRow {
    std::string approach;
    double target = 0.0;
    std::optional<double> t;
    std::optional<double> expense;
};

/// Expense table: per approach and target, the first time the curve is below the
/// target and the matching expense.
std::vector<ExpenseRow> error_vs_expense(const std::map<std::string, std::vector<SeriesPoint>>& curves,
                                         const std::map<std::string, ApproachConfig>& approaches,
                                         const std::vector<double>& targets);

struct EvalReport {
    std::vector<ApproachConfig> approaches;
    std::vector<std::uint64_t> seeds;
    /// curves[label][seed index]
    std::map<std::string, std::vector<std::vector<SeriesPoint>>> curves;

    std::vector<SeriesPoint> mean_curve(const std::string& label) const;
    /// Mean over seeds of the error at the checkpoint closest to t.
    double mean_at(const std::string& label, double t) const;
};

/// Runs every (seed, approach) replica, spread over `threads` workers (0 = hardware).
/// The scenario is resolved per seed so builtin generators give independent floors.
EvalReport run_evaluation(const std::string& scenario_spec, const std::vector<ApproachConfig>& approaches,
                          const std::vector<std::uint64_t>& seeds, const EvalOptions& options, unsigned threads = 0);

void write_curves_csv(std::ostream& out, const EvalReport& report);
void write_expense_csv(std::ostream& out, const std::vector<ExpenseRow>& rows);
std::string curves_svg(const EvalReport& report);

struct PropertyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// The ordering, plateau, crossover and insensitivity properties that the report has the
/// approaches and horizon for.
std::vector<PropertyCheck> check_properties(const EvalReport& report);

inline const std::vector<double> kDefaultErrorTargets{15, 12, 9, 7, 6, 5, 4, 3};

}  // namespace chiloc
