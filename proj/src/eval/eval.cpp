#include "chiloc/eval/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "chiloc/core/sectors.hpp"
#include "chiloc/planner/coverage.hpp"

namespace chiloc {

namespace {

double parse_number(const std::string& s) {
    const auto slash = s.find('/');
    std::size_t used = 0;
    try {
        if (slash == std::string::npos) {
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        }
        const double num = std::stod(s.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument(s);
        const std::string den_s = s.substr(slash + 1);
        const double den = std::stod(den_s, &used);
        if (used != den_s.size() || den == 0.0) throw std::invalid_argument(s);
        return num / den;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number '" + s + "' in approach");
    }
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

ApproachConfig ApproachConfig::parse(const std::string& text) {
    ApproachConfig a;
    a.label = text;
    if (text == "chi") return a;
    if (text.rfind("fp:", 0) == 0) {
        const std::string rest = text.substr(3);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("fingerprinting approach must be fp:<p>,<c>");
        a.kind = ApproachKind::Fingerprinting;
        a.p = parse_number(rest.substr(0, comma));
        a.c = parse_number(rest.substr(comma + 1));
        if (!(a.p > 0.0 && a.p < 1.0)) throw std::invalid_argument("fingerprinting p must lie in (0, 1)");
        if (!(a.c > 1.0)) throw std::invalid_argument("fingerprinting c must be > 1");
        return a;
    }
    if (text.rfind("crowd:", 0) == 0) {
        const std::string k = text.substr(6);
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(k, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != k.size() || k.empty() || v < 1 || v > 100000) throw std::invalid_argument("crowd count must be a positive integer");
        a.kind = ApproachKind::Crowdsourcing;
        a.crowds = static_cast<int>(v);
        return a;
    }
    throw std::invalid_argument("unknown approach '" + text + "' (expected chi, fp:<p>,<c> or crowd:<k>)");
}

double expense(double t, const CostParams& params) { return t * params.e_l + params.b * params.e_d; }

CostParams default_cost(const ApproachConfig& a) {
    switch (a.kind) {
        case ApproachKind::Chi: return {0.1, 36.0, 1.0};
        case ApproachKind::Fingerprinting: return {0.1, 36.0 / a.p, 1.0};
        case ApproachKind::Crowdsourcing: return {0.0, 0.0, static_cast<double>(a.crowds)};
    }
    return {};
}

ApId random_walk_policy(const Adjacency& graph, ApId current, Rng& rng) {
    auto it = graph.find(current);
    if (it == graph.end() || it->second.empty()) {
        throw std::invalid_argument("AP " + current.to_mac() + " has no incident trajectory edge");
    }
    const auto& nb = it->second;
    if (nb.size() == 1) return nb.front();
    return nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
}

namespace {

struct Leg {
    ApId from;
    ApId to;
};

// A trajectory observation due at time `t`: the AP-to-AP walk along `legs`.
struct Observation {
    double t = 0.0;
    std::vector<Leg> legs;
};

class Replica {
public:
    Replica(const Scenario& s, const ApproachConfig& a, const EvalOptions& o, std::uint64_t seed)
        : scenario_(s), approach_(a), options_(o), truth_(s.ap_positions()), graph_(s.adjacency()) {
        const std::uint64_t base = splitmix(seed ^ fnv1a(a.label));
        walk_rng_.seed(splitmix(base + 1));
        measure_rng_.seed(splitmix(base + 2));
        const double p = a.kind == ApproachKind::Fingerprinting ? a.p : 1.0;
        noise_ = s.imu.scaled(p);
        for (const auto& [id, pos] : truth_) ids_.push_back(id);
    }

    ProcessResult run() {
        std::vector<Observation> obs =
            approach_.kind == ApproachKind::Crowdsourcing ? crowd_observations() : sweep_observations();
        ProcessResult out;
        std::size_t next = 0;
        const auto checkpoints = static_cast<std::size_t>(std::floor(options_.horizon / options_.checkpoint + 1e-9));
        for (std::size_t k = 0; k <= checkpoints; ++k) {
            const double t = static_cast<double>(k) * options_.checkpoint;
            while (next < obs.size() && obs[next].t <= t) fuse(obs[next++]);
            out.series.push_back({t, error_now()});
        }
        out.edges = select_positioning_edges(pools_);
        out.observations = next;
        return out;
    }

private:
    double leg_length(const Leg& l) const { return distance(truth_.at(l.from), truth_.at(l.to)); }

    std::vector<ApId> hamilton_order() const {
        std::vector<Point2> pts;
        for (auto id : ids_) pts.push_back(truth_.at(id));
        const auto path = shortest_hamilton_path(pts, scenario_.floor.bounds().min);
        std::vector<ApId> order;
        for (auto p : path) {
            for (auto id : ids_) {
                if (truth_.at(id) == p && std::find(order.begin(), order.end(), id) == order.end()) {
                    order.push_back(id);
                    break;
                }
            }
        }
        return order;
    }

    // CHI and fingerprinting: repeated sweeps along the Hamilton order of APs.
    std::vector<Observation> sweep_observations() const {
        const std::vector<ApId> order = hamilton_order();
        const bool chi = approach_.kind == ApproachKind::Chi;
        const double c = chi ? 1.0 : approach_.c;
        std::vector<Observation> out;
        double t = 0.0;
        if (order.empty()) return out;
        while (t < options_.horizon) {
            std::set<std::pair<ApId, ApId>> done;
            for (std::size_t i = 0; i < order.size() && t <= options_.horizon; ++i) {
                const ApId a = order[i];
                std::vector<ApId> nb = graph_.count(a) ? graph_.at(a) : std::vector<ApId>{};
                std::sort(nb.begin(), nb.end(), [&](ApId x, ApId y) {
                    const int sx = sector_index(truth_.at(a), truth_.at(x));
                    const int sy = sector_index(truth_.at(a), truth_.at(y));
                    return sx != sy ? sx < sy : x < y;
                });
                for (ApId b : nb) {
                    if (!done.insert(std::minmax(a, b)).second) continue;
                    t += c * leg_length({a, b});
                    out.push_back({t, {{a, b}}});
                }
                if (i + 1 < order.size()) {
                    const Leg transit{a, order[i + 1]};
                    t += leg_length(transit);
                    if (chi) out.push_back({t, {transit}});
                }
            }
        }
        return out;
    }

    // Crowdsourcing: independent random walkers, all running for the whole horizon.
    std::vector<Observation> crowd_observations() {
        std::vector<std::pair<Observation, int>> tagged;
        for (int w = 0; w < approach_.crowds; ++w) {
            ApId a = ids_[std::uniform_int_distribution<std::size_t>(0, ids_.size() - 1)(walk_rng_)];
            double heading_in = std::uniform_real_distribution<double>(0.0, 360.0)(walk_rng_);
            std::optional<ApId> last;
            std::vector<Leg> chain;
            double t = 0.0;
            while (t < options_.horizon) {
                const ApId b = random_walk_policy(graph_, a, walk_rng_);
                const double h = bearing_of(truth_.at(b) - truth_.at(a));
                if (heading_diff(h, heading_in) <= options_.mark_turn_threshold) {
                    if (last && *last != a) tagged.push_back({{t, chain}, w});
                    last = a;
                    chain.clear();
                }
                chain.push_back({a, b});
                heading_in = h;
                t += leg_length({a, b});
                a = b;
            }
        }
        std::stable_sort(tagged.begin(), tagged.end(), [](const auto& x, const auto& y) { return x.first.t < y.first.t; });
        std::vector<Observation> out;
        out.reserve(tagged.size());
        for (auto& [o, w] : tagged) out.push_back(std::move(o));
        return out;
    }

    void fuse(const Observation& o) {
        Vec2 sum;
        double length = 0.0;
        for (const auto& leg : o.legs) {
            const Vec2 d = truth_.at(leg.to) - truth_.at(leg.from);
            const double dh = std::uniform_real_distribution<double>(-noise_.heading_error_bound, noise_.heading_error_bound)(measure_rng_);
            const double f = std::uniform_real_distribution<double>(1.0 - noise_.length_error_fraction,
                                                                    1.0 + noise_.length_error_fraction)(measure_rng_);
            const DisplacementVector v(bearing_of(d) + dh, d.norm() * f);
            sum += v.offset();
            length += v.length();
        }
        const ApId from = o.legs.front().from;
        const ApId to = o.legs.back().to;
        const double depart = bearing_of(truth_.at(o.legs.front().to) - truth_.at(from));
        const double arrive = bearing_of(truth_.at(to) - truth_.at(o.legs.back().from));
        PoolKey key;
        PoolMember member{sum, length, o.t, o.t};
        if (from < to) {
            key = {from, to, sector_of_bearing(depart)};
        } else {
            key = {to, from, sector_of_bearing(arrive + 180.0)};
            member.offset = -sum;
        }
        auto [it, fresh] = pools_.try_emplace(key, FusionPool(key));
        it->second.add(member);
    }

    double error_now() const {
        const auto edges = select_positioning_edges(pools_);
        PositionMap est;
        if (edges.empty()) {
            for (auto id : ids_) est[id] = {};
        } else {
            PositioningOptions po;
            po.max_iterations = options_.position_iterations;
            est = position_aps(edges, po, ids_).positions;
        }
        return align_to_truth(est, truth_).average_error;
    }

    const Scenario& scenario_;
    const ApproachConfig& approach_;
    const EvalOptions& options_;
    PositionMap truth_;
    Adjacency graph_;
    std::vector<ApId> ids_;
    ImuNoiseModel noise_;
    Rng walk_rng_;
    Rng measure_rng_;
    PoolMap pools_;
};

}  // namespace

ProcessResult run_process(const Scenario& scenario, const ApproachConfig& approach, const EvalOptions& options,
                          std::uint64_t seed) {
    if (!(options.checkpoint > 0.0) || !(options.horizon >= 0.0)) {
        throw std::invalid_argument("evaluation needs checkpoint > 0 and horizon >= 0");
    }
    if (scenario.floor.aps.size() < 2) throw std::invalid_argument("evaluation needs at least two APs");
    Replica r(scenario, approach, options, seed);
    return r.run();
}

std::optional<double> time_to_reach(const std::vector<SeriesPoint>& series, double target) {
    for (const auto& p : series) {
        if (p.error < target) return p.t;
    }
    return std::nullopt;
}

std::vector<ExpenseRow> error_vs_expense(const std::map<std::string, std::vector<SeriesPoint>>& curves,
                                         const std::map<std::string, ApproachConfig>& approaches,
                                         const std::vector<double>& targets) {
    for (std::size_t i = 1; i < targets.size(); ++i) {
        if (!(targets[i] < targets[i - 1])) throw std::invalid_argument("error targets must be strictly descending");
    }
    std::vector<ExpenseRow> rows;
    for (const auto& [label, series] : curves) {
        const CostParams cost = default_cost(approaches.at(label));
        for (double target : targets) {
            ExpenseRow row{label, target, time_to_reach(series, target), std::nullopt};
            if (row.t) row.expense = expense(*row.t, cost);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<SeriesPoint> EvalReport::mean_curve(const std::string& label) const {
    const auto& runs = curves.at(label);
    if (runs.empty()) return {};
    std::vector<SeriesPoint> mean = runs.front();
    for (auto& p : mean) p.error = 0.0;
    for (const auto& r : runs) {
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i].error += r.at(i).error;
    }
    for (auto& p : mean) p.error /= static_cast<double>(runs.size());
    return mean;
}

double EvalReport::mean_at(const std::string& label, double t) const {
    const auto mean = mean_curve(label);
    if (mean.empty()) throw std::invalid_argument("no runs for " + label);
    const auto it = std::min_element(mean.begin(), mean.end(),
                                     [&](const SeriesPoint& a, const SeriesPoint& b) { return std::fabs(a.t - t) < std::fabs(b.t - t); });
    return it->error;
}

EvalReport run_evaluation(const std::string& scenario_spec, const std::vector<ApproachConfig>& approaches,
                          const std::vector<std::uint64_t>& seeds, const EvalOptions& options, unsigned threads) {
    EvalReport report;
    report.approaches = approaches;
    report.seeds = seeds;
    std::vector<Scenario> scenarios;
    for (auto s : seeds) scenarios.push_back(resolve_scenario(scenario_spec, s));
    for (const auto& a : approaches) report.curves[a.label].resize(seeds.size());

    const std::size_t jobs = seeds.size() * approaches.size();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(jobs, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto worker = [&](unsigned w) {
        try {
            for (std::size_t j = next++; j < jobs; j = next++) {
                const std::size_t si = j / approaches.size();
                const ApproachConfig& a = approaches[j % approaches.size()];
                // each job owns a distinct slot, so no locking is needed
                report.curves[a.label][si] = run_process(scenarios[si], a, options, seeds[si]).series;
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker, w);
    worker(0);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return report;
}

void write_curves_csv(std::ostream& out, const EvalReport& report) {
    out << "seed,approach,t,avg_error\n";
    char buf[64];
    for (const auto& a : report.approaches) {
        const auto& runs = report.curves.at(a.label);
        for (std::size_t s = 0; s < runs.size(); ++s) {
            for (const auto& p : runs[s]) {
                std::snprintf(buf, sizeof buf, "%g,%.9g", p.t, p.error);
                out << report.seeds[s] << ',' << a.label << ',' << buf << '\n';
            }
        }
    }
}

void write_expense_csv(std::ostream& out, const std::vector<ExpenseRow>& rows) {
    out << "approach,target,reached,t,expense\n";
    for (const auto& r : rows) {
        out << r.approach << ',' << r.target << ',' << (r.t ? "true" : "false") << ',';
        if (r.t) out << *r.t;
        out << ',';
        if (r.expense) out << *r.expense;
        out << '\n';
    }
}

std::string curves_svg(const EvalReport& report) {
    const double W = 720, H = 420, L = 60, R = 160, T = 20, B = 40;
    double tmax = 1.0, emax = 1.0;
    std::map<std::string, std::vector<SeriesPoint>> means;
    for (const auto& a : report.approaches) {
        means[a.label] = report.mean_curve(a.label);
        for (const auto& p : means[a.label]) {
            tmax = std::max(tmax, p.t);
            emax = std::max(emax, p.error);
        }
    }
    auto X = [&](double t) { return L + (W - L - R) * t / tmax; };
    auto Y = [&](double e) { return H - B - (H - T - B) * e / emax; };
    static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", W, H);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L, H - B, W - R, H - B);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", L, T, L, H - B);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">time (%.0f max)</text>\n", L, H - 10, tmax);
    svg += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%.1f\" font-size=\"12\">error (%.1f max)</text>\n", T + 10, emax);
    svg += buf;
    std::size_t i = 0;
    for (const auto& a : report.approaches) {
        const char* col = colors[i % 8];
        std::string pts;
        for (const auto& p : means[a.label]) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", X(p.t), Y(p.error));
            pts += buf;
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">%s</text>\n", W - R + 10,
                      T + 16.0 * static_cast<double>(i + 1), col, a.label.c_str());
        svg += buf;
        ++i;
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<PropertyCheck> check_properties(const EvalReport& report) {
    std::vector<PropertyCheck> out;
    auto has = [&](const std::string& l) { return report.curves.count(l) > 0; };
    double horizon = 0.0;
    for (const auto& [l, runs] : report.curves) {
        if (!runs.empty() && !runs.front().empty()) horizon = runs.front().back().t;
    }
    char buf[256];
    if (has("chi") && horizon >= 8000.0) {
        const double chi = report.mean_at("chi", 8000.0);
        for (const char* other : {"crowd:5", "fp:1/5,5"}) {
            if (!has(other)) continue;
            const double o = report.mean_at(other, 8000.0);
            std::snprintf(buf, sizeof buf, "chi %.3f vs %s %.3f at 8000", chi, other, o);
            out.push_back({std::string("ordering chi < ") + other, chi < o, buf});
        }
    }
    if (has("chi") && horizon >= 24000.0) {
        const auto mean = report.mean_curve("chi");
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : mean) {
            if (p.t < 8000.0 || p.t > 24000.0) continue;
            lo = std::min(lo, p.error);
            hi = std::max(hi, p.error);
            sum += p.error;
            ++n;
        }
        const double variation = (hi - lo) / (sum / static_cast<double>(n));
        std::snprintf(buf, sizeof buf, "relative variation %.3f over [8000, 24000]", variation);
        out.push_back({"chi plateau", variation < 0.15, buf});
        if (has("fp:1/7,7")) {
            const double fp = report.mean_at("fp:1/7,7", 22000.0), chi = report.mean_at("chi", 22000.0);
            std::snprintf(buf, sizeof buf, "fp:1/7,7 %.3f vs chi %.3f at 22000", fp, chi);
            out.push_back({"fingerprinting crossover", fp < chi, buf});
        }
    }
    if (has("crowd:5") && has("crowd:10") && horizon > 0.0) {
        const double c5 = report.mean_at("crowd:5", horizon), c10 = report.mean_at("crowd:10", horizon);
        const double rel = std::fabs(c10 - c5) / c5;
        std::snprintf(buf, sizeof buf, "crowd:10 %.3f vs crowd:5 %.3f (relative %.3f)", c10, c5, rel);
        out.push_back({"crowd insensitivity", rel < 0.25, buf});
    }
    return out;
}

}  // namespace chiloc
