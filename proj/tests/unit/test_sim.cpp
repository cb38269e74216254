#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <set>

#include "chiloc/core/sectors.hpp"
#include "chiloc/sim/accel.hpp"
#include "chiloc/sim/scenario.hpp"
#include "chiloc/sim/world.hpp"

using namespace chiloc;

namespace {

GroundTruthFloor small_floor() {
    GroundTruthFloor f;
    f.width = 50;
    f.height = 50;
    f.aps = {{ApId{1}, {10, 10}}, {ApId{2}, {30, 10}}};
    f.obstacles = {rect_polygon({{20, 20}, {25, 25}})};
    return f;
}

// Index of the largest-magnitude DFT bin (excluding DC) of a real signal.
std::size_t dominant_bin(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::size_t best = 1;
    double best_mag = -1.0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        std::complex<double> acc;
        for (std::size_t t = 0; t < n; ++t) {
            acc += (x[t] - mean) * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / static_cast<double>(n));
        }
        if (std::abs(acc) > best_mag) {
            best_mag = std::abs(acc);
            best = k;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("log-distance RSS") {
    const GroundTruthFloor f = small_floor();
    RssModel m;
    Rng rng(1);
    CHECK(*rss_at(f, ApId{1}, {11, 10}, m, rng) == doctest::Approx(m.tx_power));
    CHECK_FALSE(rss_at(f, ApId{1}, {10, 20.5}, m, rng).has_value());
    double prev = *rss_at(f, ApId{1}, {11, 10}, m, rng);
    for (double d = 1.5; d <= m.coverage_radius; d += 0.5) {
        const double v = *rss_at(f, ApId{1}, {10 + d, 10}, m, rng);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(rss_at(f, ApId{9}, {0, 0}, m, rng), std::invalid_argument);

    const Scan scan = scan_at(f, {20, 10}, m, rng);
    REQUIRE(scan.size() == 2);
    CHECK(scan[0].ap == ApId{1});
    CHECK(scan[0].rss == doctest::Approx(scan[1].rss));
}

TEST_CASE("walker steps") {
    const GroundTruthFloor f = small_floor();
    RssModel rss;
    Rng rng(5);
    WalkerState s{{5, 5}, 0, 0, 1};

    SUBCASE("noiseless") {
        const StepResult r = step_walker(f, s, {0.0, 5.0}, {}, rss, rng);
        CHECK(r.reported.heading() == 0.0);
        CHECK(r.reported.length() == 5.0);
        CHECK(r.state.clock == 5.0);
        CHECK(r.state.true_position == Point2{10, 5});
        CHECK_FALSE(r.clipped);
    }
    SUBCASE("bounded noise") {
        const ImuNoiseModel noise{30.0, 0.10};
        for (int i = 0; i < 10000; ++i) {
            const StepResult r = step_walker(f, s, {90.0, 4.0}, noise, rss, rng);
            REQUIRE(heading_diff(r.reported.heading(), 90.0) <= 30.0);
            REQUIRE(r.reported.length() >= 0.9 * 4.0 - 1e-12);
            REQUIRE(r.reported.length() <= 1.1 * 4.0 + 1e-12);
            REQUIRE(r.state.true_position == Point2{5, 9});
        }
    }
    SUBCASE("clipped by an obstacle") {
        const WalkerState near{{15, 22}, 0, 0, 1};
        const StepResult r = step_walker(f, near, {0.0, 10.0}, {}, rss, rng);
        CHECK(r.clipped);
        CHECK(r.state.true_position.x <= 20.0);
        CHECK(r.state.true_position.x == doctest::Approx(20.0));
        CHECK_FALSE(f.obstacles[0].contains({r.state.true_position.x - 1e-6, 22}));
    }
    SUBCASE("clipped by the floor edge") {
        const StepResult r = step_walker(f, s, {180.0, 10.0}, {}, rss, rng);
        CHECK(r.clipped);
        CHECK(r.state.true_position.x == doctest::Approx(0.0));
        CHECK(r.state.clock == doctest::Approx(5.0));
    }
    CHECK_THROWS_AS(step_walker(f, s, {0.0, -1.0}, {}, rss, rng), std::invalid_argument);
}

TEST_CASE("random scenario generation") {
    RandomScenarioParams p;
    p.seed = 11;
    const Scenario s = generate_random_scenario(p);
    CHECK(s.floor.aps.size() == 100);
    for (const auto& ap : s.floor.aps) {
        CHECK(ap.position.x >= 0);
        CHECK(ap.position.x <= 100);
        CHECK(ap.position.y >= 0);
        CHECK(ap.position.y <= 100);
    }
    for (const auto& [id, nb] : s.adjacency()) CHECK(nb.size() >= 1);
    CHECK(generate_random_scenario(p) == s);

    SUBCASE("probability one fills every occupied sector") {
        RandomScenarioParams q = p;
        q.n_aps = 30;
        q.sector_edge_prob = 1.0;
        const Scenario full = generate_random_scenario(q);
        const std::set<ApPair> edges(full.edges.begin(), full.edges.end());
        for (const auto& a : full.floor.aps) {
            // oracle: nearest in-range neighbour per sector
            for (int sec = 0; sec < kSectorCount; ++sec) {
                const AccessPoint* best = nullptr;
                for (const auto& b : full.floor.aps) {
                    if (b.id == a.id || distance(a.position, b.position) > q.neighbor_range) continue;
                    if (sector_index(a.position, b.position) != sec) continue;
                    if (!best || distance(a.position, b.position) < distance(a.position, best->position)) best = &b;
                }
                if (best) CHECK(edges.count(a.id < best->id ? ApPair{a.id, best->id} : ApPair{best->id, a.id}) == 1);
            }
        }
    }
    SUBCASE("probability zero leaves only nearest-neighbour repairs") {
        RandomScenarioParams q = p;
        q.n_aps = 25;
        q.sector_edge_prob = 0.0;
        const Scenario repaired = generate_random_scenario(q);
        std::set<ApPair> expected;
        for (const auto& a : repaired.floor.aps) {
            const AccessPoint* nn = nullptr;
            for (const auto& b : repaired.floor.aps) {
                if (b.id != a.id && (!nn || distance(a.position, b.position) < distance(a.position, nn->position))) nn = &b;
            }
            expected.insert(a.id < nn->id ? ApPair{a.id, nn->id} : ApPair{nn->id, a.id});
        }
        CHECK(std::set<ApPair>(repaired.edges.begin(), repaired.edges.end()) == expected);
    }
    RandomScenarioParams bad = p;
    bad.n_aps = 1;
    CHECK_THROWS_AS(generate_random_scenario(bad), std::invalid_argument);
    bad = p;
    bad.width = 0;
    CHECK_THROWS_AS(generate_random_scenario(bad), std::invalid_argument);
}

TEST_CASE("builtin scenarios") {
    const Scenario g = builtin_scenario("grid100", 4);
    CHECK(g.floor.aps.size() == 100);
    CHECK(trajectory_graph_connected(g));
    CHECK(g.seed == 4);
    const Scenario o = builtin_scenario("office17", 1);
    CHECK(o.floor.aps.size() == 17);
    CHECK_NOTHROW(o.floor.validate());
    CHECK_THROWS_AS(resolve_scenario("builtin:nope", 1), std::invalid_argument);
}

TEST_CASE("scenario files round-trip") {
    const Scenario o = builtin_scenario("office17", 1);
    CHECK(scenario_from_json(scenario_to_json(o)) == o);

    const auto path = std::filesystem::temp_directory_path() / "chiloc_scenario_test.json";
    save_scenario(o, path.string());
    CHECK(load_scenario(path.string()) == o);
    CHECK(resolve_scenario(path.string(), 99) == o);
    std::filesystem::remove(path);

    auto j = scenario_to_json(o);
    j["version"] = 7;
    CHECK_THROWS_WITH_AS(scenario_from_json(j), doctest::Contains("version"), std::invalid_argument);
    j = scenario_to_json(o);
    j["extra"] = 1;
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), std::invalid_argument);
}

TEST_CASE("accelerometer traces") {
    Rng rng(2);
    AccelTraceParams p;
    const auto trace = synth_accel_trace(p, rng);
    REQUIRE(trace.size() == 500);
    // 20 full periods: the sample after the last one would restart the sinusoid at phase zero
    int upward_crossings = 0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        if (trace[k - 1] < p.gravity && trace[k] >= p.gravity) ++upward_crossings;
    }
    CHECK(upward_crossings == 19);  // the crossing at k = 0 has no predecessor
    CHECK(trace.front() == doctest::Approx(p.gravity));

    for (double f : {1.2, 1.6, 2.0, 2.4}) {
        AccelTraceParams q;
        q.step_frequency = f;
        q.duration = 10.0;
        const auto t = synth_accel_trace(q, rng);
        const double resolution = q.sample_rate / static_cast<double>(t.size());
        CHECK(static_cast<double>(dominant_bin(t)) * resolution == doctest::Approx(f).epsilon(0.06));
    }
    AccelTraceParams zero;
    zero.duration = 0.0;
    CHECK(synth_accel_trace(zero, rng).empty());
    AccelTraceParams alias;
    alias.sample_rate = 3.0;
    CHECK_THROWS_AS(synth_accel_trace(alias, rng), std::invalid_argument);
}
