#include <doctest.h>

#include <cmath>
#include <sstream>

#include "chiloc/eval/eval.hpp"

using namespace chiloc;

namespace {

// Mean distance of the true AP positions to their centroid.
double spread_about_centroid(const Scenario& s) {
    Vec2 c;
    for (const auto& ap : s.floor.aps) c += ap.position - Point2{};
    c = c * (1.0 / static_cast<double>(s.floor.aps.size()));
    double sum = 0.0;
    for (const auto& ap : s.floor.aps) sum += distance(ap.position, Point2{} + c);
    return sum / static_cast<double>(s.floor.aps.size());
}

EvalOptions short_run(double horizon = 2000.0) {
    EvalOptions o;
    o.horizon = horizon;
    return o;
}

}  // namespace

TEST_CASE("approach parsing") {
    const ApproachConfig chi = ApproachConfig::parse("chi");
    CHECK(chi.kind == ApproachKind::Chi);
    CHECK(chi.label == "chi");

    const ApproachConfig fp = ApproachConfig::parse("fp:1/5,5");
    CHECK(fp.kind == ApproachKind::Fingerprinting);
    CHECK(fp.p == doctest::Approx(0.2));
    CHECK(fp.c == 5.0);
    CHECK(ApproachConfig::parse("fp:0.25,7").p == 0.25);

    const ApproachConfig crowd = ApproachConfig::parse("crowd:10");
    CHECK(crowd.kind == ApproachKind::Crowdsourcing);
    CHECK(crowd.crowds == 10);

    for (const char* bad : {"", "CHI", "fp:1/5", "fp:1,5", "fp:0.2,1", "fp:1/0,5", "fp:x,5", "crowd:0", "crowd:", "crowd:2.5",
                            "walk"}) {
        CHECK_THROWS_AS(ApproachConfig::parse(bad), std::invalid_argument);
    }
}

TEST_CASE("expense") {
    CHECK(expense(1000, {0.1, 36, 1}) == doctest::Approx(136.0));
    CHECK(default_cost(ApproachConfig::parse("fp:1/5,5")).e_d == doctest::Approx(180.0));
    CHECK(default_cost(ApproachConfig::parse("fp:1/7,7")).e_d == doctest::Approx(252.0));
    const CostParams crowd = default_cost(ApproachConfig::parse("crowd:5"));
    CHECK(expense(24000, crowd) == 0.0);
    CHECK(crowd.b == 5.0);
    const CostParams chi = default_cost(ApproachConfig::parse("chi"));
    double prev = expense(0, chi);
    for (double t = 250; t <= 24000; t += 250) {
        CHECK(expense(t, chi) >= prev);
        prev = expense(t, chi);
    }
}

TEST_CASE("random walk policy is uniform over incident edges") {
    const Adjacency g{{ApId{1}, {ApId{2}, ApId{3}, ApId{4}}}, {ApId{2}, {ApId{1}}}, {ApId{3}, {ApId{1}}}, {ApId{4}, {ApId{1}}}};
    Rng rng(99);
    std::map<ApId, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[random_walk_policy(g, ApId{1}, rng)];
    double chi2 = 0.0;
    for (auto id : {ApId{2}, ApId{3}, ApId{4}}) {
        const double expected = n / 3.0;
        chi2 += std::pow(counts[id] - expected, 2) / expected;
    }
    // 2 degrees of freedom, 0.1% critical value
    CHECK(chi2 < 13.82);

    for (int i = 0; i < 20; ++i) CHECK(random_walk_policy(g, ApId{3}, rng) == ApId{1});
    CHECK_THROWS_AS(random_walk_policy(g, ApId{9}, rng), std::invalid_argument);
}

TEST_CASE("random walk visits concentrate on high-degree APs") {
    // Hub 1 joined to 2..6, plus a chain 6-7-8.
    Adjacency g;
    auto link = [&](std::uint32_t a, std::uint32_t b) {
        g[ApId{a}].push_back(ApId{b});
        g[ApId{b}].push_back(ApId{a});
    };
    for (std::uint32_t k = 2; k <= 6; ++k) link(1, k);
    link(6, 7);
    link(7, 8);
    Rng rng(4);
    std::map<ApId, int> visits;
    ApId at{8};
    for (int i = 0; i < 20000; ++i) {
        at = random_walk_policy(g, at, rng);
        ++visits[at];
    }
    for (const auto& [id, n] : visits) {
        if (id != ApId{1}) CHECK(visits[ApId{1}] > n);
    }
}

TEST_CASE("replicas are deterministic in the seed") {
    const Scenario s = builtin_scenario("office17", 1);
    for (const char* a : {"chi", "fp:1/5,5", "crowd:3"}) {
        const ApproachConfig approach = ApproachConfig::parse(a);
        const ProcessResult r1 = run_process(s, approach, short_run(), 11);
        const ProcessResult r2 = run_process(s, approach, short_run(), 11);
        REQUIRE(r1.series.size() == r2.series.size());
        for (std::size_t i = 0; i < r1.series.size(); ++i) CHECK(r1.series[i].error == r2.series[i].error);
        CHECK(r1.observations == r2.observations);
    }
    const ProcessResult other = run_process(s, ApproachConfig::parse("chi"), short_run(), 12);
    const ProcessResult base = run_process(s, ApproachConfig::parse("chi"), short_run(), 11);
    CHECK(other.series.back().error != base.series.back().error);
}

TEST_CASE("series checkpoints") {
    const Scenario s = builtin_scenario("office17", 1);
    const ProcessResult r = run_process(s, ApproachConfig::parse("chi"), short_run(1000), 1);
    REQUIRE(r.series.size() == 5);
    for (std::size_t i = 0; i < r.series.size(); ++i) CHECK(r.series[i].t == 250.0 * static_cast<double>(i));
    CHECK(r.series.back().error < r.series.front().error);
}

TEST_CASE("horizon zero gives the all-at-origin error") {
    for (const char* name : {"office17", "grid100"}) {
        const Scenario s = builtin_scenario(name, 2);
        const ProcessResult r = run_process(s, ApproachConfig::parse("chi"), short_run(0.0), 2);
        REQUIRE(r.series.size() == 1);
        CHECK(r.series[0].t == 0.0);
        CHECK(r.series[0].error == doctest::Approx(spread_about_centroid(s)).epsilon(1e-9));
    }
}

TEST_CASE("noiseless chi recovers the constellation") {
    Scenario s = builtin_scenario("office17", 1);
    s.imu = {0.0, 0.0};
    const ProcessResult r = run_process(s, ApproachConfig::parse("chi"), short_run(1500), 3);
    CHECK(r.series.back().error < 1e-6);
}

TEST_CASE("run_process input checks") {
    const Scenario s = builtin_scenario("office17", 1);
    EvalOptions o;
    o.checkpoint = 0.0;
    CHECK_THROWS_AS(run_process(s, ApproachConfig::parse("chi"), o, 1), std::invalid_argument);
    o = short_run(-1.0);
    CHECK_THROWS_AS(run_process(s, ApproachConfig::parse("chi"), o, 1), std::invalid_argument);
    Scenario tiny = s;
    tiny.floor.aps.resize(1);
    tiny.edges.clear();
    CHECK_THROWS_AS(run_process(tiny, ApproachConfig::parse("chi"), short_run(), 1), std::invalid_argument);
}

TEST_CASE("time to reach and expense table") {
    const std::vector<SeriesPoint> curve{{0, 20}, {250, 14}, {500, 9}, {750, 6}, {1000, 6.5}};
    CHECK(time_to_reach(curve, 15) == 250.0);
    CHECK(time_to_reach(curve, 9) == 750.0);
    CHECK(time_to_reach(curve, 6) == std::nullopt);

    const std::map<std::string, std::vector<SeriesPoint>> curves{{"chi", curve}, {"crowd:5", {{0, 20}, {1000, 19}}}};
    const std::map<std::string, ApproachConfig> approaches{{"chi", ApproachConfig::parse("chi")},
                                                           {"crowd:5", ApproachConfig::parse("crowd:5")}};
    const auto rows = error_vs_expense(curves, approaches, {15, 9});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].approach == "chi");
    CHECK(rows[0].t == 250.0);
    CHECK(*rows[0].expense == doctest::Approx(61.0));
    CHECK(*rows[1].expense == doctest::Approx(111.0));
    CHECK_FALSE(rows[2].t);
    CHECK_FALSE(rows[2].expense);

    CHECK_THROWS_AS(error_vs_expense(curves, approaches, {9, 15}), std::invalid_argument);
    CHECK_THROWS_AS(error_vs_expense(curves, approaches, {9, 9}), std::invalid_argument);

    std::ostringstream csv;
    write_expense_csv(csv, rows);
    CHECK(csv.str().rfind("approach,target,reached,t,expense\nchi,15,true,250,61\n", 0) == 0);
    CHECK(csv.str().find("crowd:5,15,false,,\n") != std::string::npos);
}

TEST_CASE("evaluation report") {
    const std::vector<ApproachConfig> approaches{ApproachConfig::parse("chi"), ApproachConfig::parse("crowd:2")};
    const EvalReport report = run_evaluation("builtin:office17", approaches, {1, 2, 3}, short_run(1000), 2);
    CHECK(report.curves.at("chi").size() == 3);

    const Scenario s = builtin_scenario("office17", 2);
    const ProcessResult direct = run_process(s, approaches[0], short_run(1000), 2);
    CHECK(report.curves.at("chi")[1].back().error == direct.series.back().error);

    const auto mean = report.mean_curve("chi");
    double expected = 0.0;
    for (const auto& run : report.curves.at("chi")) expected += run[2].error / 3.0;
    CHECK(mean[2].error == doctest::Approx(expected));
    CHECK(report.mean_at("chi", 480) == doctest::Approx(expected));

    const EvalReport serial = run_evaluation("builtin:office17", approaches, {1, 2, 3}, short_run(1000), 1);
    CHECK(serial.curves == report.curves);

    std::ostringstream csv;
    write_curves_csv(csv, report);
    CHECK(csv.str().rfind("seed,approach,t,avg_error\n", 0) == 0);
    const std::string svg = curves_svg(report);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("crowd:2") != std::string::npos);
}
