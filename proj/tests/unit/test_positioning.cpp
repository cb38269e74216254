#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "chiloc/positioning/positioning.hpp"
#include "chiloc/sim/scenario.hpp"

using namespace chiloc;

namespace {

PositionMap rigid(const PositionMap& m, double deg, Vec2 t, bool mirror = false) {
    const double r = deg_to_rad(deg);
    PositionMap out;
    for (const auto& [id, p] : m) {
        const double y = mirror ? -p.y : p.y;
        out[id] = {std::cos(r) * p.x - std::sin(r) * y + t.x, std::sin(r) * p.x + std::cos(r) * y + t.y};
    }
    return out;
}

std::vector<DisplacementEdge> exact_edges(const Scenario& s) {
    const auto pos = s.ap_positions();
    std::vector<DisplacementEdge> out;
    for (const auto& [a, b] : s.edges) out.push_back({a, b, pos.at(b) - pos.at(a), 1});
    return out;
}

FusionPool pool_of(ApId a, ApId b, int sig, Vec2 offset, double length) {
    FusionPool p(PoolKey{a, b, sig});
    p.add({offset, length, 0, 1});
    return p;
}

}  // namespace

TEST_CASE("edge selection prefers the shortest trajectories") {
    PoolMap pools;
    pools.emplace(PoolKey{ApId{1}, ApId{2}, 0}, pool_of(ApId{1}, ApId{2}, 0, {10, 0}, 12));
    pools.emplace(PoolKey{ApId{1}, ApId{2}, 3}, pool_of(ApId{1}, ApId{2}, 3, {9, 1}, 9));
    pools.emplace(PoolKey{ApId{2}, ApId{3}, 5}, pool_of(ApId{2}, ApId{3}, 5, {0, 4}, 4));
    pools.emplace(PoolKey{ApId{3}, ApId{4}, 6}, pool_of(ApId{3}, ApId{4}, 6, {1, 0}, 5));
    pools.emplace(PoolKey{ApId{3}, ApId{4}, 2}, pool_of(ApId{3}, ApId{4}, 2, {2, 0}, 5));
    const auto edges = select_positioning_edges(pools);
    REQUIRE(edges.size() == 3);
    CHECK(edges[0].displacement == Vec2{9, 1});
    CHECK(edges[1].displacement == Vec2{0, 4});
    CHECK(edges[2].displacement == Vec2{2, 0});  // tie goes to the lower signature
}

TEST_CASE("relaxation positioning") {
    SUBCASE("triangle") {
        const PositionMap truth{{ApId{1}, {0, 0}}, {ApId{2}, {10, 0}}, {ApId{3}, {0, 10}}};
        const std::vector<DisplacementEdge> e{{ApId{1}, ApId{2}, {10, 0}}, {ApId{2}, ApId{3}, {-10, 10}}, {ApId{1}, ApId{3}, {0, 10}}};
        const auto c = position_aps(e);
        CHECK(align_to_truth(c.positions, truth).average_error < 1e-6);
        CHECK_FALSE(c.disconnected());
    }
    SUBCASE("single edge") {
        const std::vector<DisplacementEdge> e{{ApId{4}, ApId{7}, {5, 0}}};
        const auto c = position_aps(e);
        const Vec2 d = c.positions.at(ApId{7}) - c.positions.at(ApId{4});
        CHECK(d.x == doctest::Approx(5.0));
        CHECK(d.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(c.positions.at(ApId{4}) == Point2{});
    }
    SUBCASE("noiseless 100-AP scenario") {
        const Scenario s = builtin_scenario("grid100", 2);
        PositioningOptions o;
        o.max_iterations = 20000;
        o.tolerance = 1e-12;
        const auto c = position_aps(exact_edges(s), o);
        CHECK(align_to_truth(c.positions, s.ap_positions()).average_error < 1e-3);
    }
    SUBCASE("edge order does not matter") {
        const Scenario s = builtin_scenario("grid100", 3);
        auto e = exact_edges(s);
        std::mt19937_64 rng(1);
        for (auto& x : e) x.displacement += Vec2{std::normal_distribution<double>(0, 1)(rng), 0.3};
        const auto a = position_aps(e);
        std::shuffle(e.begin(), e.end(), rng);
        for (auto& x : e) {
            if (rng() % 2) {
                std::swap(x.ap_a, x.ap_b);
                x.displacement = -x.displacement;
            }
        }
        const auto b = position_aps(e);
        CHECK(align_to_truth(a.positions, s.ap_positions()).average_error ==
              doctest::Approx(align_to_truth(b.positions, s.ap_positions()).average_error).epsilon(1e-9));
    }
    SUBCASE("each sweep lowers the residual energy") {
        const Scenario s = builtin_scenario("grid100", 5);
        auto e = exact_edges(s);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> g(0, 2);
        for (auto& x : e) x.displacement += Vec2{g(rng), g(rng)};
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= 60; ++k) {
            PositioningOptions o;
            o.max_iterations = k;
            o.tolerance = 0.0;
            const double energy = edge_residual_energy(e, position_aps(e, o).positions);
            CHECK(energy <= prev * (1 + 1e-12));
            prev = energy;
        }
    }
    SUBCASE("disconnected graphs are flagged") {
        const std::vector<DisplacementEdge> e{{ApId{1}, ApId{2}, {1, 0}}, {ApId{5}, ApId{6}, {0, 1}}};
        const std::vector<ApId> extra{ApId{9}};
        const auto c = position_aps(e, {}, extra);
        CHECK(c.disconnected());
        CHECK(c.components.size() == 3);
        CHECK(c.positions.at(ApId{5}) == Point2{});
        CHECK(c.positions.at(ApId{9}) == Point2{});
    }
    CHECK_THROWS_AS(position_aps({}), std::invalid_argument);
    const std::vector<DisplacementEdge> loop{{ApId{1}, ApId{1}, {1, 0}}};
    CHECK_THROWS_AS(position_aps(loop), std::invalid_argument);
    PositioningOptions bad;
    bad.relaxation = 2.0;
    const std::vector<DisplacementEdge> ok{{ApId{1}, ApId{2}, {1, 0}}};
    CHECK_THROWS_AS(position_aps(ok, bad), std::invalid_argument);
}

TEST_CASE("rigid alignment") {
    const Scenario s = builtin_scenario("grid100", 1);
    const PositionMap truth = s.ap_positions();
    CHECK(align_to_truth(rigid(truth, 90, {5, 5}), truth).average_error < 1e-9);
    const auto ident = align_to_truth(truth, truth);
    CHECK(ident.average_error < 1e-12);
    CHECK_FALSE(ident.alignment.reflected);
    CHECK(std::fabs(ident.alignment.translation.x) < 1e-9);

    const auto mirrored = align_to_truth(rigid(truth, 30, {1, 2}, true), truth);
    CHECK(mirrored.alignment.reflected);
    CHECK(mirrored.average_error < 1e-9);

    // Three collinear APs, the middle one displaced by 3 perpendicular: the best fit is
    // a translation by 1 toward it, leaving errors 1, 2, 1.
    const PositionMap line{{ApId{1}, {0, 0}}, {ApId{2}, {10, 0}}, {ApId{3}, {20, 0}}};
    PositionMap bumped = line;
    bumped[ApId{2}].y = 3;
    CHECK(align_to_truth(bumped, line).average_error == doctest::Approx(4.0 / 3.0));

    // with many APs a single displaced AP costs close to 3/n
    PositionMap moved = truth;
    moved.begin()->second.x += 3.0;
    CHECK(align_to_truth(moved, truth).average_error == doctest::Approx(3.0 / 100.0).epsilon(0.05));

    std::mt19937_64 rng(3);
    PositionMap noisy = truth;
    for (auto& [id, p] : noisy) p += Vec2{std::normal_distribution<double>(0, 1)(rng), std::normal_distribution<double>(0, 1)(rng)};
    const double base = align_to_truth(noisy, truth).average_error;
    CHECK(align_to_truth(rigid(noisy, 123, {-40, 7}), truth).average_error == doctest::Approx(base).epsilon(1e-9));

    const PositionMap one{{ApId{1}, {0, 0}}};
    CHECK_THROWS_AS(align_to_truth(one, one), std::invalid_argument);
    PositionMap other = truth;
    other.erase(other.begin());
    other[ApId{999}] = {};
    CHECK_THROWS_AS(align_to_truth(other, truth), std::invalid_argument);
}

TEST_CASE("constellation export") {
    const PositionMap m{{ApId{1}, {0.1, -2.5}}, {ApId{300}, {1e-7, 99.125}}};
    std::stringstream ss;
    write_constellation_csv(ss, m);
    CHECK(read_constellation_csv(ss) == m);
    std::stringstream bad("id,x\n");
    CHECK_THROWS_AS(read_constellation_csv(bad), std::invalid_argument);

    const std::vector<DisplacementEdge> e{{ApId{1}, ApId{300}, {-0.1, 101.625}}};
    const auto c = position_aps(e);
    const auto j = alignment_to_json(align_to_truth(c.positions, m), c);
    CHECK(j.at("average_error").get<double>() < 1e-9);
    CHECK(j.at("components").get<int>() == 1);
}
