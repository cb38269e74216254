#include <doctest.h>

#include <algorithm>
#include <random>

#include "chiloc/core/geometry.hpp"
#include "chiloc/core/sectors.hpp"

using namespace chiloc;

namespace {

bool near(Vec2 a, Vec2 b, double eps = 1e-9) { return std::fabs(a.x - b.x) <= eps && std::fabs(a.y - b.y) <= eps; }

}  // namespace

TEST_CASE("sum of displacements") {
    CHECK(sum_displacements({}) == Vec2{});

    const std::vector<DisplacementVector> two{{0.0, 3.0}, {90.0, 4.0}};
    CHECK(near(sum_displacements(two), {3.0, 4.0}));

    // walk a noiseless polyline, then compare the summed steps with end minus start
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    std::vector<Point2> pts(7);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    std::vector<DisplacementVector> steps;
    for (std::size_t i = 1; i < pts.size(); ++i) steps.push_back(DisplacementVector::from_offset(pts[i] - pts[i - 1]));
    CHECK(near(sum_displacements(steps), pts.back() - pts.front()));

    SUBCASE("permutation invariant and additive") {
        auto shuffled = steps;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(near(sum_displacements(shuffled), sum_displacements(steps)));
        std::vector<DisplacementVector> head(steps.begin(), steps.begin() + 3), tail(steps.begin() + 3, steps.end());
        CHECK(near(sum_displacements(head) + sum_displacements(tail), sum_displacements(steps)));
    }
}

TEST_CASE("heading difference") {
    CHECK(heading_diff(350, 10) == doctest::Approx(20));
    CHECK(heading_diff(90, 90) == 0);
    CHECK(heading_diff(0, 180) == doctest::Approx(180));
    CHECK(heading_diff(-720.0, 45.0) == doctest::Approx(45));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> any(-1000.0, 1000.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = any(rng), b = any(rng);
        CHECK(heading_diff(a, b) == heading_diff(b, a));
        CHECK(heading_diff(a, b) <= 180.0);
        CHECK(heading_diff(a, b) >= 0.0);
        const double n = normalize_heading(a);
        CHECK(normalize_heading(n) == n);
        CHECK(n >= 0.0);
        CHECK(n < 360.0);
    }
    CHECK(normalize_heading(-1e-20) == 0.0);
}

TEST_CASE("polyline length") {
    const std::vector<Point2> one{{0, 0}};
    CHECK(polyline_length(one) == 0.0);
    const std::vector<Point2> hyp{{0, 0}, {3, 4}};
    CHECK(polyline_length(hyp) == 5.0);
    const double r = 10.0;
    std::vector<Point2> serp;
    for (int row = 0; row < 3; ++row) {
        for (int k = 0; k < 3; ++k) serp.push_back({r * (row % 2 == 0 ? k : 2 - k), r * row});
    }
    CHECK(polyline_length(serp) == doctest::Approx(8 * r));
}

TEST_CASE("displacement vectors") {
    const DisplacementVector v(-90.0, 2.0);
    CHECK(v.heading() == 270.0);
    CHECK(near(v.offset(), {0.0, -2.0}));
    CHECK_THROWS_AS(DisplacementVector(0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(DisplacementVector(std::nan(""), 1.0), std::invalid_argument);
    CHECK(DisplacementVector::from_offset({0, 0}).heading() == 0.0);

    const DisplacementVector back = DisplacementVector::from_offset({-3.0, 1.5});
    CHECK(near(back.offset(), {-3.0, 1.5}));
}

TEST_CASE("AP identifiers") {
    const ApId id{0x0a0b0c0d};
    CHECK(id.to_mac() == "02:00:0a:0b:0c:0d");
    CHECK(ApId::parse(id.to_mac()) == id);
    CHECK(ApId::parse("42") == ApId{42});
    CHECK_THROWS_AS(ApId::parse("zz"), std::invalid_argument);
    CHECK_THROWS_AS(ApId::parse("02:00:0a:0b:0c"), std::invalid_argument);
}

TEST_CASE("sector convention") {
    CHECK(sector_of_bearing(0.0) == 0);
    CHECK(sector_of_bearing(30.0) == 1);
    CHECK(sector_of_bearing(337.5) == 7);
    CHECK(sector_of_bearing(22.5) == 0);
    CHECK(sector_of_bearing(22.5000001) == 1);
    CHECK(sector_index({0, 0}, {-1, 0}) == 4);
    CHECK(sector_index({0, 0}, {0, -1}) == 6);
    CHECK_THROWS_AS(sector_index({1, 1}, {1, 1}), std::invalid_argument);

    // every bearing lands in exactly the sector whose centre is closest (ties on the upper edge)
    for (int tenth = 0; tenth < 3600; ++tenth) {
        const double b = tenth / 10.0;
        const int s = sector_of_bearing(b);
        REQUIRE(s >= 0);
        REQUIRE(s < kSectorCount);
        CHECK(heading_diff(b, sector_center(s)) <= 22.5);
    }
}

TEST_CASE("polygons and segments") {
    const Polygon sq = rect_polygon({{0, 0}, {2, 2}});
    CHECK(sq.area() == 4.0);
    CHECK(sq.contains({1, 1}));
    CHECK(sq.contains({2, 1}));
    CHECK_FALSE(sq.contains({2.1, 1}));

    CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    CHECK(segment_hits_polygon({-1, 1}, {3, 1}, sq));
    CHECK_FALSE(segment_hits_polygon({-1, 3}, {3, 3}, sq));

    const auto hit = first_boundary_hit({-2, 1}, {2, 1}, sq);
    REQUIRE(hit);
    CHECK(*hit == doctest::Approx(0.5));

    CHECK(point_segment_distance({1, 1}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
    CHECK(point_segment_distance({3, 0}, {0, 0}, {2, 0}) == doctest::Approx(1.0));
}

TEST_CASE("convex hull and Hausdorff distance") {
    std::vector<Point2> pts{{0, 0}, {4, 0}, {4, 3}, {0, 3}, {2, 1}, {1, 2}, {2, 0}};
    const Polygon hull = convex_hull(pts);
    CHECK(hull.vertices.size() == 4);
    CHECK(hull.area() == doctest::Approx(12.0));

    const std::vector<Point2> line{{0, 0}, {10, 0}};
    const std::vector<Point2> above{{0, 1}, {5, 2}, {10, 1}};
    CHECK(directed_hausdorff(above, line) == doctest::Approx(2.0));
    CHECK(directed_hausdorff(line, above) == doctest::Approx(1.0));
}
