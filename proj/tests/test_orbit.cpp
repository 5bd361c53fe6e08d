#include "nilreg/orbit.hpp"
#include <stdexcept>

#include <doctest.h>

using namespace nilreg;

TEST_CASE("closed form values") {
    CHECK(closed_form_d3(0) == 1);
    CHECK(closed_form_d3(1) == 3);
    CHECK(closed_form_d3(6) == 48);
}

TEST_CASE("d=3 census equals the closed form up to radius 40") {
    auto c = ball_census(3, 40);
    REQUIRE(c.last_completed == 40);
    for (int n = 0; n <= 40; ++n) CHECK(c.counts[size_t(n)] == closed_form_d3(n));
}

TEST_CASE("d=2 balls grow linearly") {
    auto c = ball_census(2, 25);
    for (int n = 0; n <= 25; ++n) CHECK(c.counts[size_t(n)] == uint64_t(n + 1));
    CHECK(growth_exponent_estimate(c, 10, 25) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("spheres stay positive") {
    for (int d : {3, 4}) {
        auto c = ball_census(d, 10);
        for (int n = 1; n <= c.last_completed; ++n) CHECK(c.sphere(n) > 0);
    }
}

TEST_CASE("frozen oracle values for the d=4 census") {
    auto c = ball_census(4, 12);
    CHECK(c.counts[6] == 183);
    CHECK(c.counts[12] == 5790);
    CHECK(growth_exponent_estimate(c, 6, 12) == doctest::Approx(5.0036).epsilon(1e-3));
}

TEST_CASE("d=3 slope window") {
    auto c = ball_census(3, 40);
    const double slope = growth_exponent_estimate(c, 20, 40);
    CHECK(slope > 3.0 - 0.15);
    CHECK(slope < 3.0 + 0.15);
}

TEST_CASE("memory cap yields a partial census") {
    CensusOptions opts;
    opts.max_points = 10;
    auto c = ball_census(3, 40, opts);
    CHECK(c.truncated);
    CHECK(c.last_completed < 40);
    CHECK(c.counts.size() == size_t(c.last_completed) + 1);
}

TEST_CASE("symmetrized census dominates the positive one") {
    CensusOptions sym;
    sym.symmetrized = true;
    auto a = ball_census(3, 8);
    auto b = ball_census(3, 8, sym);
    for (int n = 1; n <= 8; ++n) CHECK(b.counts[size_t(n)] > a.counts[size_t(n)]);
}

TEST_CASE("bad windows are rejected") {
    auto c = ball_census(3, 10);
    CHECK_THROWS_AS(growth_exponent_estimate(c, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(growth_exponent_estimate(c, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(growth_exponent_estimate(c, 5, 11), std::invalid_argument);
}
