#include "nilreg/interval.hpp"

#include "nilreg/numeric.hpp"

#include <doctest.h>

#include <cmath>

using namespace nilreg;

TEST_CASE("concrete Theorem-B exponents") {
    const auto s = choose_exponents_b(3, 0.2);
    REQUIRE(s.p.size() == 3);
    CHECK(s.p[0] == doctest::Approx(25.0));
    CHECK(s.p[1] == doctest::Approx(12.5));
    CHECK(s.p[2] == doctest::Approx(1.25));
    CHECK(validate_b(s).empty());
    double inv = 0.0;
    for (double p : s.p) inv += 1.0 / p;
    CHECK(inv == doctest::Approx(0.92));
}

TEST_CASE("validators report violated conditions") {
    LengthSchemeB bad;
    bad.d = 3;
    bad.alpha = 0.2;
    bad.p = {2.0, 3.0, 1.25}; // not decreasing
    auto v = validate_b(bad);
    CHECK(std::find(v.begin(), v.end(), "i_B") != v.end());

    // at the critical exponent the concrete formula violates ii_B
    LengthSchemeB crit;
    crit.d = 3;
    crit.alpha = 1.0 / 3.0;
    crit.p = {5.0 / (1.0 * crit.alpha), 5.0 / (2.0 * crit.alpha), 1.25};
    v = validate_b(crit);
    CHECK(!v.empty());
    CHECK(std::find(v.begin(), v.end(), "ii_B") != v.end());
}

TEST_CASE("infeasible alpha raises") {
    CHECK_THROWS_AS(choose_exponents_b(3, 1.0 / 3.0), InfeasibleExponent);
    CHECK_THROWS_AS(choose_exponents_b(3, 0.5), InfeasibleExponent);
    CHECK_NOTHROW(choose_exponents_b(4, 0.1));
    CHECK_THROWS_AS(choose_exponents_b(4, 2.0 / 12.0), InfeasibleExponent);
}

TEST_CASE("feasible region sampling for d in 3..8") {
    SplitMix64 rng(3);
    for (int d = 3; d <= 8; ++d) {
        const double crit = 2.0 / (double(d) * double(d - 1));
        for (int t = 0; t < 20; ++t) {
            const double alpha = crit * (0.05 + 0.9 * rng.uniform());
            CHECK(validate_b(choose_exponents_b(d, alpha)).empty());
        }
    }
}

TEST_CASE("no random candidate passes at or above the critical exponent") {
    SplitMix64 rng(9);
    const int d = 3;
    const double alpha = 2.0 / (double(d) * double(d - 1)); // critical
    int passes = 0;
    for (int t = 0; t < 10000; ++t) {
        LengthSchemeB s;
        s.d = d;
        s.alpha = alpha;
        s.p.resize(size_t(d));
        s.p[size_t(d - 1)] = 1.0 + rng.uniform(); // p_d in (1, 2)
        for (int j = d - 2; j >= 0; --j)
            s.p[size_t(j)] = s.p[size_t(j + 1)] + 30.0 * rng.uniform();
        if (validate_b(s).empty()) ++passes;
    }
    CHECK(passes == 0);
}

TEST_CASE("analytic witness of infeasibility") {
    // chaining iii_B and iv_B forces sum 1/p_j >= 1 when alpha >= critical
    SplitMix64 rng(13);
    for (int d : {3, 4, 5}) {
        const double alpha = 2.0 / (double(d) * double(d - 1));
        for (int t = 0; t < 100; ++t) {
            const double pd = 1.0 + rng.uniform();
            // lower bounds implied by iii_B, iv_B
            double sum = 1.0 / pd;
            for (int j = 1; j < d; ++j) sum += double(j) * alpha * (pd - 1.0) / pd;
            CHECK(sum >= 1.0 - 1e-12);
        }
    }
}

TEST_CASE("length formulas") {
    const auto s = choose_exponents_b(3, 0.2);
    CHECK(length_b(s, {0, 0, 0}) == doctest::Approx(1.0));
    CHECK(length_b(s, {0, 0, 1}) == doctest::Approx(0.5));
    CHECK(length_b(s, {0, 0, -1}) == doctest::Approx(0.5));
    // monotone in each coordinate
    CHECK(length_b(s, {1, 2, 3}) > length_b(s, {2, 2, 3}));
    CHECK(length_b(s, {1, 2, 3}) > length_b(s, {1, 3, 3}));
    CHECK(length_b(s, {1, 2, 3}) > length_b(s, {1, 2, 4}));

    LengthSchemeC c;
    c.d = 2;
    c.alpha = 0.5;
    c.q = 1.1;
    c.p = (2 * c.q - 1) / (c.q - 1);
    CHECK(length_c(c, 0, 0) == doctest::Approx(1.0));
    CHECK(length_c(c, 1, 0) == doctest::Approx(0.5));
    CHECK(length_c(c, 0, 2) == doctest::Approx(1.0 / (std::pow(2.0, 1.1) + 1.0)));
}

TEST_CASE("choose_exponents_c finds feasible q near 1") {
    const auto s = choose_exponents_c(2, 0.5);
    CHECK(validate_c(s).empty());
    CHECK(s.q > 1.0);
    CHECK(s.q < 2.0);
    CHECK(s.p == doctest::Approx((2 * s.q - 1) / (s.q - 1)));

    const auto tight = choose_exponents_c(3, 0.99);
    CHECK(validate_c(tight).empty());
    CHECK(tight.q < s.q); // conditions tighten as alpha approaches 1

    CHECK_THROWS_AS(choose_exponents_c(2, 1.0), InfeasibleExponent);
    CHECK_THROWS_AS(choose_exponents_c(2, -0.1), InfeasibleExponent);
}

TEST_CASE("families: positions abut and normalize") {
    const auto s = choose_exponents_b(3, 0.2);
    auto f = build_family_b(s, 3, true);
    CHECK(f.count() == 7 * 7 * 7);
    CHECK(f.left(0) == 0.0);
    for (int64_t i = 1; i < f.count(); ++i)
        CHECK(f.left(i) == doctest::Approx(f.right(i - 1)).epsilon(1e-14));
    CHECK(f.right(f.count() - 1) == doctest::Approx(1.0).epsilon(1e-12));

    // single interval box
    auto single = build_family([](const std::vector<int64_t>&) { return 0.25; }, {0}, true);
    CHECK(single.count() == 1);
    CHECK(single.length(0) == doctest::Approx(1.0));
    CHECK(single.left(0) == 0.0);
}

TEST_CASE("truncated totals are monotone and converging") {
    const auto s = choose_exponents_b(3, 0.2);
    const double t20 = build_family_b(s, 20, false).total;
    const double t40 = build_family_b(s, 40, false).total;
    CHECK(t20 < t40);
    CHECK(std::isfinite(t40));
    // successive doubling increments shrink like 2^{1-p_d} = 2^{-1/4} per
    // doubling (the p_d tail dominates), so the totals converge but slowly
    const double t32 = build_family_b(s, 32, false).total;
    const double t64 = build_family_b(s, 64, false).total;
    const double t128 = build_family_b(s, 128, false).total;
    const double d1 = (t64 - t32) / t64;
    const double d2 = (t128 - t64) / t128;
    CHECK(d2 < d1);
    CHECK(d2 / d1 == doctest::Approx(std::pow(2.0, -0.25)).epsilon(0.12));
}

TEST_CASE("locate and predecessor lengths") {
    const auto s = choose_exponents_b(3, 0.2);
    auto f = build_family_b(s, 2, false);
    for (int64_t flat : {int64_t(0), f.count() / 2, f.count() - 1}) {
        const double mid = f.left(flat) + 0.5 * f.length(flat);
        CHECK(f.locate(mid) == flat);
    }
    // predecessor inside the box equals the stored neighbor length
    auto idx = f.unflatten(10);
    if (idx.back() > -2) {
        auto prev = idx;
        prev.back() -= 1;
        CHECK(f.predecessor_length(idx) == f.length(f.flatten(prev)));
    }
    // at the box edge the formula length is used
    std::vector<int64_t> edge{0, 0, -2};
    auto prev_edge = edge;
    prev_edge.back() -= 1;
    CHECK(f.predecessor_length(edge) == doctest::Approx(length_b(s, prev_edge)));
}

TEST_CASE("columnar serialization shape") {
    const auto s = choose_exponents_b(3, 0.2);
    auto f = build_family_b(s, 1, true);
    const auto text = to_columnar_text(f);
    CHECK(std::count(text.begin(), text.end(), '\n') == f.count());
    CHECK(text.find("0,0,0 ") != std::string::npos);
}

TEST_CASE("empty or invalid boxes are rejected") {
    CHECK_THROWS_AS(build_family([](const std::vector<int64_t>&) { return 1.0; }, {}, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_family([](const std::vector<int64_t>&) { return 1.0; }, {-1}, false),
                    std::invalid_argument);
}
