#include "nilreg/distortion.hpp"
#include <stdexcept>

#include <doctest.h>

#include <cmath>
#include <set>

using namespace nilreg;

TEST_CASE("d3 convergence conditions") {
    CHECK(check_conditions_d3(0.45, 0.10));
    CHECK_FALSE(check_conditions_d3(1.0 / 3.0, 0.10)); // critical alpha
    CHECK_FALSE(check_conditions_d3(0.45, 0.70));      // eps too large
    CHECK_FALSE(check_conditions_d3(0.25, 0.10));
    // exponent arithmetic: alpha=0.4, eps=0.1 gives beta = 0.14
    D3Constants c;
    c.alpha = 0.4;
    c.eps = 0.1;
    CHECK(c.beta() == doctest::Approx(0.14));
}

TEST_CASE("holder density bound is Chebyshev at A = 2") {
    const auto b = holder_density_bound(10.0, 1.0, 4.0, 0.1, 2.0, 0.45);
    CHECK(b.guaranteed_density == doctest::Approx(0.5));
    CHECK(b.threshold_quadratic > 0.0);
    CHECK(b.threshold_supquadratic > 0.0);
    CHECK(b.threshold_quadratic > b.threshold_supquadratic); // smaller denominator exponent
    CHECK_THROWS_AS(holder_density_bound(10, 1, 4, 0.1, 0.5, 0.45), std::invalid_argument);
}

TEST_CASE("P(n) point cap: 7n(ymax+1) <= 10 n^{3+eps}") {
    for (int k = 1; k <= 4; ++k) {
        const double n = std::pow(4.0, k);
        const double ymax = std::floor(std::pow(n, 2.1));
        CHECK(7.0 * n * (ymax + 1.0) <= 10.0 * std::pow(n, 3.1));
    }
    // worked instance: n=4, eps=0.1 gives 532 points
    CHECK(7.0 * 4.0 * (std::floor(std::pow(4.0, 2.1)) + 1.0) == 532.0);
}

TEST_CASE("direct Chebyshev check on a synthetic grid") {
    // 100 parts, random positive weights summing below 1
    SplitMix64 rng(77);
    WeightedGrid g;
    g.parts = 100;
    for (int i = 0; i < 5000; ++i) {
        g.weights.push_back(rng.uniform() * 1.8e-4);
        g.part.push_back(int(rng.below(100)));
    }
    const double alpha = 0.45;
    // total of w^alpha spread over parts; Chebyshev with A=4 guarantees 3/4
    double total = 0.0;
    for (double w : g.weights) total += std::pow(w, alpha);
    const double threshold = 4.0 * total / double(g.parts);
    CHECK(part_density_below(g, alpha, threshold) >= 0.75);

    // the lemma's own displays: with |P| <= C1 n^{3+eps} points of weight
    // total <= 1 split into n' parts, at least 1 - 1/A of the parts fall
    // under the Hoelder/Chebyshev threshold
    const double n = 4.0, eps = 0.1;
    const double C1 = 5000.0 / std::pow(n, 3.0 + eps); // exactly our point count
    double wsum = 0.0;
    for (double w : g.weights) wsum += w;
    REQUIRE(wsum <= 1.0);
    const double C2 = n * n / double(g.parts); // n' = n^2 / C2 exactly
    const auto b = holder_density_bound(C1, C2, n, eps, 4.0, alpha);
    CHECK(part_density_below(g, alpha, b.threshold_quadratic) >= b.guaranteed_density);
    const double C2s = std::pow(n, 2.0 + eps) / double(g.parts);
    const auto bs = holder_density_bound(C1, C2s, n, eps, 4.0, alpha);
    CHECK(part_density_below(g, alpha, bs.threshold_supquadratic) >= bs.guaranteed_density);
}

TEST_CASE("grid shapes at level one") {
    const auto grids = build_grids_d3(2, 0.1);
    REQUIRE(grids.size() == 2);
    const auto& g1 = grids[0];
    CHECK(g1.n == 4);
    CHECK(g1.ymax == 18); // floor(4^{2.1})
    CHECK(g1.p_path_count() == 19);
    CHECK(g1.q_path_count() == 16);
    CHECK(g1.columns.size() == 4);
    // column x = n is the degenerate residue decomposition
    CHECK(g1.column(4).degenerate());
    CHECK_FALSE(g1.column(5).degenerate());
    // Q column jump pattern for (n, m) = (4, 5): jumps of 5 or 1 only
    const auto pts = path_points_in(g1.column(5), 1, 0, 30);
    for (size_t t = 1; t < pts.size(); ++t) {
        const int64_t j = pts[t] - pts[t - 1];
        CHECK((j == 1 || j == 5));
    }
}

TEST_CASE("projected weights: normalized total at most one") {
    const ProjectedWeights w(choose_exponents_b(3, 0.2));
    CHECK(w.norm() > 0.0);
    // direct truncated total of normalized weights stays below 1
    double total = 0.0;
    for (int64_t i = -60; i <= 60; ++i)
        for (int64_t j = -60; j <= 60; ++j) total += w(i, j);
    CHECK(total < 1.0);
    CHECK(total > 0.9); // the box captures nearly everything
    // monotone decay away from the origin
    CHECK(w(0, 0) > w(1, 0));
    CHECK(w(1, 0) > w(2, 0));
    CHECK(w(0, 1) > w(0, 2));
}

TEST_CASE("constants: finite C and growing A") {
    const auto grids = build_grids_d3(2, 0.1);
    const ProjectedWeights w(choose_exponents_b(3, 0.2));
    const auto cons = compute_constants_d3(grids, w, 0.45, 3);
    CHECK(cons.C > 0.0);
    CHECK(std::isfinite(cons.C));
    CHECK(cons.B >= 1.0);
    REQUIRE(cons.A.size() == 2);
    CHECK(cons.A[0] >= 4.0 * std::pow(2.0, cons.beta()) * cons.B * cons.C);
    CHECK(cons.A[1] == doctest::Approx(cons.B * cons.C * std::pow(2.0, 2 * cons.beta())));
    // boundary counts ordered, ratios sane
    REQUIRE(cons.r.size() == 2); // k = 2, 3
    for (size_t i = 0; i < cons.r.size(); ++i) {
        CHECK(cons.r[i] >= 1);
        CHECK(cons.r[i] <= cons.s[i]);
        CHECK(cons.rp[i] >= 1);
        CHECK(cons.rp[i] <= cons.sp[i]);
    }
    // frozen exact counts (weight-independent): the +-2n path deviation
    // dominates the per-path means at these levels, so the ratios sit well
    // above 1 here and shrink only slowly with k
    CHECK(cons.r == std::vector<int64_t>{11, 49});
    CHECK(cons.s == std::vector<int64_t>{26, 128});
    CHECK(cons.rp == std::vector<int64_t>{1, 3});
    CHECK(cons.sp == std::vector<int64_t>{4, 65});
}

TEST_CASE("infeasible alpha is rejected") {
    const auto grids = build_grids_d3(1, 0.1);
    const ProjectedWeights w(choose_exponents_b(3, 0.2));
    CHECK_THROWS_AS(compute_constants_d3(grids, w, 1.0 / 3.0, 2), InfeasibleAlpha);
    CHECK_THROWS_AS(compute_constants_d3(grids, w, 0.2, 2), InfeasibleAlpha);
}

TEST_CASE("two-level selection succeeds and verifies") {
    SelectionParams prm;
    prm.levels = 2;
    prm.alpha = 0.45;
    prm.eps = 0.10;
    const auto res = select_paths_d3(prm);
    REQUIRE(res.ok());
    const auto& st = *res.state;
    REQUIRE(st.chosen.size() == 2);
    for (const auto& lc : st.chosen) {
        CHECK(lc.q_sum <= lc.q_threshold);
        CHECK(lc.p_sum <= lc.p_threshold);
        CHECK(lc.ledger_lower_bound >= 0.5);
    }
    // consecutive chosen paths share the chaining row
    CHECK(st.chosen[1].entry_height == st.chosen[0].exit_row);
    // no loops: all trajectory points distinct
    std::set<std::array<int64_t, 2>> distinct(st.trajectory.begin(), st.trajectory.end());
    CHECK(distinct.size() == st.trajectory.size());
    // partial sums are monotone
    for (size_t t = 1; t < st.lalpha_partial.size(); ++t)
        CHECK(st.lalpha_partial[t] >= st.lalpha_partial[t - 1]);
    CHECK(st.lalpha_total <= st.lalpha_closed_form);

    const auto rep = verify_certificate(st);
    CHECK(rep.ok);
}

TEST_CASE("admissible fractions meet the density guarantee") {
    SelectionParams prm;
    prm.levels = 2;
    const auto res = select_paths_d3(prm);
    REQUIRE(res.ok());
    const auto grids = build_grids_d3(prm.levels, prm.eps);
    const ProjectedWeights w(choose_exponents_b(3, prm.alpha_b));
    const auto& cons = res.state->constants;
    for (int k = 1; k <= prm.levels; ++k) {
        const auto& g = grids[size_t(k - 1)];
        int64_t good_rows = 0;
        for (int64_t y = 0; y <= g.ymax; ++y)
            good_rows += p_row_sum(g, w, prm.alpha, y) <= cons.thr_first(k) ? 1 : 0;
        CHECK(double(good_rows) / double(g.ymax + 1) >= 1.0 - 1.0 / cons.A[size_t(k - 1)]);
        int64_t good_paths = 0;
        for (int64_t x = g.n; x <= 2 * g.n - 1; ++x)
            for (int64_t id = 1; id <= g.n; ++id)
                good_paths += q_path_sum(g, w, prm.alpha, x, id) <= cons.thr_second(k) ? 1 : 0;
        CHECK(double(good_paths) / double(g.n * g.n) >= 1.0 - 1.0 / cons.A[size_t(k - 1)]);
    }
}

TEST_CASE("certificate round trip and tamper rejection") {
    SelectionParams prm;
    prm.levels = 2;
    const auto res = select_paths_d3(prm);
    REQUIRE(res.ok());
    const std::string text = to_certificate_text(*res.state);
    const auto parsed = parse_certificate(text);
    CHECK(verify_certificate(parsed).ok);
    CHECK(to_certificate_text(parsed) == text); // bitwise round trip

    // tamper with a stored sum: flip one hex digit in the qsum field
    {
        auto pos = text.find("qsum ");
        REQUIRE(pos != std::string::npos);
        std::string bad = text;
        pos += 5;
        while (bad[pos] != '.' && bad[pos] != 'p') ++pos; // land inside the number
        ++pos;
        bad[pos] = bad[pos] == '1' ? '2' : '1';
        bool rejected = false;
        try {
            rejected = !verify_certificate(parse_certificate(bad)).ok;
        } catch (const std::exception&) {
            rejected = true;
        }
        CHECK(rejected);
    }
    // tamper with a path id
    {
        auto pos = text.find(" path ");
        REQUIRE(pos != std::string::npos);
        std::string bad = text;
        const char digit = bad[pos + 6];
        bad[pos + 6] = digit == '1' ? '2' : '1';
        bool rejected = false;
        try {
            rejected = !verify_certificate(parse_certificate(bad)).ok;
        } catch (const std::exception&) {
            rejected = true;
        }
        CHECK(rejected);
    }
}

TEST_CASE("lalpha on an empty trajectory") {
    const ProjectedWeights w(choose_exponents_b(3, 0.2));
    CHECK(lalpha_partial_sums({}, w, 0.45).empty());
}

TEST_CASE("parallelepiped recursion: forms, growth, overlaps") {
    for (int d : {3, 4}) {
        const auto f = build_parallelepipeds(d, 12);
        REQUIRE(f.levels.size() == 13);
        CHECK(f.all_bounds_pow2_form());
        for (int dir = 1; dir <= d - 1; ++dir) {
            const double target = 2.0 * double(dir) / double(d - 1); // log2 scale
            CHECK(std::abs(f.width_slopes[size_t(dir - 1)] - target) <= 0.1 * target);
            CHECK(std::abs(f.x_slopes[size_t(dir - 1)] - target) <= 0.1 * target);
        }
        // consecutive levels intersect
        for (size_t n = 0; n + 1 < f.levels.size(); ++n) {
            for (int c = 0; c < d - 1; ++c) {
                const Int lo = std::max(f.levels[n].lo[size_t(c)], f.levels[n + 1].lo[size_t(c)]);
                const Int hi = std::min(f.levels[n].hi[size_t(c)], f.levels[n + 1].hi[size_t(c)]);
                CHECK(lo <= hi);
            }
        }
        // |Q(n)| <= (2 C2)^{d-1} 4^{nd/2}
        for (size_t n = 0; n < f.levels.size(); ++n) {
            double logcount = 0.0;
            for (int c = 0; c < d - 1; ++c)
                logcount += std::log2((f.levels[n].hi[size_t(c)] - f.levels[n].lo[size_t(c)] + 1)
                                          .convert_to<double>());
            const double bound = double(d - 1) * std::log2(2.0 * f.C2) +
                                 double(n) * double(d) / 2.0 * 2.0;
            CHECK(logcount <= bound + 1e-9);
        }
    }
}

TEST_CASE("partition_level structure") {
    const auto f = build_parallelepipeds(4, 6);
    for (int n = 1; n <= 6; ++n) {
        const auto ps = partition_level(f, n);
        CHECK(ps.direction == ((n - 1) % 3) + 1);
        if (ps.direction == 1) {
            CHECK(ps.N == 1);
            // path count is the transverse point count
            int64_t expect = 1;
            for (size_t c = 0; c < ps.t_lo.size(); ++c)
                expect *= ps.t_hi[c] - ps.t_lo[c] + 1;
            CHECK(ps.path_count == expect);
        } else {
            CHECK(ps.N >= 3);
            CHECK(((ps.N - 1) & (ps.N - 2)) == 0); // N = 1 + 2^k
            CHECK(ps.path_count == ps.N * ps.fiber_count);
        }
    }
    // m_n >= C5 4^{n[d/2 - 1/(d-1)]} on the generated range
    for (int n = 1; n <= 6; ++n) {
        const auto ps = partition_level(f, n);
        const double floor_count =
            f.C5 * std::pow(4.0, double(n) * (4.0 / 2.0 - 1.0 / 3.0));
        CHECK(double(ps.path_count) >= floor_count);
    }
}

TEST_CASE("general-d selection at modest depth") {
    const auto sel = select_paths_general(3, 3, 0.45, 0.20, 512);
    REQUIRE(sel.ok);
    CHECK(sel.chosen.size() == 3);
    for (const auto& gc : sel.chosen) CHECK(gc.sum <= gc.threshold);
    // partial sums monotone, trajectory nonempty and loop-free
    CHECK(!sel.trajectory.empty());
    std::set<std::vector<int64_t>> distinct(sel.trajectory.begin(), sel.trajectory.end());
    CHECK(distinct.size() == sel.trajectory.size());
    for (size_t t = 1; t < sel.lalpha_partial.size(); ++t)
        CHECK(sel.lalpha_partial[t] >= sel.lalpha_partial[t - 1]);
}
