#include "nilreg/markov.hpp"

#include <doctest.h>

#include <map>

using namespace nilreg;

namespace {

Rational prob_to(const std::vector<Step>& steps, WalkState to) {
    for (const auto& s : steps)
        if (s.to == to) return s.prob;
    return Rational(0);
}

} // namespace

TEST_CASE("transition examples from the figure") {
    auto s = transition({2, 0});
    CHECK(prob_to(s, {3, 0}) == Rational(2, 3));
    CHECK(prob_to(s, {2, 1}) == Rational(1, 6));
    CHECK(prob_to(s, {2, -1}) == Rational(1, 6));

    s = transition({2, 1});
    CHECK(prob_to(s, {3, 1}) == Rational(5, 8));
    CHECK(prob_to(s, {2, 2}) == Rational(3, 8));

    s = transition({1, 1});
    CHECK(prob_to(s, {2, 1}) == Rational(1, 2));
    CHECK(prob_to(s, {1, 2}) == Rational(1, 2));

    s = transition({0, 0});
    CHECK(s.size() == 4);
    for (const auto& t : s) CHECK(t.prob == Rational(1, 4));
}

TEST_CASE("outgoing probabilities sum to one and radius strictly grows") {
    for (int64_t x = -6; x <= 6; ++x) {
        for (int64_t y = -6; y <= 6; ++y) {
            const WalkState st{x, y};
            Rational total = 0;
            for (const auto& t : transition(st)) {
                total += t.prob;
                CHECK(t.to.radius() == st.radius() + 1);
                CHECK(t.prob > 0);
            }
            CHECK(total == 1);
        }
    }
}

TEST_CASE("rule is symmetric under the axis-preserving symmetries") {
    auto reflect = [](WalkState s, int which) -> WalkState {
        switch (which) {
        case 0: return {-s.x, s.y};
        case 1: return {s.x, -s.y};
        default: return {s.y, s.x};
        }
    };
    for (int which = 0; which < 3; ++which) {
        for (int64_t x = -4; x <= 4; ++x)
            for (int64_t y = -4; y <= 4; ++y) {
                const WalkState st{x, y};
                auto base = transition(st);
                auto mirrored = transition(reflect(st, which));
                for (const auto& t : base)
                    CHECK(prob_to(mirrored, reflect(t.to, which)) == t.prob);
            }
    }
}

TEST_CASE("arrival distributions are uniform") {
    auto a1 = arrival_distribution(1);
    CHECK(a1.probabilities.size() == 4);
    for (const auto& [st, p] : a1.probabilities) CHECK(p == Rational(1, 4));

    auto a3 = arrival_distribution(3);
    CHECK(a3.probabilities.at({2, 1}) == Rational(1, 12));

    auto a5 = arrival_distribution(5);
    CHECK(a5.probabilities.size() == 20);
    for (const auto& [st, p] : a5.probabilities) {
        CHECK(st.radius() == 5);
        CHECK(p == Rational(1, 20));
    }
}

TEST_CASE("verify_equidistribution to k = 30 exactly") {
    const auto rep = verify_equidistribution(30);
    CHECK(rep.success);
}

TEST_CASE("perturbed rule fails first at k = 4") {
    const auto rep = verify_equidistribution(10, transition_perturbed);
    CHECK_FALSE(rep.success);
    CHECK(rep.first_failure == 4);
    // k_max below the reach of the perturbation still verifies
    CHECK(verify_equidistribution(3, transition_perturbed).success);
    CHECK(verify_equidistribution(1, transition_perturbed).success);
}

TEST_CASE("sample paths are deterministic and start at the origin") {
    auto a = sample_path(99, 50);
    auto b = sample_path(99, 50);
    CHECK(a == b);
    CHECK(a.size() == 51);
    CHECK(a[0] == WalkState{0, 0});
    for (size_t t = 1; t < a.size(); ++t) CHECK(a[t].radius() == int64_t(t));
    CHECK(sample_path(1, 0) == std::vector<WalkState>{{0, 0}});
}

TEST_CASE("empirical sphere-2 frequencies within 3 sigma of 1/8") {
    const int trials = 100000;
    std::map<WalkState, int> hits;
    for (int t = 0; t < trials; ++t) {
        auto path = sample_path(uint64_t(t) * 2654435761u + 7, 2);
        hits[path.back()]++;
    }
    CHECK(hits.size() == 8);
    const double p = 1.0 / 8.0;
    const double sigma = std::sqrt(p * (1 - p) / trials);
    for (const auto& [st, count] : hits) {
        const double freq = double(count) / trials;
        CHECK(std::abs(freq - p) <= 3.0 * sigma);
    }
}
