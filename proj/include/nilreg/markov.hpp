#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace nilreg {

using Rational = boost::multiprecision::cpp_rational;

// State of the sphere-equidistributed walk on Z^2.
struct WalkState {
    int64_t x = 0;
    int64_t y = 0;
    friend auto operator<=>(const WalkState&, const WalkState&) = default;
    int64_t radius() const { return (x < 0 ? -x : x) + (y < 0 ? -y : y); }
};

struct Step {
    WalkState to;
    Rational prob;
};

// Transition rule of the walk (sign-symmetric):
//  - origin: each unit neighbor with 1/4;
//  - axis point at distance n > 0: outward with n/(n+1), each
//    perpendicular neighbor with 1/(2(n+1));
//  - interior |x|=i>0, |y|=j>0: |x|+1 with (2i+1)/(2(i+j+1)),
//    |y|+1 with (2j+1)/(2(i+j+1)).
// Every step increases |x|+|y| by one.
std::vector<Step> transition(const WalkState& s);

// Same rule with the two outgoing probabilities at (|x|,|y|) = (2,1)
// swapped; negative control for the equidistribution check.
std::vector<Step> transition_perturbed(const WalkState& s);

using TransitionRule = std::function<std::vector<Step>(const WalkState&)>;

struct ArrivalDistribution {
    int k = 0;
    std::map<WalkState, Rational> probabilities;
};

// Exact k-step dynamic programming from the origin.
ArrivalDistribution arrival_distribution(int k, const TransitionRule& rule = transition);

struct EquidistributionReport {
    bool success = true;
    int first_failure = 0;          // smallest failing radius, 0 when none
    WalkState witness{};            // failing point
    Rational witness_probability{}; // its probability (expected 1/(4k))
};

// Exact check that arrival probabilities equal 1/(4k) on every sphere
// k <= k_max; no tolerance.
EquidistributionReport verify_equidistribution(int k_max,
                                               const TransitionRule& rule = transition);

// Reproducible sample path of the given length, origin first.
std::vector<WalkState> sample_path(uint64_t seed, int steps,
                                   const TransitionRule& rule = transition);

} // namespace nilreg
