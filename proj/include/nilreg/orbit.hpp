#pragma once

#include <cstdint>
#include <vector>

namespace nilreg {

// BFS census of the orbit graph of I* on Z^{d-1}: positive words in the
// generators {f_{2,1},...,f_{d,1}} and {f_{3,2},...,f_{d,d-1}}.
struct BallCensus {
    int d = 0;
    bool symmetrized = false;
    // counts[n] = points reachable by positive words of length <= n
    std::vector<uint64_t> counts;
    // true when the memory cap stopped expansion before n_max
    bool truncated = false;
    int last_completed = 0;

    uint64_t sphere(int n) const {
        return n == 0 ? counts[0] : counts[size_t(n)] - counts[size_t(n) - 1];
    }
};

struct CensusOptions {
    bool symmetrized = false;      // also apply inverse moves (exploratory)
    uint64_t max_points = 200'000'000; // memory cap on the visited set
};

BallCensus ball_census(int d, int n_max, const CensusOptions& opts = {});

// (n^3 + 11 n + 6)/6, exact.
uint64_t closed_form_d3(int n);

// Least-squares slope of log(count) against log(radius) on [lo, hi].
double growth_exponent_estimate(const BallCensus& c, int lo, int hi);

} // namespace nilreg
