#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace nilreg {

// Deterministic 64-bit generator (splitmix64). Every randomized routine in
// the library takes an explicit seed and goes through this.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return next() % n; }

    // uniform integer in [lo, hi] inclusive
    int64_t range(int64_t lo, int64_t hi) {
        return lo + int64_t(below(uint64_t(hi - lo + 1)));
    }
};

// Neumaier compensated accumulator; positions of 10^6 abutting intervals
// must not drift.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares line through (xs[i], ys[i]).
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// G_p(u) = \int_u^\infty dt / (1 + t^p), p > 1.
double tail_integral(double p, double u);

// G_p(0) = pi / (p sin(pi/p)).
double tail_integral_at_zero(double p);

// F_p(S) = sum_{k in Z} 1 / (S + |k|^p + 1), p > 1, S >= 0.
// Direct head plus Euler-Maclaurin tail; relative accuracy ~1e-10.
double lattice_fiber_sum(double S, double p);

// sum_{k >= from} 1 / (S + |k|^p + 1) over the integers, any sign of from.
double lattice_fiber_tail(double S, double p, int64_t from);

// Tail sum_{k >= start} g(k) for a smooth decreasing integrable g evaluated
// at real arguments: integral (via the substitution x = start/u and Simpson)
// plus Euler-Maclaurin endpoint corrections with finite-difference g'.
double euler_maclaurin_tail(const std::function<double(double)>& g, double start, int nodes_per_block = 64);

} // namespace nilreg
