#include "nilreg/orbit.hpp"

#include "nilreg/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace nilreg {

namespace {

// Coordinates stay small (|c| < 2^20 for every census in range), so a point
// of Z^{d-1} packs into one word, 21 bits per coordinate.
uint64_t pack(const std::vector<int64_t>& v) {
    uint64_t key = 0;
    for (int64_t c : v) {
        uint64_t u = uint64_t(c + (1ll << 20));
        if (u >= (1ull << 21)) throw std::overflow_error("ball_census: coordinate overflow");
        key = (key << 21) | u;
    }
    return key;
}

struct MixHash {
    size_t operator()(uint64_t x) const {
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return size_t(x ^ (x >> 31));
    }
};

} // namespace

BallCensus ball_census(int d, int n_max, const CensusOptions& opts) {
    if (d < 2) throw std::invalid_argument("ball_census: d must be >= 2");
    if (n_max < 0) throw std::invalid_argument("ball_census: n_max must be >= 0");
    const int m = d - 1;

    // moves: f_{i,1} adds 1 to coordinate i-1 (i = 2..d);
    //        f_{i,i-1} adds coordinate i-2 to coordinate i-1 (i = 3..d)
    BallCensus out;
    out.d = d;
    out.symmetrized = opts.symmetrized;

    std::unordered_set<uint64_t, MixHash> visited;
    std::vector<std::vector<int64_t>> frontier;
    std::vector<int64_t> origin(size_t(m), 0);
    visited.insert(pack(origin));
    frontier.push_back(origin);
    out.counts.push_back(1);
    out.last_completed = 0;

    for (int n = 1; n <= n_max; ++n) {
        std::vector<std::vector<int64_t>> next;
        for (const auto& p : frontier) {
            auto expand = [&](std::vector<int64_t>&& q) {
                uint64_t key = pack(q);
                if (visited.insert(key).second) next.push_back(std::move(q));
            };
            for (int c = 0; c < m; ++c) {
                for (int s : {+1, -1}) {
                    if (s < 0 && !opts.symmetrized) continue;
                    auto q = p;
                    q[size_t(c)] += s;
                    expand(std::move(q));
                }
            }
            for (int c = 1; c < m; ++c) {
                for (int s : {+1, -1}) {
                    if (s < 0 && !opts.symmetrized) continue;
                    auto q = p;
                    q[size_t(c)] += s * p[size_t(c - 1)];
                    expand(std::move(q));
                }
            }
        }
        if (visited.size() > opts.max_points) {
            out.truncated = true;
            break;
        }
        out.counts.push_back(visited.size());
        out.last_completed = n;
        frontier.swap(next);
    }
    return out;
}

uint64_t closed_form_d3(int n) {
    if (n < 0) throw std::invalid_argument("closed_form_d3: n must be >= 0");
    uint64_t nn = uint64_t(n);
    return (nn * nn * nn + 11 * nn + 6) / 6;
}

double growth_exponent_estimate(const BallCensus& c, int lo, int hi) {
    if (lo < 1 || hi <= lo || hi > c.last_completed)
        throw std::invalid_argument("growth_exponent_estimate: bad window");
    std::vector<double> xs, ys;
    uint64_t prev = 0;
    for (int n = lo; n <= hi; ++n) {
        uint64_t cnt = c.counts[size_t(n)];
        if (n > lo && cnt <= prev)
            throw std::invalid_argument("growth_exponent_estimate: counts not increasing");
        prev = cnt;
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(double(cnt)));
    }
    return fit_line(xs, ys).slope;
}

} // namespace nilreg
