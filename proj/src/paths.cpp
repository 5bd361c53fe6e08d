#include "nilreg/paths.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nilreg {

namespace {

bool is_one_plus_power_of_two(int64_t N, int* k_out) {
    if (N < 3) return false;
    int64_t m = N - 1;
    if (m & (m - 1)) return false;
    int k = 0;
    while ((int64_t(1) << k) < m) ++k;
    if (k_out) *k_out = k;
    return true;
}

void finish_blocks(BlockPartition& b) {
    b.blocks.resize(size_t(b.N));
    b.blocks[0] = {0, 0};
    for (int64_t i = 1; i < b.N; ++i) {
        int64_t lo = b.blocks[size_t(i - 1)].hi + 1;
        b.blocks[size_t(i)] = {lo, lo + b.p + b.s[size_t(i - 1)] - 1};
    }
    if (b.blocks.back().hi != b.M - 1)
        throw std::logic_error("block partition does not tile [[0, M-1]]");
}

} // namespace

BlockPartition binary_s_values(int64_t N, int64_t M) {
    int k = 0;
    if (!is_one_plus_power_of_two(N, &k))
        throw std::invalid_argument("binary_s_values: N must be 1+2^k with k >= 1");
    if (M <= N) throw std::invalid_argument("binary_s_values: M must exceed N");
    BlockPartition b;
    b.N = N;
    b.M = M;
    b.p = (M - 1) / (N - 1);
    b.q = (M - 1) % (N - 1);
    for (int r = k - 1; r >= 0; --r)
        if (b.q & (int64_t(1) << r)) b.r_exponents.push_back(r);
    b.s.assign(size_t(N - 1), 0);
    for (int64_t i = 1; i <= N - 1; ++i) {
        int64_t si = 0;
        for (size_t idx = 0; idx < b.r_exponents.size(); ++idx) {
            const int64_t divisor = int64_t(1) << (k - b.r_exponents[idx]);
            if (i % divisor == 0) si = int64_t(idx) + 1;
        }
        b.s[size_t(i - 1)] = si;
    }
    finish_blocks(b);
    return b;
}

BlockPartition simple_blocks(int64_t N, int64_t M) {
    if (N < 2) throw std::invalid_argument("simple_blocks: N must be >= 2");
    if (M < N) throw std::invalid_argument("simple_blocks: M must be >= N");
    BlockPartition b;
    b.N = N;
    b.M = M;
    b.p = 1;
    b.q = 0;
    b.s.assign(size_t(N - 1), 0);
    b.s.back() = M - N; // R_{N-1} = {N-1, ..., M-1}
    finish_blocks(b);
    return b;
}

PathFamily assemble_paths(const BlockPartition& part) {
    if (part.blocks.empty() || part.blocks[0].lo != 0 || part.blocks[0].hi != 0)
        throw std::invalid_argument("assemble_paths: R_0 must be {0}");
    PathFamily f;
    f.part = part;
    const int64_t N = part.N, M = part.M;
    f.period = N * (M - 1);
    f.patches.resize(size_t(N));
    for (int64_t i = 1; i <= N; ++i) {
        auto& ps = f.patches[size_t(i - 1)];
        auto put = [&](int64_t z, int64_t t) {
            const int64_t shift = t * (M - 1);
            ps.push_back({part.blocks[size_t(z)].lo + shift, part.blocks[size_t(z)].hi + shift});
        };
        if (i == 1) {
            for (int64_t z = 1; z <= N - 1; ++z) put(z, z);
        } else {
            for (int64_t z = i - 1; z <= N - 1; ++z) put(z, z - i + 1);
            // wrapped patches skip the slot R_0 would occupy, hence the
            // extra M-1 beyond the printed formula; this is what makes
            // every inter-patch jump equal M (checked against Figure 3)
            for (int64_t z = 1; z <= i - 2; ++z) put(z, z - i + N + 1);
        }
        std::sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    }
    return f;
}

PathFamily build_paths(int64_t N, int64_t M) {
    if (M == N) return assemble_paths(simple_blocks(N, M));
    return assemble_paths(binary_s_values(N, M));
}

PathFamily build_paths_simple(int64_t N, int64_t M) {
    return assemble_paths(simple_blocks(N, M));
}

int64_t path_of(const PathFamily& f, int64_t h) {
    if (h < 0) throw std::invalid_argument("path_of: h must be >= 0");
    if (h == 0) return 1;
    const int64_t N = f.part.N, M = f.part.M;
    const int64_t r = h % f.period;
    if (r == 0 && h > 0) {
        // period boundary: belongs to the previous window's top patch (S_1)
        return 1;
    }
    for (int64_t c = r / (M - 1); c >= 0 && c >= r / (M - 1) - 1; --c) {
        const int64_t u = r - c * (M - 1);
        if (u < 0 || u > M - 1) continue;
        // block containing u
        const auto& blocks = f.part.blocks;
        auto it = std::upper_bound(blocks.begin(), blocks.end(), u,
                                   [](int64_t v, const BlockPartition::Range& b) { return v < b.lo; });
        const int64_t z = int64_t(it - blocks.begin()) - 1;
        if (z < 1) continue; // R_0 never recurs in the periodic part
        if (u > blocks[size_t(z)].hi) continue;
        int64_t i;
        if (c == z) {
            i = 1;
        } else if (c < z) {
            i = z - c + 1;
        } else {
            i = z - c + N + 1;
        }
        if (i >= 1 && i <= N) return i;
    }
    throw std::logic_error("path_of: point escaped the partition");
}

namespace {

// points of the path inside one period window [0, f.period), in [0, r]
int64_t count_window_prefix(const PathFamily& f, int64_t id, int64_t r) {
    int64_t acc = 0;
    for (const auto& p : f.patches[size_t(id - 1)]) {
        if (p.lo > r) break;
        acc += std::min(p.hi, r) - p.lo + 1;
    }
    return acc;
}

} // namespace

int64_t count_in_prefix(const PathFamily& f, int64_t id, int64_t K) {
    if (id < 1 || id > f.part.N) throw std::invalid_argument("count_in_prefix: bad path id");
    if (K < 0) return 0;
    const int64_t M = f.part.M;
    int64_t acc = (id == 1) ? 1 : 0; // the point 0
    // patches can straddle the period boundary (max S_i = period for S_1),
    // so count window by window rather than by closed form on full periods
    const int64_t maxpos = f.patches[size_t(id - 1)].back().hi;
    int64_t full = 0;
    if (K >= maxpos) full = (K - maxpos) / f.period + 1;
    acc += full * (M - 1);
    const int64_t base = full * f.period;
    if (K >= base) acc += count_window_prefix(f, id, K - base);
    return acc;
}

int64_t count_in_window(const PathFamily& f, int64_t id, int64_t K1, int64_t K2) {
    if (K1 > K2) throw std::invalid_argument("count_in_window: K1 must be <= K2");
    return count_in_prefix(f, id, K2) - (K1 > 0 ? count_in_prefix(f, id, K1 - 1) : 0);
}

int64_t path_start(const PathFamily& f, int64_t id) {
    if (id == 1) return 0;
    return f.patches[size_t(id - 1)].front().lo;
}

std::vector<int64_t> path_points_in(const PathFamily& f, int64_t id, int64_t a, int64_t b) {
    if (id < 1 || id > f.part.N) throw std::invalid_argument("path_points_in: bad path id");
    std::vector<int64_t> out;
    if (b < 0 || a > b) return out;
    a = std::max<int64_t>(a, 0);
    if (id == 1 && a == 0) out.push_back(0);
    const auto& ps = f.patches[size_t(id - 1)];
    for (int64_t base = std::max<int64_t>(0, (a / f.period - 1) * f.period); base <= b;
         base += f.period) {
        for (const auto& p : ps) {
            const int64_t lo = std::max(p.lo + base, a);
            const int64_t hi = std::min(p.hi + base, b);
            for (int64_t v = lo; v <= hi; ++v) out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

DeviationReport make_report(const PathFamily& f, int64_t lo_count, int64_t hi_count, double bound) {
    DeviationReport r;
    r.min_count = lo_count;
    r.max_count = hi_count;
    r.bound = bound;
    r.within = double(hi_count - lo_count) <= bound;
    r.degenerate = f.degenerate();
    return r;
}

} // namespace

DeviationReport deviation(const PathFamily& f, int64_t K1, int64_t K2) {
    if (K1 < 0 || K2 < K1) throw std::invalid_argument("deviation: need 0 <= K1 <= K2");
    int64_t lo = INT64_MAX, hi = INT64_MIN;
    for (int64_t id = 1; id <= f.part.N; ++id) {
        const int64_t c = count_in_window(f, id, K1, K2);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    const double N = double(f.part.N), M = double(f.part.M);
    const double bound = 4.0 + 2.0 * (M - 1.0) / (N - 1.0) + 4.0 * std::log2(N - 1.0);
    return make_report(f, lo, hi, bound);
}

DeviationReport prefix_deviation(const PathFamily& f, int64_t K) {
    if (K < 0) throw std::invalid_argument("prefix_deviation: K must be >= 0");
    int64_t lo = INT64_MAX, hi = INT64_MIN;
    for (int64_t id = 1; id <= f.part.N; ++id) {
        const int64_t c = count_in_prefix(f, id, K);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    const double N = double(f.part.N), M = double(f.part.M);
    const double bound = 2.0 + (M - 1.0) / (N - 1.0) + 2.0 * std::log2(N);
    return make_report(f, lo, hi, bound);
}

std::string to_text(const PathFamily& f) {
    std::ostringstream os;
    os << "paths N=" << f.part.N << " M=" << f.part.M << " period=" << f.period
       << (f.degenerate() ? " degenerate" : "") << "\n";
    for (int64_t id = 1; id <= f.part.N; ++id) {
        os << "P" << id << " start=" << path_start(f, id) << " jumps=";
        // one period of jumps starting from the path start
        auto pts = path_points_in(f, id, path_start(f, id), path_start(f, id) + f.period);
        std::vector<std::pair<int64_t, int64_t>> runs;
        for (size_t t = 1; t < pts.size(); ++t) {
            const int64_t jmp = pts[t] - pts[t - 1];
            if (!runs.empty() && runs.back().first == jmp)
                ++runs.back().second;
            else
                runs.push_back({jmp, 1});
        }
        for (size_t t = 0; t < runs.size(); ++t)
            os << (t ? "," : "") << runs[t].first << "x" << runs[t].second;
        os << "\n";
    }
    return os.str();
}

} // namespace nilreg
