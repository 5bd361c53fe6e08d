#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nilreg {

// Consecutive-block partition of [[0, M-1]] seeding the path decomposition.
// blocks[0] = {0} always; block i has p + s_i points.
struct BlockPartition {
    int64_t N = 0; // path count
    int64_t M = 0; // jump size
    int64_t p = 0; // M-1 = (N-1)p + q, 0 <= q < N-1
    int64_t q = 0;
    std::vector<int> r_exponents; // binary expansion exponents of q, decreasing
    std::vector<int64_t> s;       // s_1..s_{N-1}
    struct Range {
        int64_t lo = 0, hi = 0; // inclusive
        int64_t size() const { return hi - lo + 1; }
    };
    std::vector<Range> blocks; // R_0..R_{N-1}
};

// Binary-expansion block sizes: N = 1+2^k (k >= 1), M > N,
// s_i = max { s : 2^{k-r_s} divides i }, zero when no such s.
BlockPartition binary_s_values(int64_t N, int64_t M);

// One-point blocks R_0..R_{N-2} and the remainder R_{N-1} = {N-1..M-1};
// the decomposition behind Figure 3. Requires M >= N >= 2; M == N is the
// degenerate residue-class fallback (every jump equals M).
BlockPartition simple_blocks(int64_t N, int64_t M);

// The N eventually-periodic paths partitioning the non-negative integers.
// Path 1 owns the extra point 0; each path repeats a patch set of M-1
// points with period N(M-1); all jumps are 1 or M.
struct PathFamily {
    BlockPartition part;
    int64_t period = 0;
    struct Patch {
        int64_t lo = 0, hi = 0; // inclusive absolute positions within one period window
    };
    std::vector<std::vector<Patch>> patches; // per path (0-based index = id-1), sorted

    int64_t paths() const { return part.N; }
    bool degenerate() const { return part.M == part.N; }
};

PathFamily assemble_paths(const BlockPartition& part);

// Step-2 blocks when M > N, residue fallback when M == N.
PathFamily build_paths(int64_t N, int64_t M);

// Figure-3 blocks (used by the d = 3 grids).
PathFamily build_paths_simple(int64_t N, int64_t M);

// 1-based id of the path through the non-negative integer h.
int64_t path_of(const PathFamily& f, int64_t h);

// |P_id \cap [[0, K]]|; zero for K < 0.
int64_t count_in_prefix(const PathFamily& f, int64_t id, int64_t K);

int64_t count_in_window(const PathFamily& f, int64_t id, int64_t K1, int64_t K2);

// First point of the path.
int64_t path_start(const PathFamily& f, int64_t id);

// Ascending points of P_id in [[a, b]].
std::vector<int64_t> path_points_in(const PathFamily& f, int64_t id, int64_t a, int64_t b);

struct DeviationReport {
    int64_t min_count = 0;
    int64_t max_count = 0;
    double bound = 0.0;
    bool within = false;
    bool degenerate = false; // M == N fallback was in play
};

// Window counts over all paths against the Lemma bound
// 4 + 2(M-1)/(N-1) + 4 log2(N-1).
DeviationReport deviation(const PathFamily& f, int64_t K1, int64_t K2);

// Prefix counts against the sharper 2 + (M-1)/(N-1) + 2 log2(N).
DeviationReport prefix_deviation(const PathFamily& f, int64_t K);

// (N, M, per-path start, run-length encoded period jump word)
std::string to_text(const PathFamily& f);

} // namespace nilreg
