#pragma once

#include "nilreg/group.hpp"
#include "nilreg/interval.hpp"
#include "nilreg/numeric.hpp"
#include "nilreg/paths.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nilreg {

// ---------------------------------------------------------------------------
// weights: Theorem-B lengths projected to Z^{d-1} by summing the last
// coordinate's fiber, normalized by an upper estimate of the full total so
// the weights sum to at most 1
// ---------------------------------------------------------------------------

class ProjectedWeights {
public:
    explicit ProjectedWeights(LengthSchemeB scheme);

    int dims() const { return scheme_.d - 1; }
    const LengthSchemeB& scheme() const { return scheme_; }
    double norm() const { return norm_; }

    // unnormalized fiber weight sum_k |I_{v,k}|
    double fiber(const std::vector<int64_t>& v) const;

    double operator()(const std::vector<int64_t>& v) const { return fiber(v) / norm_; }
    double operator()(int64_t i, int64_t j) const { return fiber2(i, j) / norm_; }

private:
    double fiber2(int64_t i, int64_t j) const;

    LengthSchemeB scheme_;
    double norm_ = 1.0;
};

// ---------------------------------------------------------------------------
// Chebyshev/Hoelder density bound (the d=3 shape of the lemma)
// ---------------------------------------------------------------------------

struct HolderDensityBound {
    double threshold_quadratic = 0.0;    // part count >= n^2 / C2
    double threshold_supquadratic = 0.0; // part count >= n^{2+eps} / C2
    double guaranteed_density = 0.0;     // 1 - 1/A
};

HolderDensityBound holder_density_bound(double C1, double C2, double n, double eps, double A,
                                        double alpha);

// synthetic grid for direct verification of the lemma
struct WeightedGrid {
    std::vector<double> weights;
    std::vector<int> part; // 0-based part id per point
    int parts = 0;
};

// fraction of parts whose sum of w^alpha is at most the threshold
double part_density_below(const WeightedGrid& g, double alpha, double threshold);

// ---------------------------------------------------------------------------
// d = 3 level grids: P(n) rows and Q(n) columns with Figure-3 paths
// ---------------------------------------------------------------------------

// alpha > 1/3 and eps < max{(3 alpha - 1)/(1 - alpha), 1}
bool check_conditions_d3(double alpha, double eps);

struct GridD3 {
    int k = 0;
    int64_t n = 0;    // 4^k
    double eps = 0.0;
    int64_t ymax = 0; // floor(n^{2+eps})

    // Q(n) columns x = n .. 2n-1, each decomposed into n paths
    std::vector<PathFamily> columns;

    int64_t p_path_count() const { return ymax + 1; }
    int64_t q_path_count() const { return n * n; }
    const PathFamily& column(int64_t x) const { return columns[size_t(x - n)]; }
};

std::vector<GridD3> build_grids_d3(int k_max, double eps);

// full sums of w^alpha over one path of the grid
double p_row_sum(const GridD3& g, const ProjectedWeights& w, double alpha, int64_t y);
double q_path_sum(const GridD3& g, const ProjectedWeights& w, double alpha, int64_t column_x,
                  int64_t path_id);

// ---------------------------------------------------------------------------
// constants of the d = 3 selection
// ---------------------------------------------------------------------------

struct InfeasibleAlpha : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct D3Constants {
    double alpha = 0.0;
    double eps = 0.0;
    int levels = 0;
    double B = 1.0; // truncated product of (s_k/r_k)(s'_k/r'_k)
    int b_levels_measured = 0;
    std::string b_tail_note;
    double C = 0.0;
    std::vector<double> A; // A[k-1] = A_{n_k}
    std::vector<int64_t> r, s, rp, sp; // boundary counts, k = 2 .. b_levels_measured

    double beta() const { return 3.0 * alpha - 1.0 - eps * (1.0 - alpha); }
    double n_of(int k) const { return std::pow(4.0, k); }
    double thr_first(int k) const; // rows of P(n_k)
    double thr_second(int k) const; // paths of Q(n_k)
};

D3Constants compute_constants_d3(const std::vector<GridD3>& grids, const ProjectedWeights& w,
                                 double alpha, int measure_levels = 4);

// ---------------------------------------------------------------------------
// greedy selection with certificates
// ---------------------------------------------------------------------------

struct LevelChoice {
    int k = 0;
    int64_t n = 0;
    int64_t column = 0;       // x coordinate of the chosen Q column
    int64_t q_path = 0;       // 1-based path id within the column
    int64_t entry_height = 0; // trajectory enters the path here
    int64_t exit_row = 0;     // chosen P row
    double q_sum = 0.0, q_threshold = 0.0;
    double p_sum = 0.0, p_threshold = 0.0;
    double ledger_lower_bound = 0.0; // maintained lower bound on D'_k
};

struct SelectionParams {
    int levels = 3;
    double alpha = 0.45;
    double eps = 0.10;
    double alpha_b = 0.30; // exponent parameter of the weight scheme
};

struct SelectionState {
    SelectionParams params;
    D3Constants constants;
    double weight_norm = 0.0;
    std::vector<LevelChoice> chosen;
    std::vector<std::array<int64_t, 2>> trajectory; // origin first
    GeneratorWord word;                             // replayed and verified
    std::vector<double> lalpha_partial;
    double lalpha_total = 0.0;
    double lalpha_closed_form = 0.0; // 80 A_1 4^{eps(1-alpha)} + 40 B C^2
};

struct SelectionFailure {
    int level = 0;
    std::string reason;
    std::vector<double> ledger;
};

struct SelectionOutcome {
    std::optional<SelectionState> state;
    std::optional<SelectionFailure> failure;
    bool ok() const { return state.has_value(); }
};

SelectionOutcome select_paths_d3(const SelectionParams& params);

// running partial sums of w^alpha along a trajectory
std::vector<double> lalpha_partial_sums(const std::vector<std::array<int64_t, 2>>& trajectory,
                                        const ProjectedWeights& w, double alpha);

// trajectory + word from level choices; verifies the word against the
// trajectory through the exact index action
struct Realized {
    std::vector<std::array<int64_t, 2>> points;
    GeneratorWord word;
};
Realized realize_word_d3(const std::vector<GridD3>& grids,
                         const std::vector<LevelChoice>& chosen);

// plain-text certificate, hexfloat payloads, bitwise reproducible
std::string to_certificate_text(const SelectionState& s);
SelectionState parse_certificate(const std::string& text);

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> failures;
};

// full independent re-derivation: grids, weights, constants, exhaustive
// re-summation, threshold and intersection checks, word replay, bound check
VerifyReport verify_certificate(const SelectionState& s);

// ---------------------------------------------------------------------------
// general d: the Q(n) parallelepiped recursion
// ---------------------------------------------------------------------------

struct ParallelepipedLevel {
    std::vector<Int> lo, hi; // 1+2^k bounds, size d-1
    int direction = 0;       // i(n): path direction of this level
};

struct ParallelepipedFamily {
    int d = 0;
    std::vector<ParallelepipedLevel> levels; // Q(0) .. Q(n_max)
    // fitted envelope constants over the generated range
    double C1 = 0.0, C2 = 0.0; // y - x within [C1, C2] * 4^{i n/(d-1)}
    double C3 = 0.0, C4 = 0.0; // x within [C3, C4] * 4^{i n/(d-1)}
    double C5 = 0.0;           // path count floor coefficient
    // per-direction fitted slopes of log2(y-x) and log2(x) against n
    std::vector<double> width_slopes, x_slopes;

    bool all_bounds_pow2_form() const; // every bound is 1 + 2^k
};

ParallelepipedFamily build_parallelepipeds(int d, int n_max);

// paths of Q(n): direction i(n); unit jumps when i(n) = 1, otherwise
// Lemma-3 families with N = x_{i(n)-1,n} and M the fixed transverse
// coordinate in direction i(n)-1
struct LevelPathSet {
    int level = 0;
    int direction = 0;        // 1-based
    int64_t fiber_lo = 0, fiber_hi = 0;
    int64_t N = 0;            // paths per fiber (1 when direction = 1)
    std::vector<int64_t> t_lo, t_hi; // transverse bounds (d-2 entries)
    int64_t fiber_count = 0;
    int64_t path_count = 0;   // N * fiber_count
    bool any_degenerate = false; // some fiber had M = N
};

LevelPathSet partition_level(const ParallelepipedFamily& f, int n);

struct GeneralConstants {
    double alpha = 0.0;
    double C6 = 0.0;
    double B = 1.0;
    double C = 0.0;
    std::vector<double> A;             // A[n-1] = A_n
    std::vector<int64_t> r, s, rp, sp; // per measured level
    double thr(int n) const;           // A_n C6 / 4^{n(d alpha/2 - 1/(d-1))}
    int d = 0;

    double exponent() const { return double(d) * alpha / 2.0 - 1.0 / double(d - 1); }
};

GeneralConstants compute_constants_general(const ParallelepipedFamily& f,
                                           const ProjectedWeights& w, double alpha);

// greedy chain of intersecting paths through Q(1..n_max) meeting the
// per-level thresholds; candidate scanning is budget-capped
struct GeneralChoice {
    int level = 0;
    std::vector<int64_t> transverse; // fixed coordinates (all but direction)
    int64_t path_id = 0;             // 1-based within fiber
    std::vector<int64_t> entry;      // full entry point
    double sum = 0.0, threshold = 0.0;
};

struct GeneralSelection {
    bool ok = false;
    std::string failure;
    std::vector<GeneralChoice> chosen;
    std::vector<std::vector<int64_t>> trajectory;
    GeneratorWord word;
    std::vector<double> lalpha_partial;
};

GeneralSelection select_paths_general(int d, int n_max, double alpha, double alpha_b,
                                      int candidate_cap = 256);

} // namespace nilreg
