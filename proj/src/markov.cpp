#include "nilreg/markov.hpp"

#include "nilreg/numeric.hpp"

#include <stdexcept>

namespace nilreg {

namespace {

int64_t iabs(int64_t v) { return v < 0 ? -v : v; }
int sgn_or(int64_t v, int dflt) { return v > 0 ? 1 : (v < 0 ? -1 : dflt); }

} // namespace

std::vector<Step> transition(const WalkState& s) {
    const int64_t i = iabs(s.x), j = iabs(s.y);
    std::vector<Step> out;
    if (i == 0 && j == 0) {
        out.push_back({{1, 0}, Rational(1, 4)});
        out.push_back({{-1, 0}, Rational(1, 4)});
        out.push_back({{0, 1}, Rational(1, 4)});
        out.push_back({{0, -1}, Rational(1, 4)});
        return out;
    }
    if (j == 0) { // on the x-axis
        const int sx = sgn_or(s.x, 1);
        out.push_back({{s.x + sx, 0}, Rational(i, i + 1)});
        out.push_back({{s.x, 1}, Rational(1, 2 * (i + 1))});
        out.push_back({{s.x, -1}, Rational(1, 2 * (i + 1))});
        return out;
    }
    if (i == 0) { // on the y-axis
        const int sy = sgn_or(s.y, 1);
        out.push_back({{0, s.y + sy}, Rational(j, j + 1)});
        out.push_back({{1, s.y}, Rational(1, 2 * (j + 1))});
        out.push_back({{-1, s.y}, Rational(1, 2 * (j + 1))});
        return out;
    }
    const int sx = sgn_or(s.x, 1), sy = sgn_or(s.y, 1);
    out.push_back({{s.x + sx, s.y}, Rational(2 * i + 1, 2 * (i + j + 1))});
    out.push_back({{s.x, s.y + sy}, Rational(2 * j + 1, 2 * (i + j + 1))});
    return out;
}

std::vector<Step> transition_perturbed(const WalkState& s) {
    auto steps = transition(s);
    if (iabs(s.x) == 2 && iabs(s.y) == 1) std::swap(steps[0].prob, steps[1].prob);
    return steps;
}

ArrivalDistribution arrival_distribution(int k, const TransitionRule& rule) {
    if (k < 1) throw std::invalid_argument("arrival_distribution: k must be >= 1");
    std::map<WalkState, Rational> cur;
    cur[{0, 0}] = 1;
    for (int step = 0; step < k; ++step) {
        std::map<WalkState, Rational> next;
        for (const auto& [state, p] : cur)
            for (const auto& t : rule(state)) next[t.to] += p * t.prob;
        cur.swap(next);
    }
    ArrivalDistribution out;
    out.k = k;
    out.probabilities = std::move(cur);
    return out;
}

EquidistributionReport verify_equidistribution(int k_max, const TransitionRule& rule) {
    if (k_max < 1) throw std::invalid_argument("verify_equidistribution: k_max must be >= 1");
    EquidistributionReport rep;
    std::map<WalkState, Rational> cur;
    cur[{0, 0}] = 1;
    for (int k = 1; k <= k_max; ++k) {
        std::map<WalkState, Rational> next;
        for (const auto& [state, p] : cur)
            for (const auto& t : rule(state)) next[t.to] += p * t.prob;
        cur.swap(next);
        const Rational expected(1, 4 * int64_t(k));
        if (int64_t(cur.size()) != 4 * int64_t(k)) {
            rep.success = false;
            rep.first_failure = k;
            return rep;
        }
        for (const auto& [state, p] : cur) {
            if (state.radius() != k || p != expected) {
                rep.success = false;
                rep.first_failure = k;
                rep.witness = state;
                rep.witness_probability = p;
                return rep;
            }
        }
    }
    return rep;
}

std::vector<WalkState> sample_path(uint64_t seed, int steps, const TransitionRule& rule) {
    if (steps < 0) throw std::invalid_argument("sample_path: steps must be >= 0");
    SplitMix64 rng(seed);
    std::vector<WalkState> path;
    path.reserve(size_t(steps) + 1);
    WalkState s{};
    path.push_back(s);
    for (int t = 0; t < steps; ++t) {
        const auto choices = rule(s);
        const double u = rng.uniform();
        double acc = 0.0;
        s = choices.back().to;
        for (const auto& c : choices) {
            acc += c.prob.convert_to<double>();
            if (u < acc) {
                s = c.to;
                break;
            }
        }
        path.push_back(s);
    }
    return path;
}

} // namespace nilreg
