#include "nilreg/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace nilreg {

namespace {

int direction_of(int n, int d) {
    // residue of n mod (d-1) taken in {1, ..., d-1}
    const int m = d - 1;
    int r = n % m;
    if (r <= 0) r += m;
    return r;
}

bool pow2_form(const Int& v) {
    if (v < 2) return false;
    Int m = v - 1;
    return (m & (m - 1)) == 0;
}


int64_t to_i64(const Int& v, const char* what) {
    if (v > Int(INT64_MAX / 4) || v < Int(INT64_MIN / 4))
        throw std::overflow_error(std::string("parallelepiped: ") + what +
                                  " exceeds the 64-bit working range");
    return v.convert_to<int64_t>();
}

} // namespace

ParallelepipedFamily build_parallelepipeds(int d, int n_max) {
    if (d < 3) throw std::invalid_argument("build_parallelepipeds: d must be >= 3");
    if (n_max < 1) throw std::invalid_argument("build_parallelepipeds: n_max must be >= 1");
    ParallelepipedFamily f;
    f.d = d;
    const int m = d - 1;

    ParallelepipedLevel cur;
    // Q(0) lower bounds start at 5 = 1+4 rather than the degenerate 1, so
    // that the shrink rule 1 + 4^i(x-1) actually moves them
    cur.lo.assign(size_t(m), Int(5));
    cur.hi.assign(size_t(m), Int(1) + boost::multiprecision::pow(Int(4), unsigned(d + 1)));
    cur.direction = direction_of(0, d);
    f.levels.push_back(cur);

    for (int n = 0; n < n_max; ++n) {
        const int i = direction_of(n, d);          // shrink direction
        const int j = i < m ? i + 1 : 1;           // extend direction (cyclic)
        ParallelepipedLevel next = f.levels.back();
        const Int fac_i = boost::multiprecision::pow(Int(4), unsigned(i));
        const Int fac_j = boost::multiprecision::pow(Int(4), unsigned(j));
        next.lo[size_t(i - 1)] = 1 + fac_i * (next.lo[size_t(i - 1)] - 1);
        next.hi[size_t(j - 1)] = 1 + fac_j * (next.hi[size_t(j - 1)] - 1);
        next.direction = direction_of(n + 1, d);
        if (next.lo[size_t(i - 1)] > next.hi[size_t(i - 1)])
            throw std::logic_error("build_parallelepipeds: shrink passed the upper bound");
        f.levels.push_back(std::move(next));
    }

    // envelope constants and per-direction growth fits
    f.C1 = 1e300;
    f.C2 = 0.0;
    f.C3 = 1e300;
    f.C4 = 0.0;
    f.width_slopes.assign(size_t(m), 0.0);
    f.x_slopes.assign(size_t(m), 0.0);
    for (int dir = 1; dir <= m; ++dir) {
        std::vector<double> ns, lw, lx;
        for (int n = 0; n <= n_max; ++n) {
            const auto& lvl = f.levels[size_t(n)];
            const double width =
                (lvl.hi[size_t(dir - 1)] - lvl.lo[size_t(dir - 1)]).convert_to<double>();
            const double x = lvl.lo[size_t(dir - 1)].convert_to<double>();
            const double scale = std::pow(4.0, double(dir) * double(n) / double(m));
            f.C1 = std::min(f.C1, width / scale);
            f.C2 = std::max(f.C2, width / scale);
            f.C3 = std::min(f.C3, x / scale);
            f.C4 = std::max(f.C4, x / scale);
            ns.push_back(double(n));
            lw.push_back(std::log2(width));
            lx.push_back(std::log2(x));
        }
        f.width_slopes[size_t(dir - 1)] = fit_line(ns, lw).slope;
        f.x_slopes[size_t(dir - 1)] = fit_line(ns, lx).slope;
    }
    f.C5 = std::min(f.C3 * std::pow(f.C1, d - 2), std::pow(f.C1, d - 2));
    return f;
}

bool ParallelepipedFamily::all_bounds_pow2_form() const {
    for (const auto& lvl : levels) {
        for (const auto& v : lvl.lo)
            if (!pow2_form(v)) return false;
        for (const auto& v : lvl.hi)
            if (!pow2_form(v)) return false;
    }
    return true;
}

LevelPathSet partition_level(const ParallelepipedFamily& f, int n) {
    if (n < 0 || n >= int(f.levels.size()))
        throw std::invalid_argument("partition_level: level not built");
    const auto& lvl = f.levels[size_t(n)];
    const int m = f.d - 1;
    LevelPathSet out;
    out.level = n;
    out.direction = lvl.direction;
    out.fiber_lo = to_i64(lvl.lo[size_t(lvl.direction - 1)], "fiber bound");
    out.fiber_hi = to_i64(lvl.hi[size_t(lvl.direction - 1)], "fiber bound");
    out.N = lvl.direction == 1 ? 1 : to_i64(lvl.lo[size_t(lvl.direction - 2)], "path count");
    out.fiber_count = 1;
    for (int dir = 1; dir <= m; ++dir) {
        if (dir == lvl.direction) continue;
        const int64_t lo = to_i64(lvl.lo[size_t(dir - 1)], "transverse bound");
        const int64_t hi = to_i64(lvl.hi[size_t(dir - 1)], "transverse bound");
        out.t_lo.push_back(lo);
        out.t_hi.push_back(hi);
        out.fiber_count *= hi - lo + 1;
    }
    out.path_count = out.N * out.fiber_count;
    // fibers whose direction-(i-1) coordinate equals N fall back to the
    // residue decomposition (M = N)
    out.any_degenerate = lvl.direction != 1;
    return out;
}

double GeneralConstants::thr(int n) const {
    return A[size_t(n - 1)] * C6 / std::pow(4.0, double(n) * exponent());
}

namespace {

struct FamilyCache {
    std::map<std::pair<int64_t, int64_t>, PathFamily> cache;
    const PathFamily& get(int64_t N, int64_t M) {
        auto key = std::make_pair(N, M);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, build_paths(N, M)).first;
        return it->second;
    }
};

} // namespace

GeneralConstants compute_constants_general(const ParallelepipedFamily& f,
                                           const ProjectedWeights& w, double alpha) {
    GeneralConstants c;
    c.d = f.d;
    c.alpha = alpha;
    if (!(c.exponent() > 0.0))
        throw InfeasibleAlpha("compute_constants_general: alpha at or below 2/(d(d-1))");
    c.C6 = std::pow(f.C2 + 1.0, double(f.d - 1) * (1.0 - alpha)) / f.C5;
    const double t = std::pow(2.0, -c.exponent());
    c.C = 2.0 * t / (1.0 - t);

    const int n_max = int(f.levels.size()) - 1;
    FamilyCache fams;
    // boundary counts r_n, s_n, r'_n, s'_n over paths meeting Q(n) /\ Q(n+1)
    for (int n = 1; n + 1 <= n_max; ++n) {
        const int m = f.d - 1;
        std::vector<int64_t> ilo(size_t(m), 0), ihi(size_t(m), 0);
        for (int dir = 1; dir <= m; ++dir) {
            ilo[size_t(dir - 1)] =
                std::max(to_i64(f.levels[size_t(n)].lo[size_t(dir - 1)], "bound"),
                         to_i64(f.levels[size_t(n + 1)].lo[size_t(dir - 1)], "bound"));
            ihi[size_t(dir - 1)] =
                std::min(to_i64(f.levels[size_t(n)].hi[size_t(dir - 1)], "bound"),
                         to_i64(f.levels[size_t(n + 1)].hi[size_t(dir - 1)], "bound"));
            if (ilo[size_t(dir - 1)] > ihi[size_t(dir - 1)])
                throw std::logic_error("compute_constants_general: empty level intersection");
        }
        auto minmax_counts = [&](int level) -> std::pair<int64_t, int64_t> {
            const auto& lvl = f.levels[size_t(level)];
            const int dir = lvl.direction;
            const int64_t a = ilo[size_t(dir - 1)], b = ihi[size_t(dir - 1)];
            if (dir == 1) {
                const int64_t cnt = b - a + 1; // unit paths all agree
                return {cnt, cnt};
            }
            const int64_t N = to_i64(lvl.lo[size_t(dir - 2)], "path count");
            const int64_t mlo = ilo[size_t(dir - 2)], mhi = ihi[size_t(dir - 2)];
            int64_t lo_c = INT64_MAX, hi_c = INT64_MIN;
            for (int64_t M = mlo; M <= mhi; ++M) {
                const auto& fam = fams.get(N, M);
                for (int64_t id = 1; id <= N; ++id) {
                    const int64_t cnt = count_in_window(fam, id, a, b);
                    if (cnt == 0) continue; // paths missing the box do not chain
                    lo_c = std::min(lo_c, cnt);
                    hi_c = std::max(hi_c, cnt);
                }
            }
            if (lo_c == INT64_MAX)
                throw std::logic_error("compute_constants_general: no path meets the box");
            return {lo_c, hi_c};
        };
        const auto [rn, sn] = minmax_counts(n);
        const auto [rpn, spn] = minmax_counts(n + 1);
        c.r.push_back(rn);
        c.s.push_back(sn);
        c.rp.push_back(rpn);
        c.sp.push_back(spn);
    }
    c.B = 1.0;
    for (size_t i = 0; i < c.r.size(); ++i)
        c.B *= (double(c.s[i]) / double(c.r[i])) * (double(c.sp[i]) / double(c.rp[i]));

    // A_1 so that the estimate holds for every path of Q(1); the fiber
    // weights decrease in every |coordinate|, so the largest path sum lives
    // at the smallest transverse coordinates; scan that fiber exactly
    double a1 = c.B * c.C * std::pow(2.0, c.exponent());
    {
        const LevelPathSet ps = partition_level(f, 1);
        std::vector<int64_t> point(size_t(f.d - 1));
        size_t t = 0;
        for (int dir = 1; dir <= f.d - 1; ++dir)
            if (dir != ps.direction) point[size_t(dir - 1)] = ps.t_lo[t++];
        double needed = 0.0;
        if (ps.direction == 1) {
            double acc = 0.0;
            for (int64_t v = ps.fiber_lo; v <= ps.fiber_hi; ++v) {
                point[size_t(ps.direction - 1)] = v;
                acc += std::pow(w(point), alpha);
            }
            needed = acc;
        } else {
            const int64_t M = point[size_t(ps.direction - 2)];
            const auto& fam = fams.get(ps.N, M);
            for (int64_t id = 1; id <= ps.N; ++id) {
                double acc = 0.0;
                for (int64_t v : path_points_in(fam, id, ps.fiber_lo, ps.fiber_hi)) {
                    point[size_t(ps.direction - 1)] = v;
                    acc += std::pow(w(point), alpha);
                }
                needed = std::max(needed, acc);
            }
        }
        const double denom = c.C6 / std::pow(4.0, c.exponent());
        a1 = std::max(a1, needed / denom);
    }
    c.A.push_back(a1);
    for (int n = 2; n <= n_max; ++n)
        c.A.push_back(c.B * c.C * std::pow(2.0, double(n) * c.exponent()));
    return c;
}

namespace {

struct GeneralWalk {
    const ParallelepipedFamily& f;
    const ProjectedWeights& w;
    const GeneralConstants& cons;
    FamilyCache fams;
    int candidate_cap;

    double path_sum(const LevelPathSet& ps, const std::vector<int64_t>& transverse, int64_t id,
                    std::vector<int64_t>& scratch) {
        size_t t = 0;
        for (int dir = 1; dir <= f.d - 1; ++dir)
            if (dir != ps.direction) scratch[size_t(dir - 1)] = transverse[t++];
        double acc = 0.0;
        if (ps.direction == 1) {
            for (int64_t v = ps.fiber_lo; v <= ps.fiber_hi; ++v) {
                scratch[size_t(ps.direction - 1)] = v;
                acc += std::pow(w(scratch), alpha());
            }
            return acc;
        }
        const int64_t M = transverse[size_t(transverse_index(ps, ps.direction - 1))];
        const auto& fam = fams.get(ps.N, M);
        for (int64_t v : path_points_in(fam, id, ps.fiber_lo, ps.fiber_hi)) {
            scratch[size_t(ps.direction - 1)] = v;
            acc += std::pow(w(scratch), alpha());
        }
        return acc;
    }

    double alpha() const { return cons.alpha; }

    // position of direction dir within the transverse tuple of ps
    static size_t transverse_index(const LevelPathSet& ps, int dir) {
        size_t t = 0;
        for (int dd = 1; dd <= dir; ++dd) {
            if (dd == ps.direction) continue;
            if (dd == dir) break;
            ++t;
        }
        return t;
    }

    std::vector<int64_t> path_points_full(const LevelPathSet& ps,
                                          const std::vector<int64_t>& transverse, int64_t id,
                                          std::vector<std::vector<int64_t>>& out) {
        std::vector<int64_t> scratch(size_t(f.d - 1));
        size_t t = 0;
        for (int dir = 1; dir <= f.d - 1; ++dir)
            if (dir != ps.direction) scratch[size_t(dir - 1)] = transverse[t++];
        std::vector<int64_t> coords;
        if (ps.direction == 1) {
            for (int64_t v = ps.fiber_lo; v <= ps.fiber_hi; ++v) coords.push_back(v);
        } else {
            const int64_t M = transverse[size_t(transverse_index(ps, ps.direction - 1))];
            coords = path_points_in(fams.get(ps.N, M), id, ps.fiber_lo, ps.fiber_hi);
        }
        for (int64_t v : coords) {
            scratch[size_t(ps.direction - 1)] = v;
            out.push_back(scratch);
        }
        return coords;
    }
};

} // namespace

GeneralSelection select_paths_general(int d, int n_max, double alpha, double alpha_b,
                                      int candidate_cap) {
    GeneralSelection out;
    const ParallelepipedFamily f = build_parallelepipeds(d, n_max);
    const ProjectedWeights w(choose_exponents_b(d, alpha_b));
    GeneralConstants cons;
    try {
        cons = compute_constants_general(f, w, alpha);
    } catch (const std::exception& e) {
        out.failure = e.what();
        return out;
    }
    GeneralWalk walk{f, w, cons, {}, candidate_cap};

    std::vector<GeneralChoice> chosen;
    std::vector<std::vector<int64_t>> prev_points; // points of the previous path

    for (int n = 1; n <= n_max; ++n) {
        const LevelPathSet ps = partition_level(f, n);
        std::vector<int64_t> scratch(size_t(d - 1));
        bool placed = false;
        int tried = 0;

        auto try_path = [&](const std::vector<int64_t>& transverse, int64_t id,
                            const std::vector<int64_t>& entry) -> bool {
            if (tried >= candidate_cap) return false;
            ++tried;
            const double sum = walk.path_sum(ps, transverse, id, scratch);
            if (!(sum <= cons.thr(n))) return false;
            GeneralChoice gc;
            gc.level = n;
            gc.transverse = transverse;
            gc.path_id = id;
            gc.entry = entry;
            gc.sum = sum;
            gc.threshold = cons.thr(n);
            chosen.push_back(gc);
            return true;
        };

        if (n == 1) {
            // first level: scan fibers from the low corner
            std::vector<int64_t> tv(ps.t_lo);
            while (!placed) {
                for (int64_t id = 1; id <= ps.N && !placed; ++id) {
                    std::vector<int64_t> entry(size_t(d - 1));
                    size_t t = 0;
                    for (int dir = 1; dir <= d - 1; ++dir)
                        if (dir != ps.direction) entry[size_t(dir - 1)] = tv[t++];
                    if (ps.direction == 1) {
                        entry[size_t(ps.direction - 1)] = ps.fiber_lo;
                    } else {
                        const int64_t M =
                            tv[size_t(GeneralWalk::transverse_index(ps, ps.direction - 1))];
                        auto pts = path_points_in(walk.fams.get(ps.N, M), id, ps.fiber_lo,
                                                  ps.fiber_hi);
                        if (pts.empty()) continue;
                        entry[size_t(ps.direction - 1)] = pts.front();
                    }
                    placed = try_path(tv, id, entry);
                }
                if (placed || tried >= candidate_cap) break;
                // advance the transverse tuple odometer
                size_t c = 0;
                while (c < tv.size() && ++tv[c] > ps.t_hi[c]) {
                    tv[c] = ps.t_lo[c];
                    ++c;
                }
                if (c == tv.size()) break;
            }
        } else {
            // chain: candidate paths through the previous path's points
            // inside Q(n)
            for (const auto& p : prev_points) {
                bool inside = true;
                for (int dir = 1; dir <= d - 1; ++dir) {
                    const int64_t lo = to_i64(f.levels[size_t(n)].lo[size_t(dir - 1)], "bound");
                    const int64_t hi = to_i64(f.levels[size_t(n)].hi[size_t(dir - 1)], "bound");
                    if (p[size_t(dir - 1)] < lo || p[size_t(dir - 1)] > hi) {
                        inside = false;
                        break;
                    }
                }
                if (!inside) continue;
                std::vector<int64_t> tv;
                for (int dir = 1; dir <= d - 1; ++dir)
                    if (dir != ps.direction) tv.push_back(p[size_t(dir - 1)]);
                int64_t id = 1;
                if (ps.direction != 1) {
                    const int64_t M =
                        tv[size_t(GeneralWalk::transverse_index(ps, ps.direction - 1))];
                    id = path_of(walk.fams.get(ps.N, M), p[size_t(ps.direction - 1)]);
                }
                if (try_path(tv, id, p)) {
                    placed = true;
                    break;
                }
            }
        }
        if (!placed) {
            out.failure = "no admissible path at level " + std::to_string(n) + " within " +
                          std::to_string(tried) + " candidates";
            return out;
        }
        prev_points.clear();
        std::vector<std::vector<int64_t>> pts;
        walk.path_points_full(ps, chosen.back().transverse, chosen.back().path_id, pts);
        prev_points = std::move(pts);
    }

    // trajectory: origin, unit walk to the first entry, then path segments
    // between consecutive entry points
    out.chosen = chosen;
    out.word.d = d - 1;
    std::vector<int64_t> cur(size_t(d - 1), 0);
    out.trajectory.push_back(cur);
    auto unit_walk_to = [&](const std::vector<int64_t>& target) {
        for (int dir = 1; dir <= d - 1; ++dir) {
            while (cur[size_t(dir - 1)] < target[size_t(dir - 1)]) {
                ++cur[size_t(dir - 1)];
                out.word.push(dir + 1, 1);
                out.trajectory.push_back(cur);
            }
        }
    };
    unit_walk_to(chosen.front().entry);
    for (size_t li = 0; li < chosen.size(); ++li) {
        const auto& gc = chosen[li];
        const LevelPathSet ps = partition_level(f, gc.level);
        // walk along this path from the current point to the next entry
        // (or to the path's top point at the last level)
        std::vector<int64_t> goal;
        if (li + 1 < chosen.size())
            goal = chosen[li + 1].entry;
        else {
            std::vector<std::vector<int64_t>> pts;
            walk.path_points_full(ps, gc.transverse, gc.path_id, pts);
            goal = pts.back();
        }
        const int dir = ps.direction;
        std::vector<int64_t> coords;
        {
            std::vector<std::vector<int64_t>> pts;
            coords = walk.path_points_full(ps, gc.transverse, gc.path_id, pts);
        }
        const int64_t from = cur[size_t(dir - 1)], to = goal[size_t(dir - 1)];
        auto lo_it = std::find(coords.begin(), coords.end(), std::min(from, to));
        auto hi_it = std::find(coords.begin(), coords.end(), std::max(from, to));
        if (lo_it == coords.end() || hi_it == coords.end())
            throw std::logic_error("select_paths_general: endpoints not on the chosen path");
        const int sign = to >= from ? 1 : -1;
        std::vector<int64_t> seg(lo_it, hi_it + 1);
        if (sign < 0) std::reverse(seg.begin(), seg.end());
        for (size_t t = 1; t < seg.size(); ++t) {
            const int64_t jump = seg[t] - seg[t - 1];
            const int64_t amp = dir >= 2 ? cur[size_t(dir - 2)] : 0;
            if (jump == sign) {
                out.word.push(dir + 1, 1, sign);
            } else if (dir >= 2 && jump == sign * amp) {
                out.word.push(dir + 1, dir, sign);
            } else {
                throw std::logic_error("select_paths_general: jump is neither unit nor amplitude");
            }
            cur[size_t(dir - 1)] = seg[t];
            out.trajectory.push_back(cur);
        }
    }

    // replay through the exact index action
    {
        IndexPoint v(size_t(d - 1), Int(0));
        size_t t = 1;
        for (const auto& l : out.word.letters) {
            Unitriangular mm = Unitriangular::elementary(d - 1, l.i, l.j);
            if (l.sign < 0) mm = mm.inverse();
            v = act_on_index(mm, v);
            for (int c = 0; c < d - 1; ++c)
                if (v[size_t(c)] != out.trajectory[t][size_t(c)])
                    throw std::logic_error("select_paths_general: word replay mismatch");
            ++t;
        }
    }
    out.lalpha_partial.reserve(out.trajectory.size());
    double acc = 0.0;
    for (const auto& p : out.trajectory) {
        acc += std::pow(w(p), alpha);
        out.lalpha_partial.push_back(acc);
    }
    out.ok = true;
    return out;
}

} // namespace nilreg
