#include "nilreg/smoothing.hpp"

#include "nilreg/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilreg {

AssembledMap::AssembledMap(std::string name, std::shared_ptr<const IntervalFamily> family,
                           LatticeMap forward, LatticeMap backward)
    : name_(std::move(name)), family_(std::move(family)), fwd_(std::move(forward)),
      bwd_(std::move(backward)) {
    const int64_t count = family_->count();
    mask_.assign(size_t(count), 0);
    image_mask_.assign(size_t(count), 0);
    for (int64_t flat = 0; flat < count; ++flat) {
        const auto idx = family_->unflatten(flat);
        const auto img = fwd_(idx);
        if (bwd_(img) != idx)
            throw std::logic_error("AssembledMap: index map is not invertible");
        if (family_->in_box(img)) {
            mask_[size_t(flat)] = 1;
            image_mask_[size_t(family_->flatten(img))] = 1;
            ++masked_count_;
        }
    }
}

bool AssembledMap::in_domain(double x) const {
    if (x < 0.0 || x > family_->total / family_->scale) return false;
    return mask_[size_t(family_->locate(x))] != 0;
}

PixtonMap AssembledMap::piece(int64_t flat) const {
    if (!mask_[size_t(flat)]) throw std::domain_error("AssembledMap: index outside the mask");
    const auto idx = family_->unflatten(flat);
    const auto img = fwd_(idx);
    const int64_t tflat = family_->flatten(img);
    const double a = family_->length(flat);
    const double ap = family_->predecessor_length(idx);
    const double b = family_->length(tflat);
    const double bp = family_->predecessor_length(img);
    return PixtonMap(-ap, a, -bp, b, family_->left(flat), family_->left(tflat));
}

AssembledMap::Eval AssembledMap::operator()(double x) const {
    const int64_t flat = family_->locate(x);
    if (!mask_[size_t(flat)]) throw std::domain_error("AssembledMap: x outside the masked domain");
    const auto fp = piece(flat)(x);
    return {fp.value, fp.deriv};
}

AssembledMap::Eval AssembledMap::inverse_at(double y) const {
    const int64_t tflat = family_->locate(y);
    if (!image_mask_[size_t(tflat)])
        throw std::domain_error("AssembledMap: y outside the image of the masked domain");
    const auto tidx = family_->unflatten(tflat);
    const auto sidx = bwd_(tidx);
    if (!family_->in_box(sidx))
        throw std::domain_error("AssembledMap: preimage escapes the truncation");
    const auto fp = piece(family_->flatten(sidx)).inverse()(y);
    return {fp.value, fp.deriv};
}

AssembledMap assemble_generator_b(const LengthSchemeB& s,
                                  std::shared_ptr<const IntervalFamily> family, int j) {
    if (j < 1 || j > s.d) throw std::invalid_argument("assemble_generator_b: j out of range");
    auto fwd = [s, j](const std::vector<int64_t>& v) {
        auto out = v;
        if (j == 1)
            out[0] += 1;
        else
            out[size_t(j - 1)] += v[size_t(j - 2)];
        return out;
    };
    auto bwd = [s, j](const std::vector<int64_t>& v) {
        auto out = v;
        if (j == 1)
            out[0] -= 1;
        else
            out[size_t(j - 1)] -= v[size_t(j - 2)];
        return out;
    };
    return AssembledMap("f" + std::to_string(j), std::move(family), fwd, bwd);
}

AssembledMap assemble_generator_c(const LengthSchemeC& s,
                                  std::shared_ptr<const IntervalFamily> family,
                                  const MetabelianGenerator& gen) {
    (void)s;
    auto fwd = [gen](const std::vector<int64_t>& v) {
        IndexPoint ip{Int(v[0]), Int(v[1])};
        auto out = metabelian_index_action(gen, ip, 1);
        return std::vector<int64_t>{out[0].convert_to<int64_t>(),
                                    out[1].convert_to<int64_t>()};
    };
    auto bwd = [gen](const std::vector<int64_t>& v) {
        IndexPoint ip{Int(v[0]), Int(v[1])};
        auto out = metabelian_index_action(gen, ip, -1);
        return std::vector<int64_t>{out[0].convert_to<int64_t>(),
                                    out[1].convert_to<int64_t>()};
    };
    return AssembledMap(gen.name(), std::move(family), fwd, bwd);
}

// ---------------------------------------------------------------------------
// Hoelder estimation
// ---------------------------------------------------------------------------

namespace {

const HolderStratum* find_stratum(const std::vector<HolderStratum>& v, const std::string& n) {
    for (const auto& s : v)
        if (s.name == n) return &s;
    return nullptr;
}

// same-fiber regime tags following the f_1 case analysis; valid for
// 0 <= jd < jd', everything else lands in "II-other"
std::string classify_fiber_pair(const std::vector<int64_t>& lo_idx, int64_t jd, int64_t jdp,
                                const std::vector<double>& p) {
    if (jd < 0 || jdp <= jd) return "II-other";
    const double pd = p.back();
    double S = 0.0;
    for (size_t c = 0; c + 1 < p.size(); ++c)
        S += std::pow(std::abs(double(lo_idx[c])), p[c]);
    const double jd_p = std::pow(double(jd), pd);
    const double jdp_p = std::pow(double(jdp), pd);
    if (jdp <= 2 * jd + 1) return "II-a";
    if (jdp_p <= S) return "II-b";
    if (jd_p >= S) return "II-c";
    if (jdp_p >= S) return "II-d";
    return "II-other";
}

} // namespace

const HolderStratum* HolderEstimate::stratum(const std::string& n) const {
    return find_stratum(strata, n);
}

HolderEstimate holder_seminorm(const AssembledMap& m, double alpha, uint64_t pair_budget,
                               uint64_t seed, const std::vector<double>* exponents) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("holder_seminorm: alpha outside (0,1)");
    const auto& fam = m.family();
    std::vector<int64_t> masked;
    for (int64_t flat = 0; flat < fam.count(); ++flat)
        if (m.in_domain_index(flat)) masked.push_back(flat);
    if (masked.empty()) throw std::domain_error("holder_seminorm: empty masked domain");

    HolderEstimate est;
    est.alpha = alpha;
    auto& strata = est.strata;
    auto bump = [&](const std::string& name, double q, double x, double y, int64_t fx,
                    int64_t fy) {
        for (auto& s : strata) {
            if (s.name == name) {
                ++s.pairs;
                if (q > s.max_quotient) {
                    s.max_quotient = q;
                    s.witness = {x, y};
                    s.witness_index = {fx, fy};
                }
                return;
            }
        }
        strata.push_back({name, 1, q, {x, y}, {fx, fy}});
    };

    SplitMix64 rng(seed);
    // points are carried as (interval, offset) so pairs inside one interval
    // keep exact separations even when the interval is far below the
    // position resolution of the line
    struct Pt {
        int64_t flat;
        double off; // within [0, length]
    };
    auto point_in = [&](int64_t flat) -> Pt {
        // keep a sliver away from the endpoints so quotients stay finite
        const double u = 0.02 + 0.96 * rng.uniform();
        return {flat, u * fam.length(flat)};
    };
    auto log_df = [&](const Pt& p) {
        const auto piece = m.piece(p.flat);
        return std::log(psi(piece.time(), p.off / piece.a_pos).deriv * piece.b_pos /
                        piece.a_pos);
    };
    // cross-interval separations below the line's floating resolution are
    // not meaningfully sampleable; such pairs are skipped
    auto separation = [&](const Pt& a, const Pt& b) {
        if (a.flat == b.flat) return std::abs(a.off - b.off);
        const double d =
            std::abs((fam.left(b.flat) + b.off) - (fam.left(a.flat) + a.off));
        return d >= 1e-13 ? d : 0.0;
    };
    auto quotient = [&](const Pt& a, const Pt& b, double& sep) {
        sep = separation(a, b);
        if (sep <= 0.0) return -1.0;
        return std::abs(log_df(a) - log_df(b)) / std::pow(sep, alpha);
    };
    auto global = [&](const Pt& p) { return fam.left(p.flat) + p.off; };

    const uint64_t per = pair_budget / 3;
    // I: both points in one interval
    for (uint64_t t = 0; t < per; ++t) {
        const int64_t flat = masked[size_t(rng.below(masked.size()))];
        const Pt x = point_in(flat), y = point_in(flat);
        double sep;
        const double q = quotient(x, y, sep);
        if (q >= 0.0) bump("I", q, global(x), global(y), flat, flat);
    }
    // II: same fiber, different last coordinate
    const int64_t last_rad = fam.radius.back();
    for (uint64_t t = 0; t < per; ++t) {
        const int64_t flat = masked[size_t(rng.below(masked.size()))];
        auto idx = fam.unflatten(flat);
        auto other = idx;
        other.back() = rng.range(-last_rad, last_rad);
        if (other.back() == idx.back()) continue;
        if (!fam.in_box(other)) continue;
        const int64_t oflat = fam.flatten(other);
        if (!m.in_domain_index(oflat)) continue;
        const Pt x = point_in(flat), y = point_in(oflat);
        std::string name = "II";
        if (exponents) {
            int64_t jd = idx.back(), jdp = other.back();
            if (jd > jdp) std::swap(jd, jdp);
            name = classify_fiber_pair(idx, jd, jdp, *exponents);
        }
        double sep;
        const double q = quotient(x, y, sep);
        if (q >= 0.0) bump(name, q, global(x), global(y), flat, oflat);
    }
    // III: different fibers, routed through the fiber-accumulation boundary
    // (where the untruncated map has derivative one); the distance to the
    // boundary is the full formula tail, not the truncated stub, so the
    // quantity does not depend on the box
    auto routed_q = [&](const Pt& p, bool facing_right) -> double {
        if (!exponents) return -1.0;
        const auto idx = fam.unflatten(p.flat);
        double S = 0.0;
        for (size_t c = 0; c + 1 < idx.size(); ++c)
            S += std::pow(std::abs(double(idx[c])), (*exponents)[c]);
        const double ptail = exponents->back();
        const int64_t k = idx.back();
        double dist;
        if (facing_right)
            dist = (fam.length(p.flat) - p.off) + lattice_fiber_tail(S, ptail, k + 1) / fam.scale;
        else
            dist = p.off +
                   (lattice_fiber_sum(S, ptail) - lattice_fiber_tail(S, ptail, k)) / fam.scale;
        return std::abs(log_df(p)) / std::pow(dist, alpha);
    };
    for (uint64_t t = 0; t < per; ++t) {
        const int64_t flat = masked[size_t(rng.below(masked.size()))];
        const int64_t oflat = masked[size_t(rng.below(masked.size()))];
        auto a = fam.unflatten(flat), b = fam.unflatten(oflat);
        bool same_fiber = true;
        for (size_t c = 0; c + 1 < a.size(); ++c) same_fiber = same_fiber && a[c] == b[c];
        if (same_fiber) continue;
        const Pt x = point_in(flat), y = point_in(oflat);
        if (exponents) {
            const bool x_below = a < b; // lexicographic fiber order
            const double qx = routed_q(x, x_below);
            const double qy = routed_q(y, !x_below);
            bump("III", std::max(qx, qy), global(x), global(y), flat, oflat);
        } else {
            double sep;
            const double q = quotient(x, y, sep);
            if (q >= 0.0) bump("III", q, global(x), global(y), flat, oflat);
        }
    }

    for (const auto& s : strata) est.seminorm = std::max(est.seminorm, s.max_quotient);
    return est;
}

// ---------------------------------------------------------------------------
// relations
// ---------------------------------------------------------------------------

RelationReport verify_relation(const std::map<std::string, const AssembledMap*>& maps,
                               const MapWord& lhs, const MapWord& rhs, int64_t index_range,
                               uint64_t samples, uint64_t seed, const std::string& label) {
    if (maps.empty()) throw std::invalid_argument("verify_relation: no maps");
    RelationReport rep;
    rep.relation = label;
    const AssembledMap* first = maps.begin()->second;
    const int dims = first->family().dims;

    auto apply_index = [&](const MapWord& wrd, std::vector<int64_t> v) {
        for (const auto& [nm, sign] : wrd.letters) {
            const AssembledMap* mp = maps.at(nm);
            v = sign > 0 ? mp->map_index(v) : mp->unmap_index(v);
        }
        return v;
    };

    // exact index-level comparison over the whole box |i_c| <= index_range
    std::vector<int64_t> v(size_t(dims), -index_range);
    bool done = false;
    while (!done) {
        auto a = apply_index(lhs, v);
        auto b = apply_index(rhs, v);
        ++rep.index_points;
        if (a != b) {
            rep.index_ok = false;
            rep.index_witness = v;
            break;
        }
        int c = 0;
        for (; c < dims; ++c) {
            if (++v[size_t(c)] <= index_range) break;
            v[size_t(c)] = -index_range;
        }
        done = c == dims;
    }

    // pointwise comparison on sampled points whose whole chains stay masked
    SplitMix64 rng(seed);
    const auto& fam = first->family();
    auto apply_point = [&](const MapWord& wrd, double x) -> std::optional<double> {
        for (const auto& [nm, sign] : wrd.letters) {
            const AssembledMap* mp = maps.at(nm);
            try {
                x = sign > 0 ? (*mp)(x).y : mp->inverse_at(x).y;
            } catch (const std::domain_error&) {
                return std::nullopt;
            }
        }
        return x;
    };
    for (uint64_t t = 0; t < samples; ++t) {
        const int64_t flat = int64_t(rng.below(uint64_t(fam.count())));
        const double x = fam.left(flat) + rng.uniform() * fam.length(flat);
        const auto a = apply_point(lhs, x);
        const auto b = apply_point(rhs, x);
        if (!a || !b) continue;
        ++rep.pointwise_samples;
        rep.sup_pointwise = std::max(rep.sup_pointwise, std::abs(*a - *b));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

std::vector<StabilityRow> stability_report(const std::function<AssembledMap(int64_t)>& builder,
                                           const std::vector<int64_t>& radii, double alpha,
                                           uint64_t pair_budget, uint64_t seed,
                                           const std::vector<double>* exponents,
                                           double flag_ratio) {
    if (radii.size() < 2) throw std::invalid_argument("stability_report: need >= 2 boxes");
    std::vector<StabilityRow> rows;
    for (int64_t r : radii) {
        const AssembledMap m = builder(r);
        const auto est = holder_seminorm(m, alpha, pair_budget, seed, exponents);
        StabilityRow row;
        row.radius = r;
        row.seminorm = est.seminorm;
        if (!rows.empty()) {
            row.ratio = rows.back().seminorm > 0.0 ? est.seminorm / rows.back().seminorm : 1.0;
            row.flagged = row.ratio > flag_ratio;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace nilreg
