#include "nilreg/pixton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nilreg {

namespace {

// slope profile over the descent zone, in the rescaled variable
// u = (x - delta)/(1/2 - delta) in [0, 1]
constexpr double kT1 = 0.3;   // end of the slope roll-off
constexpr double kSmax = 0.8; // flat descent slope magnitude
// chosen so the slope integrates to -1/3 over [0,1]:
// t1(1-smax)/2 - smax(t2-t1) - smax(1-t2)/2 = -1/3
constexpr double kT2 = (1.0 / 3.0 + kT1 * (1.0 - kSmax) / 2.0 + kSmax * kT1 - kSmax / 2.0) *
                       2.0 / kSmax;
constexpr double kWidth = VectorFieldXi::support_end - VectorFieldXi::delta;

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
double smoothstep_d(double u) { return 6.0 * u * (1.0 - u); }
double smoothstep_i(double u) { return u * u * u - u * u * u * u / 2.0; } // integral from 0

double slope(double u) {
    if (u <= kT1) return 1.0 - (1.0 + kSmax) * smoothstep(u / kT1);
    if (u <= kT2) return -kSmax;
    return -kSmax * (1.0 - smoothstep((u - kT2) / (1.0 - kT2)));
}

double slope_d(double u) {
    if (u <= kT1) return -(1.0 + kSmax) * smoothstep_d(u / kT1) / kT1;
    if (u <= kT2) return 0.0;
    return kSmax * smoothstep_d((u - kT2) / (1.0 - kT2)) / (1.0 - kT2);
}

// integral of slope from 0 to u
double slope_i(double u) {
    if (u <= kT1) return u - (1.0 + kSmax) * kT1 * smoothstep_i(u / kT1);
    const double a1 = kT1 - (1.0 + kSmax) * kT1 * smoothstep_i(1.0);
    if (u <= kT2) return a1 - kSmax * (u - kT1);
    const double a2 = a1 - kSmax * (kT2 - kT1);
    const double v = (u - kT2) / (1.0 - kT2);
    return a2 - kSmax * ((u - kT2) - (1.0 - kT2) * smoothstep_i(v));
}

} // namespace

double VectorFieldXi::xi(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("xi: x outside [0,1]");
    if (x <= delta) return x;
    if (x >= support_end) return 0.0;
    const double u = (x - delta) / kWidth;
    return std::max(0.0, delta + kWidth * slope_i(u));
}

double VectorFieldXi::dxi(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("dxi: x outside [0,1]");
    if (x <= delta) return 1.0;
    if (x >= support_end) return 0.0;
    return slope((x - delta) / kWidth);
}

double VectorFieldXi::d2xi(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("d2xi: x outside [0,1]");
    if (x <= delta || x >= support_end) return 0.0;
    return slope_d((x - delta) / kWidth) / kWidth;
}

double VectorFieldXi::certified_m() const {
    static const double m = [this] {
        const int n = 200000;
        double best = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = delta + (support_end - delta) * double(i) / double(n);
            best = std::max(best, std::abs(d2xi(std::min(x, 1.0))));
        }
        // |D3 xi| <= (1+smax) max|sigma''| / (t1^2 w) on the roll-off,
        // the largest of the three phases
        const double lip = (1.0 + kSmax) * 6.0 / (kT1 * kT1 * kWidth);
        const double h = (support_end - delta) / double(n);
        return best + lip * h / 2.0;
    }();
    return m;
}

const VectorFieldXi& default_xi() {
    static const VectorFieldXi field;
    return field;
}

FlowPoint psi(double t, double x, const VectorFieldXi& field) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("psi: x outside [0,1]");
    if (std::abs(t) > 64.0) throw std::domain_error("psi: flow time exceeds the budget");
    if (x == 0.0) return {0.0, std::exp(t)};
    if (x >= VectorFieldXi::support_end) return {x, 1.0};
    // inside the linear zone the flow is exactly e^t x
    if (std::max(x, x * std::exp(t)) <= VectorFieldXi::delta) return {x * std::exp(t), std::exp(t)};
    const int steps = std::max(8, int(std::ceil(std::abs(t) * 192.0)));
    const double h = t / double(steps);
    double y = x;
    double logd = 0.0;
    for (int s = 0; s < steps; ++s) {
        const double k1 = field.xi(y);
        const double l1 = field.dxi(y);
        const double y2 = std::clamp(y + 0.5 * h * k1, 0.0, 1.0);
        const double k2 = field.xi(y2);
        const double l2 = field.dxi(y2);
        const double y3 = std::clamp(y + 0.5 * h * k2, 0.0, 1.0);
        const double k3 = field.xi(y3);
        const double l3 = field.dxi(y3);
        const double y4 = std::clamp(y + h * k3, 0.0, 1.0);
        const double k4 = field.xi(y4);
        const double l4 = field.dxi(y4);
        y = std::clamp(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0, 1.0);
        logd += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
    return {y, std::exp(logd)};
}

PixtonMap::PixtonMap(double an, double ap, double bn, double bp, double w_, double wp_,
                     const VectorFieldXi& f)
    : a_neg(an), a_pos(ap), b_neg(bn), b_pos(bp), w(w_), w_prime(wp_), field(&f) {
    if (!(a_neg < 0.0 && 0.0 < a_pos && b_neg < 0.0 && 0.0 < b_pos))
        throw std::invalid_argument("PixtonMap: need a' < 0 < a and b' < 0 < b");
}

double PixtonMap::time() const { return std::log((b_neg * a_pos) / (a_neg * b_pos)); }

FlowPoint PixtonMap::operator()(double x) const {
    double u = (x - w) / a_pos;
    if (u < -1e-9 || u > 1.0 + 1e-9) throw std::domain_error("PixtonMap: x outside [w, w+a]");
    u = std::clamp(u, 0.0, 1.0);
    const FlowPoint fp = psi(time(), u, *field);
    return {b_pos * fp.value + w_prime, (b_pos / a_pos) * fp.deriv};
}

PixtonMap PixtonMap::inverse() const {
    return PixtonMap(b_neg, b_pos, a_neg, a_pos, w_prime, w, *field);
}

double check_cocycle(double a_neg, double a_pos, double b_neg, double b_pos, double c_neg,
                     double c_pos, int grid) {
    const PixtonMap ab(a_neg, a_pos, b_neg, b_pos);
    const PixtonMap bc(b_neg, b_pos, c_neg, c_pos);
    const PixtonMap ac(a_neg, a_pos, c_neg, c_pos);
    double sup = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const double x = a_pos * double(i) / double(grid);
        const double composed = bc(std::clamp(ab(x).value, 0.0, b_pos)).value;
        sup = std::max(sup, std::abs(composed - ac(x).value));
    }
    return sup;
}

BoundReport check_bounds(double a_neg, double a_pos, double b_neg, double b_pos, int grid) {
    BoundReport rep;
    const PixtonMap m(a_neg, a_pos, b_neg, b_pos);
    const double t = m.time();
    rep.t = t;
    const double lo = std::min(std::min(a_pos, -a_neg), std::min(b_pos, -b_neg));
    const double hi = std::max(std::max(a_pos, -a_neg), std::max(b_pos, -b_neg));
    rep.comparable = hi <= 2.0 * lo;

    double dos = -1e300;
    for (int i = 0; i <= grid; ++i) {
        const double u = double(i) / double(grid);
        dos = std::max(dos, std::abs(std::log(psi(t, u).deriv)) - std::abs(t));
    }
    rep.dos_excess = dos;

    if (rep.comparable) {
        rep.tres_checked = true;
        const double ratio = (b_neg * a_pos) / (a_neg * b_pos);
        const double M = default_xi().certified_m();
        const double rhs_flow = M / a_pos * (std::exp(std::abs(t)) - 1.0);
        const double rhs_lit = M / a_pos * std::abs(ratio - 1.0);
        const double h = a_pos / double(4 * grid);
        double tres = -1e300, tres_lit = -1e300, at = 0.0;
        for (int i = 1; i < grid; ++i) {
            const double x = a_pos * double(i) / double(grid);
            const double dplus = std::log(m(x + h).deriv);
            const double dminus = std::log(m(x - h).deriv);
            const double dlog = std::abs((dplus - dminus) / (2.0 * h));
            if (dlog - rhs_flow > tres) {
                tres = dlog - rhs_flow;
                at = x;
            }
            tres_lit = std::max(tres_lit, dlog - rhs_lit);
        }
        rep.tres_excess = tres;
        rep.tres_excess_literal = tres_lit;
        rep.tres_excess_at = at;
    }
    return rep;
}

} // namespace nilreg
