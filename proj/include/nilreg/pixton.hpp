#pragma once

#include <cstdint>
#include <utility>

namespace nilreg {

// Compactly modified linear vector field: xi(x) = x on [0, 1/8], a C^2
// descent built from cubic smoothsteps on [1/8, 1/2], zero on [1/2, 1].
// |D xi| <= 1 everywhere; the slope profile bottoms out at -0.8.
struct VectorFieldXi {
    static constexpr double delta = 0.125;
    static constexpr double support_end = 0.5;

    double xi(double x) const;
    double dxi(double x) const;
    double d2xi(double x) const;

    // grid maximum of |D2 xi| plus a Lipschitz slack term
    double certified_m() const;
};

const VectorFieldXi& default_xi();

struct FlowPoint {
    double value = 0.0;
    double deriv = 0.0; // D psi_t at the starting point
};

// Flow of xi at time t from x in [0,1], with the variational equation
// integrated alongside; exact e^t x fast path while the trajectory stays
// inside the linear zone.
FlowPoint psi(double t, double x, const VectorFieldXi& field = default_xi());

// phi_{a',a}^{b',b}(x) = b psi_{log(b'a/a'b)}(x/a), from [0,a] onto [0,b].
struct PixtonMap {
    double a_neg = 0.0, a_pos = 0.0; // a' < 0 < a
    double b_neg = 0.0, b_pos = 0.0; // b' < 0 < b
    double w = 0.0, w_prime = 0.0;   // translation anchors
    const VectorFieldXi* field = nullptr;

    PixtonMap(double a_neg, double a_pos, double b_neg, double b_pos, double w = 0.0,
              double w_prime = 0.0, const VectorFieldXi& f = default_xi());

    double time() const; // log(b'a/(a'b))

    // x in [w, w+a]; returns (value in [w', w'+b], derivative)
    FlowPoint operator()(double x) const;

    PixtonMap inverse() const;
};

// sup over an n-point grid of |phi_{b',b}^{c',c} o phi_{a',a}^{b',b} - phi_{a',a}^{c',c}|
double check_cocycle(double a_neg, double a_pos, double b_neg, double b_pos, double c_neg,
                     double c_pos, int grid = 256);

struct BoundReport {
    bool comparable = false; // max <= 2 min over {a, -a', b, -b'}
    double t = 0.0;
    double dos_excess = 0.0; // max over grid of |log Dpsi_t| - |t|
    // flow-form bound, valid in both orientations:
    // max of |D log Dphi| - (M/a)(e^{|t|} - 1)
    double tres_excess = 0.0;
    // printed form (M/a)|b'a/(a'b) - 1|; coincides with the flow form for
    // t >= 0 and is too small by up to e^{|t|} for t < 0, so it is the
    // check to use after orienting the map so that t >= 0
    double tres_excess_literal = 0.0;
    double tres_excess_at = 0.0;
    bool tres_checked = false; // false when comparability fails
};

// Grid check of |log Dpsi_t| <= |t| and, under the comparability
// hypothesis, of the log-derivative bound with the certified M.
BoundReport check_bounds(double a_neg, double a_pos, double b_neg, double b_pos,
                         int grid = 1024);

} // namespace nilreg
