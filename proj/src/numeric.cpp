#include "nilreg/numeric.hpp"

#include <cassert>
#include <stdexcept>

namespace nilreg {

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const size_t n = xs.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

double tail_integral_at_zero(double p) {
    assert(p > 1.0);
    const double pi = 3.14159265358979323846;
    return pi / (p * std::sin(pi / p));
}

namespace {

// int_0^u dt/(1+t^p) for u < 1 by the alternating series
// sum_m (-1)^m u^{mp+1}/(mp+1).
double head_series(double p, double u) {
    double up = std::pow(u, p);
    double num = u; // u^{mp+1}
    double acc = 0.0;
    double sign = 1.0;
    for (int m = 0; m < 4000; ++m) {
        double term = num / (m * p + 1.0);
        acc += sign * term;
        if (term < 1e-18 * std::abs(acc) + 1e-300) break;
        num *= up;
        sign = -sign;
    }
    return acc;
}

// G_p(u) for u > 1 by sum_m (-1)^{m+1} u^{1-mp}/(mp-1).
double tail_series(double p, double u) {
    double ump = std::pow(u, -p);
    double num = u * ump; // u^{1-mp}
    double acc = 0.0;
    double sign = 1.0;
    for (int m = 1; m < 4000; ++m) {
        double term = num / (m * p - 1.0);
        acc += sign * term;
        if (term < 1e-18 * std::abs(acc) + 1e-300) break;
        num *= ump;
        sign = -sign;
    }
    return acc;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace

double tail_integral(double p, double u) {
    if (!(p > 1.0)) throw std::invalid_argument("tail_integral: p must exceed 1");
    if (u <= 0.0) return tail_integral_at_zero(p);
    if (u <= 0.96) return tail_integral_at_zero(p) - head_series(p, u);
    if (u >= 1.04) return tail_series(p, u);
    // narrow window around 1: bridge to the series at 1.1
    auto f = [p](double t) { return 1.0 / (1.0 + std::pow(t, p)); };
    return simpson(f, u, 1.1, 64) + tail_series(p, 1.1);
}

double lattice_fiber_sum(double S, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("lattice_fiber_sum: p must exceed 1");
    if (!(S >= 0.0)) throw std::invalid_argument("lattice_fiber_sum: S must be nonnegative");
    const double D = S + 1.0;
    const int K = 64;
    double acc = 1.0 / D; // k = 0
    for (int k = 1; k < K; ++k) acc += 2.0 / (D + std::pow(double(k), p));
    // tail 2 * sum_{k >= K}: integral + f(K)/2 - f'(K)/12
    const double sigma = std::pow(D, 1.0 / p);
    const double integral = std::pow(D, 1.0 / p - 1.0) * tail_integral(p, double(K) / sigma);
    const double Kp = std::pow(double(K), p);
    const double fK = 1.0 / (D + Kp);
    const double dfK = -p * (Kp / double(K)) * fK * fK;
    acc += 2.0 * (integral + fK / 2.0 - dfK / 12.0);
    return acc;
}

double lattice_fiber_tail(double S, double p, int64_t from) {
    if (from <= 0) {
        // split off the mirror image of the positive side
        return lattice_fiber_sum(S, p) - lattice_fiber_tail(S, p, 1 - from);
    }
    const double D = S + 1.0;
    const int64_t K = from + 64;
    double acc = 0.0;
    for (int64_t k = from; k < K; ++k) acc += 1.0 / (D + std::pow(double(k), p));
    const double sigma = std::pow(D, 1.0 / p);
    const double integral = std::pow(D, 1.0 / p - 1.0) * tail_integral(p, double(K) / sigma);
    const double Kp = std::pow(double(K), p);
    const double fK = 1.0 / (D + Kp);
    const double dfK = -p * (Kp / double(K)) * fK * fK;
    return acc + integral + fK / 2.0 - dfK / 12.0;
}

double euler_maclaurin_tail(const std::function<double(double)>& g, double start, int nodes) {
    // integral_{start}^inf g on a logarithmic grid: x = start e^v resolves
    // scale transitions that a uniform grid in 1/x misses entirely
    auto sub = [&](double v) {
        const double x = start * std::exp(v);
        return g(x) * x;
    };
    const double block = 4.0;
    double integral = 0.0;
    for (int b = 0; b < 96; ++b) {
        const double piece = simpson(sub, b * block, (b + 1) * block, nodes);
        integral += piece;
        if (b >= 2 && std::abs(piece) < 1e-14 * std::abs(integral) + 1e-300) break;
    }
    const double h = std::max(0.5, 1e-3 * start);
    const double dg = (g(start + h) - g(start - h)) / (2.0 * h);
    return integral + g(start) / 2.0 - dg / 12.0;
}

} // namespace nilreg
