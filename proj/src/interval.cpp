#include "nilreg/interval.hpp"

#include "nilreg/numeric.hpp"

#include <limits>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nilreg {

std::vector<std::string> validate_b(const LengthSchemeB& s) {
    std::vector<std::string> bad;
    if (s.d < 2 || int(s.p.size()) != s.d) return {"i_B"};
    const auto& p = s.p;
    const int d = s.d;
    // the concrete choice meets iii_B and iv_B with equality, so the
    // non-strict comparisons get a few ulps of slack
    const double tol = 1.0 + 64.0 * std::numeric_limits<double>::epsilon();
    bool ordered = p[size_t(d - 1)] > 1.0;
    for (int j = 0; j + 1 < d; ++j) ordered = ordered && p[size_t(j)] > p[size_t(j + 1)];
    if (!ordered) bad.push_back("i_B");
    double inv = 0.0;
    for (double v : p) inv += 1.0 / v;
    if (!(inv < 1.0)) bad.push_back("ii_B");
    const double pd = p[size_t(d - 1)];
    if (!(s.alpha <= tol * (pd / ((pd - 1.0) * p[0])))) bad.push_back("iii_B");
    bool iv = true;
    for (int j = 2; j < d; ++j)
        iv = iv &&
             s.alpha <= tol * (pd / (pd - 1.0)) * (1.0 / p[size_t(j - 1)] - 1.0 / p[size_t(j - 2)]);
    if (!iv) bad.push_back("iv_B");
    if (!(s.alpha <= tol * (1.0 / pd - 1.0 / p[size_t(d - 2)]))) bad.push_back("v_B");
    return bad;
}

LengthSchemeB choose_exponents_b(int d, double alpha) {
    if (d < 2) throw std::invalid_argument("choose_exponents_b: d must be >= 2");
    if (!(alpha > 0.0) || !(alpha < 2.0 / (double(d) * double(d - 1))))
        throw InfeasibleExponent("choose_exponents_b: alpha must lie in (0, 2/(d(d-1)))",
                                 {"ii_B"});
    LengthSchemeB s;
    s.d = d;
    s.alpha = alpha;
    s.p.resize(size_t(d));
    for (int j = 1; j < d; ++j) s.p[size_t(j - 1)] = 5.0 / (double(j) * alpha);
    s.p[size_t(d - 1)] = 1.25;
    auto bad = validate_b(s);
    if (!bad.empty())
        throw InfeasibleExponent("choose_exponents_b: concrete choice fails validation", bad);
    return s;
}

double length_b(const LengthSchemeB& s, const std::vector<int64_t>& v) {
    if (int(v.size()) != s.d) throw std::invalid_argument("length_b: index length mismatch");
    double den = 1.0;
    for (int j = 0; j < s.d; ++j)
        den += std::pow(std::abs(double(v[size_t(j)])), s.p[size_t(j)]);
    return 1.0 / den;
}

std::vector<std::string> validate_c(const LengthSchemeC& s) {
    std::vector<std::string> bad;
    if (!(1.0 < s.q && s.q < 2.0)) bad.push_back("i_C");
    if (!(s.alpha < 2.0 - s.q)) bad.push_back("ii_C");
    if (!(s.alpha < s.q / (2.0 * s.q - 1.0))) bad.push_back("iii_C");
    if (!(s.alpha < 1.0 / s.q)) bad.push_back("iv_C");
    if (!(s.p > double(s.d) * s.q)) bad.push_back("v_C");
    if (!(s.alpha <= 1.0 / s.q - double(s.d) / s.p)) bad.push_back("vi_C");
    if (!(s.alpha < 1.0 / (s.q - 1.0) - double(s.d) * s.q / (2.0 * s.q - 1.0)))
        bad.push_back("vii_C");
    return bad;
}

LengthSchemeC choose_exponents_c(int d, double alpha) {
    if (d < 1) throw std::invalid_argument("choose_exponents_c: d must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InfeasibleExponent("choose_exponents_c: alpha must lie in (0,1)", {"ii_C"});
    double offset = 0.5;
    for (int iter = 0; iter < 40; ++iter, offset /= 2.0) {
        LengthSchemeC s;
        s.d = d;
        s.alpha = alpha;
        s.q = 1.0 + offset;
        s.p = (2.0 * s.q - 1.0) / (s.q - 1.0);
        if (validate_c(s).empty()) return s;
    }
    throw InfeasibleExponent("choose_exponents_c: no feasible q after 40 halvings (bug signal)");
}

double length_c(const LengthSchemeC& s, int64_t i, int64_t j) {
    return 1.0 / (std::pow(std::abs(double(i)), s.p) + std::pow(std::abs(double(j)), s.q) + 1.0);
}

bool IntervalFamily::in_box(const std::vector<int64_t>& idx) const {
    if (int(idx.size()) != dims) return false;
    for (int c = 0; c < dims; ++c)
        if (idx[size_t(c)] < -radius[size_t(c)] || idx[size_t(c)] > radius[size_t(c)])
            return false;
    return true;
}

int64_t IntervalFamily::flatten(const std::vector<int64_t>& idx) const {
    int64_t flat = 0;
    for (int c = 0; c < dims; ++c) {
        const int64_t width = 2 * radius[size_t(c)] + 1;
        flat = flat * width + (idx[size_t(c)] + radius[size_t(c)]);
    }
    return flat;
}

std::vector<int64_t> IntervalFamily::unflatten(int64_t flat) const {
    std::vector<int64_t> idx(size_t(dims), 0);
    for (int c = dims - 1; c >= 0; --c) {
        const int64_t width = 2 * radius[size_t(c)] + 1;
        idx[size_t(c)] = flat % width - radius[size_t(c)];
        flat /= width;
    }
    return idx;
}

double IntervalFamily::predecessor_length(const std::vector<int64_t>& idx) const {
    auto prev = idx;
    prev.back() -= 1;
    if (in_box(prev)) return lengths[size_t(flatten(prev))];
    return formula(prev) / scale;
}

int64_t IntervalFamily::locate(double x) const {
    auto it = std::upper_bound(lefts.begin(), lefts.end(), x);
    if (it == lefts.begin()) return 0;
    return int64_t(it - lefts.begin()) - 1;
}

IntervalFamily build_family(std::function<double(const std::vector<int64_t>&)> length,
                            std::vector<int64_t> radius, bool normalize) {
    if (radius.empty()) throw std::invalid_argument("build_family: empty box");
    for (int64_t r : radius)
        if (r < 0) throw std::invalid_argument("build_family: negative radius");
    IntervalFamily f;
    f.dims = int(radius.size());
    f.radius = std::move(radius);
    f.formula = std::move(length);
    int64_t count = 1;
    for (int64_t r : f.radius) count *= 2 * r + 1;
    f.lengths.resize(size_t(count));
    f.lefts.resize(size_t(count));

    std::vector<int64_t> idx(size_t(f.dims));
    CompensatedSum pos;
    for (int64_t flat = 0; flat < count; ++flat) {
        int64_t rem = flat;
        for (int c = f.dims - 1; c >= 0; --c) {
            const int64_t width = 2 * f.radius[size_t(c)] + 1;
            idx[size_t(c)] = rem % width - f.radius[size_t(c)];
            rem /= width;
        }
        const double len = f.formula(idx);
        if (!(len > 0.0)) throw std::domain_error("build_family: nonpositive length");
        f.lefts[size_t(flat)] = pos.value();
        f.lengths[size_t(flat)] = len;
        pos.add(len);
    }
    f.total = pos.value();
    if (normalize) {
        f.normalized = true;
        f.scale = f.total;
        for (auto& v : f.lengths) v /= f.scale;
        for (auto& v : f.lefts) v /= f.scale;
    }
    return f;
}

IntervalFamily build_family_b(const LengthSchemeB& s, int64_t radius, bool normalize) {
    return build_family([s](const std::vector<int64_t>& v) { return length_b(s, v); },
                        std::vector<int64_t>(size_t(s.d), radius), normalize);
}

IntervalFamily build_family_c(const LengthSchemeC& s, int64_t radius_i, int64_t radius_j,
                              bool normalize) {
    return build_family(
        [s](const std::vector<int64_t>& v) { return length_c(s, v[0], v[1]); },
        {radius_i, radius_j}, normalize);
}

std::string to_columnar_text(const IntervalFamily& f) {
    std::ostringstream os;
    os.precision(17);
    for (int64_t flat = 0; flat < f.count(); ++flat) {
        auto idx = f.unflatten(flat);
        for (size_t c = 0; c < idx.size(); ++c) os << (c ? "," : "") << idx[c];
        os << " " << f.length(flat) << " " << f.left(flat) << " " << f.right(flat) << "\n";
    }
    return os.str();
}

} // namespace nilreg
