#include "nilreg/group.hpp"

#include <stdexcept>

namespace nilreg {

Unitriangular::Unitriangular(int d) : d_(d), e_(size_t(d + 1) * size_t(d + 1), 0) {
    if (d < 1) throw std::invalid_argument("Unitriangular: d must be >= 1");
    for (int i = 1; i <= d + 1; ++i) at(i, i) = 1;
}

Unitriangular Unitriangular::elementary(int d, int i, int j) {
    if (!(1 <= j && j < i && i <= d + 1))
        throw std::invalid_argument("elementary: invalid generator f_{" + std::to_string(i) +
                                    "," + std::to_string(j) + "} for d=" + std::to_string(d));
    Unitriangular m(d);
    m.at(i, j) = 1;
    return m;
}

const Int& Unitriangular::at(int i, int j) const {
    return e_[size_t(i - 1) * size_t(d_ + 1) + size_t(j - 1)];
}

Int& Unitriangular::at(int i, int j) {
    return e_[size_t(i - 1) * size_t(d_ + 1) + size_t(j - 1)];
}

Unitriangular Unitriangular::operator*(const Unitriangular& rhs) const {
    if (d_ != rhs.d_) throw std::invalid_argument("Unitriangular: dimension mismatch");
    Unitriangular out(d_);
    const int n = d_ + 1;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= i; ++j) {
            Int acc = 0;
            // lower-triangular: only k between j and i contributes
            for (int k = j; k <= i; ++k) acc += at(i, k) * rhs.at(k, j);
            out.at(i, j) = acc;
        }
    }
    return out;
}

Unitriangular Unitriangular::inverse() const {
    // forward substitution on L X = I, column by column
    Unitriangular out(d_);
    const int n = d_ + 1;
    for (int j = 1; j <= n; ++j) {
        for (int i = j + 1; i <= n; ++i) {
            Int acc = 0;
            for (int k = j; k < i; ++k) acc += at(i, k) * out.at(k, j);
            out.at(i, j) = -acc;
        }
    }
    return out;
}

bool Unitriangular::is_identity() const {
    const int n = d_ + 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j < i; ++j)
            if (at(i, j) != 0) return false;
    return true;
}

bool Unitriangular::in_star_subgroup() const {
    const int n = d_ + 1;
    for (int j = 1; j < n; ++j)
        if (at(n, j) != 0) return false;
    return true;
}

IndexPoint act_on_index(const Unitriangular& m, const IndexPoint& v) {
    if (int(v.size()) != m.dim())
        throw std::invalid_argument("act_on_index: dimension mismatch");
    const int n = m.dim() + 1;
    IndexPoint out(size_t(m.dim()));
    for (int i = 2; i <= n; ++i) {
        Int acc = m.at(i, 1); // column of the affine coordinate 1
        for (int k = 2; k <= i; ++k) acc += m.at(i, k) * v[size_t(k - 2)];
        out[size_t(i - 2)] = acc;
    }
    return out;
}

IndexPoint generator_index_rule(int d, int j, const IndexPoint& v) {
    if (!(1 <= j && j <= d)) throw std::invalid_argument("generator_index_rule: j out of range");
    if (int(v.size()) != d)
        throw std::invalid_argument("generator_index_rule: dimension mismatch");
    IndexPoint out = v;
    if (j == 1)
        out[0] += 1;
    else
        out[size_t(j - 1)] += v[size_t(j - 2)];
    return out;
}

IndexPoint evaluate_word(const GeneratorWord& w, IndexPoint v) {
    if (int(v.size()) != w.d) throw std::invalid_argument("evaluate_word: dimension mismatch");
    for (const auto& l : w.letters) {
        Unitriangular g = Unitriangular::elementary(w.d, l.i, l.j);
        if (l.sign < 0) g = g.inverse();
        v = act_on_index(g, v);
    }
    return v;
}

Unitriangular word_matrix(const GeneratorWord& w) {
    Unitriangular acc(w.d);
    for (const auto& l : w.letters) {
        Unitriangular g = Unitriangular::elementary(w.d, l.i, l.j);
        if (l.sign < 0) g = g.inverse();
        acc = g * acc; // letters act left-to-right, so later letters multiply on the left
    }
    return acc;
}

Int r_binomial(int k, const Int& i) {
    if (k < 0) throw std::invalid_argument("r_binomial: k must be >= 0");
    if (k == 0) return 1;
    Int num = 1;
    for (int t = 0; t < k; ++t) num *= i + t;
    Int fact = 1;
    for (int t = 2; t <= k; ++t) fact *= t;
    // the product of k consecutive integers is divisible by k!
    return num / fact;
}

std::string MetabelianGenerator::name() const {
    if (tag == Tag::F) return "f";
    return "g" + std::to_string(k);
}

IndexPoint metabelian_index_action(const MetabelianGenerator& gen, const IndexPoint& v,
                                   int sign) {
    if (v.size() != 2) throw std::invalid_argument("metabelian_index_action: need (i, j)");
    IndexPoint out = v;
    if (gen.tag == MetabelianGenerator::Tag::F)
        out[0] += sign;
    else
        out[1] += sign * r_binomial(gen.k, v[0]);
    return out;
}

} // namespace nilreg
