#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace nilreg {

using Int = boost::multiprecision::cpp_int;

// Lattice point of the index action, coordinates in Z.
using IndexPoint = std::vector<Int>;

// (d+1) x (d+1) lower-triangular integer matrix with unit diagonal.
// Entries are exact; products along long words grow polynomially.
class Unitriangular {
public:
    explicit Unitriangular(int d);

    // f_{i,j}: identity plus a 1 at (i, j); 1 <= j < i <= d+1.
    static Unitriangular elementary(int d, int i, int j);

    int dim() const { return d_; }
    int size() const { return d_ + 1; }

    const Int& at(int i, int j) const; // 1-based
    Int& at(int i, int j);

    Unitriangular operator*(const Unitriangular& rhs) const;
    Unitriangular inverse() const;
    bool operator==(const Unitriangular& rhs) const = default;

    bool is_identity() const;

    // member of N_{d-1}^*: last row coincides with the identity's
    bool in_star_subgroup() const;

private:
    int d_ = 0;
    std::vector<Int> e_;
};

// m applied to the invariant affine slice: m (1, v)^T = (1, w)^T.
IndexPoint act_on_index(const Unitriangular& m, const IndexPoint& v);

// Index rule of the generator f_{j+1,j} on Z^d:
// j = 1 increments coordinate 1, j >= 2 sends i_j to i_j + i_{j-1}.
IndexPoint generator_index_rule(int d, int j, const IndexPoint& v);

struct GeneratorLetter {
    int i = 0;
    int j = 0;
    int sign = 1; // +1 or -1
};

// Word in elementary generators of N_d, applied left-to-right:
// letters[0] acts first.
struct GeneratorWord {
    int d = 0;
    std::vector<GeneratorLetter> letters;

    void push(int i, int j, int sign = 1) { letters.push_back({i, j, sign}); }
    size_t size() const { return letters.size(); }
};

IndexPoint evaluate_word(const GeneratorWord& w, IndexPoint v);

// Product of the word's matrices in application order (letters[0] rightmost).
Unitriangular word_matrix(const GeneratorWord& w);

// r_0(i) = 1, r_k(i) = i(i+1)...(i+k-1)/k!, an exact integer.
Int r_binomial(int k, const Int& i);

// Generators of the metabelian family M_d: f, g_0, ..., g_d.
struct MetabelianGenerator {
    enum class Tag { F, G };
    Tag tag = Tag::F;
    int k = 0; // meaningful for G only

    static MetabelianGenerator f() { return {Tag::F, 0}; }
    static MetabelianGenerator g(int k) { return {Tag::G, k}; }
    std::string name() const;
};

// f: (i,j) -> (i+1, j); g_k: (i,j) -> (i, j + r_k(i)).
// sign = -1 applies the inverse.
IndexPoint metabelian_index_action(const MetabelianGenerator& gen, const IndexPoint& v,
                                   int sign = 1);

} // namespace nilreg
