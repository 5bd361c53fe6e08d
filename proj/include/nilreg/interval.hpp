#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nilreg {

struct InfeasibleExponent : std::runtime_error {
    std::vector<std::string> violated;
    explicit InfeasibleExponent(const std::string& what, std::vector<std::string> v = {})
        : std::runtime_error(what), violated(std::move(v)) {}
};

// Exponent vector for |I_{i_1..i_d}| = 1/(|i_1|^{p_1}+...+|i_d|^{p_d}+1).
struct LengthSchemeB {
    int d = 0;
    double alpha = 0.0;
    std::vector<double> p; // p_1..p_d
};

// Names of violated conditions among i_B..v_B; empty when the scheme is valid.
std::vector<std::string> validate_b(const LengthSchemeB& s);

// p_d = 5/4, p_j = 5/(j alpha); requires alpha < 2/(d(d-1)).
LengthSchemeB choose_exponents_b(int d, double alpha);

double length_b(const LengthSchemeB& s, const std::vector<int64_t>& v);

// q in (1,2) and p = (2q-1)/(q-1) for |I_{i,j}| = 1/(|i|^p+|j|^q+1).
struct LengthSchemeC {
    int d = 0; // nilpotence parameter of the family M_d
    double alpha = 0.0;
    double q = 0.0;
    double p = 0.0;
};

std::vector<std::string> validate_c(const LengthSchemeC& s);

// Halve the offset q-1 from 1/2 downward until i_C..vii_C all hold.
LengthSchemeC choose_exponents_c(int d, double alpha);

double length_c(const LengthSchemeC& s, int64_t i, int64_t j);

// Truncated lexicographic interval family over the box |i_j| <= radius[j].
struct IntervalFamily {
    int dims = 0;
    std::vector<int64_t> radius;
    bool normalized = false;
    double total = 0.0;     // truncated total before normalization
    double scale = 1.0;     // lengths were divided by this
    std::function<double(const std::vector<int64_t>&)> formula; // un-truncated lengths
    std::vector<double> lengths; // lexicographic (row-major) order
    std::vector<double> lefts;   // matching left endpoints

    int64_t count() const { return int64_t(lengths.size()); }
    bool in_box(const std::vector<int64_t>& idx) const;
    int64_t flatten(const std::vector<int64_t>& idx) const;
    std::vector<int64_t> unflatten(int64_t flat) const;

    double length(int64_t flat) const { return lengths[size_t(flat)]; }
    double left(int64_t flat) const { return lefts[size_t(flat)]; }
    double right(int64_t flat) const { return lefts[size_t(flat)] + lengths[size_t(flat)]; }

    // formula length of the lexicographic predecessor (last coordinate
    // decremented), defined also at the box edge
    double predecessor_length(const std::vector<int64_t>& idx) const;

    // interval containing x; clamps to the nearest interval at the ends
    int64_t locate(double x) const;
};

IntervalFamily build_family(std::function<double(const std::vector<int64_t>&)> length,
                            std::vector<int64_t> radius, bool normalize);

IntervalFamily build_family_b(const LengthSchemeB& s, int64_t radius, bool normalize);
IntervalFamily build_family_c(const LengthSchemeC& s, int64_t radius_i, int64_t radius_j,
                              bool normalize);

// columnar text: index tuple, length, left, right
std::string to_columnar_text(const IntervalFamily& f);

} // namespace nilreg
