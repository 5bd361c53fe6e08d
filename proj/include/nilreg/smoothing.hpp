#pragma once

#include "nilreg/group.hpp"
#include "nilreg/interval.hpp"
#include "nilreg/pixton.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nilreg {

using LatticeMap = std::function<std::vector<int64_t>(const std::vector<int64_t>&)>;

// One generator of the smoothed action: the index-level permutation of the
// interval family realized piecewise by Pixton maps (each interval and its
// left neighbor onto the image pair).
class AssembledMap {
public:
    AssembledMap(std::string name, std::shared_ptr<const IntervalFamily> family,
                 LatticeMap forward, LatticeMap backward);

    const std::string& name() const { return name_; }
    const IntervalFamily& family() const { return *family_; }
    const std::vector<char>& mask() const { return mask_; } // per flat index
    int64_t masked_count() const { return masked_count_; }

    std::vector<int64_t> map_index(const std::vector<int64_t>& v) const { return fwd_(v); }
    std::vector<int64_t> unmap_index(const std::vector<int64_t>& v) const { return bwd_(v); }

    bool in_domain(double x) const;         // inside a masked source interval
    bool in_domain_index(int64_t flat) const { return mask_[size_t(flat)] != 0; }

    struct Eval {
        double y = 0.0;
        double df = 0.0;
    };
    Eval operator()(double x) const;
    Eval inverse_at(double y) const; // defined on images of masked intervals

    // the Pixton piece over the source interval with the given flat index
    PixtonMap piece(int64_t flat) const;

private:
    std::string name_;
    std::shared_ptr<const IntervalFamily> family_;
    LatticeMap fwd_, bwd_;
    std::vector<char> mask_;
    std::vector<char> image_mask_; // flat target indices covered by the map
    int64_t masked_count_ = 0;
};

// f_j := f_{j+1,j} acting on a Theorem-B family
AssembledMap assemble_generator_b(const LengthSchemeB& s,
                                  std::shared_ptr<const IntervalFamily> family, int j);

// f, g_0..g_d acting on a Theorem-C family
AssembledMap assemble_generator_c(const LengthSchemeC& s,
                                  std::shared_ptr<const IntervalFamily> family,
                                  const MetabelianGenerator& gen);

// ---------------------------------------------------------------------------
// Hoelder seminorm estimation
// ---------------------------------------------------------------------------

struct HolderStratum {
    std::string name;
    uint64_t pairs = 0;
    double max_quotient = 0.0;
    std::array<double, 2> witness{0.0, 0.0};
    std::array<int64_t, 2> witness_index{0, 0}; // flat indices of the pair's intervals
};

struct HolderEstimate {
    double alpha = 0.0;
    double seminorm = 0.0; // max over strata
    std::vector<HolderStratum> strata;

    const HolderStratum* stratum(const std::string& name) const;
};

// Stratified sampling of |log Df(x) - log Df(y)| / |x-y|^alpha: pairs within
// one interval, same-fiber pairs split by the index regimes (a)-(d), and
// cross-fiber pairs. `exponents` enables the regime split; without it all
// same-fiber pairs land in one stratum.
HolderEstimate holder_seminorm(const AssembledMap& m, double alpha, uint64_t pair_budget,
                               uint64_t seed, const std::vector<double>* exponents = nullptr);

// ---------------------------------------------------------------------------
// relations
// ---------------------------------------------------------------------------

struct MapWord {
    // (map name, sign), applied left to right
    std::vector<std::pair<std::string, int>> letters;
    static MapWord commutator(const std::string& a, const std::string& b) {
        return MapWord{{{b, -1}, {a, -1}, {b, 1}, {a, 1}}}; // a b a^-1 b^-1, b first
    }
};

struct RelationReport {
    std::string relation;
    bool index_ok = true;
    std::vector<int64_t> index_witness;
    uint64_t index_points = 0;
    double sup_pointwise = 0.0;
    uint64_t pointwise_samples = 0; // samples whose full composition chain stayed masked
};

// checks lhs == rhs (i) exactly at index level over the box |i_c| <= range,
// (ii) pointwise on sampled masked points
RelationReport verify_relation(const std::map<std::string, const AssembledMap*>& maps,
                               const MapWord& lhs, const MapWord& rhs, int64_t index_range,
                               uint64_t samples, uint64_t seed, const std::string& label);

// ---------------------------------------------------------------------------
// truncation stability
// ---------------------------------------------------------------------------

struct StabilityRow {
    int64_t radius = 0;
    double seminorm = 0.0;
    double ratio = 1.0; // to the previous row
    bool flagged = false;
};

std::vector<StabilityRow> stability_report(
    const std::function<AssembledMap(int64_t)>& builder, const std::vector<int64_t>& radii,
    double alpha, uint64_t pair_budget, uint64_t seed,
    const std::vector<double>* exponents = nullptr, double flag_ratio = 1.5);

} // namespace nilreg
