#ifndef BBMH_ESTIMATOR_HPP
#define BBMH_ESTIMATOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hash_family.hpp"
#include "sketch.hpp"

namespace bbmh {

// Ground-truth pair description: set sizes, intersection, universe.
struct PairProfile {
    uint64_t f1 = 0;
    uint64_t f2 = 0;
    uint64_t a = 0;  // |S1 & S2|
    uint64_t dim = 0;

    double r1() const { return double(f1) / double(dim); }
    double r2() const { return double(f2) / double(dim); }
    double resemblance() const { return double(a) / double(f1 + f2 - a); }

    void validate() const {
        if (dim == 0 || f1 > dim || f2 > dim) fail(Errc::InvalidArgument, "bad profile sizes");
        if (a > f1 || a > f2 || f1 + f2 - a > dim)
            fail(Errc::InvalidArgument, "infeasible intersection");
        if (f1 == 0 || f2 == 0)
            fail(Errc::DegenerateProfile, "resemblance undefined for empty sets");
    }
};

struct CorrectionTerms {
    double c1b = 0;
    double c2b = 0;
};

// Bias-correction terms for the b-bit collision probability
// P_b = C1b + (1 - C2b) R. In the sparse limit both approach 2^-b.
CorrectionTerms correction_terms(const PairProfile& profile, uint32_t b);

// Var(R_b) = P_b (1 - P_b) / (k (1 - C2b)^2) under full random permutations.
double theoretical_variance(const PairProfile& profile, uint32_t b, uint32_t k);

// Variance of the uncorrected full-minima estimator, R(1-R)/k.
double full_minima_variance(const PairProfile& profile, uint32_t k);

// Fraction of matching full-width minima (the unbiased estimator).
double estimate_full(std::span<const uint64_t> min1, std::span<const uint64_t> min2);

struct ResemblanceEstimate {
    double r_hat = 0;    // clamped to [0,1]
    double r_raw = 0;    // before clamping
    double p_hat = 0;    // matching-codes fraction
    double c1b = 0;
    double c2b = 0;
    double var_theory = 0;
    uint32_t k = 0;
    uint32_t b = 0;
};

ResemblanceEstimate estimate_bbit(const uint8_t* codes1, const uint8_t* codes2, uint32_t k,
                                  uint32_t b, const PairProfile& profile);

// header-checked variants over sketch records
double estimate_full(const SketchHeader& h1, const SketchRecord& r1, const SketchHeader& h2,
                     const SketchRecord& r2);
ResemblanceEstimate estimate_bbit(const SketchHeader& h1, const SketchRecord& r1,
                                  const SketchHeader& h2, const SketchRecord& r2,
                                  const PairProfile& profile);

// ---- MSE simulation harness ----------------------------------------------

struct MseConfig {
    HashScheme scheme = HashScheme::TwoU;
    uint64_t dim = 1 << 16;
    uint64_t f1 = 0, f2 = 0, a = 0;
    std::vector<uint32_t> b_list;  // 0 selects the full-minima estimator
    std::vector<uint32_t> k_list;
    uint64_t reps = 1000;
    uint64_t seed = 0;
    unsigned threads = 1;
};

struct MseRow {
    uint32_t b = 0;  // 0 = full minima
    uint32_t k = 0;
    uint64_t reps = 0;
    double mse = 0;
    double bias = 0;
    double var_theory = 0;
};

// One fixed pair with the requested profile, `reps` independent hash families;
// empirical MSE and bias of the estimator per (b, k) against theory. Results
// are bit-identical for any thread count.
std::vector<MseRow> mse_experiment(const MseConfig& cfg);

void write_mse_table(const std::vector<MseRow>& rows, const MseConfig& cfg, FILE* out);

// Named word-pair profiles (f1, f2, R) available to the CLI and tests.
struct NamedProfile {
    const char* name;
    uint64_t f1;
    uint64_t f2;
    double R;
};
std::span<const NamedProfile> word_pair_profiles();
const NamedProfile* find_word_pair_profile(const std::string& name);

}  // namespace bbmh

#endif
