#include "estimator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "dataio.hpp"
#include "prng.hpp"

namespace bbmh {

CorrectionTerms correction_terms(const PairProfile& profile, uint32_t b) {
    profile.validate();
    if (b < 1 || b > 32) fail(Errc::InvalidArgument, "b must be in 1..32");
    const double r1 = profile.r1(), r2 = profile.r2();
    const double m = std::ldexp(1.0, int(b));  // 2^b
    // (1-r)^(2^b) via expm1/log1p so the sparse limit r -> 0 stays exact
    auto a_term = [m](double r) {
        if (r >= 1.0) return 0.0;
        const double pow_m = std::exp(m * std::log1p(-r));
        const double denom = -std::expm1(m * std::log1p(-r));  // 1 - (1-r)^2^b
        return r * pow_m / (1.0 - r) / denom;
    };
    const double A1 = a_term(r1);
    const double A2 = a_term(r2);
    const double sum = r1 + r2;
    return {A1 * r2 / sum + A2 * r1 / sum, A1 * r1 / sum + A2 * r2 / sum};
}

double theoretical_variance(const PairProfile& profile, uint32_t b, uint32_t k) {
    if (k < 1) fail(Errc::InvalidArgument, "k must be >= 1");
    const CorrectionTerms c = correction_terms(profile, b);
    const double pb = c.c1b + (1.0 - c.c2b) * profile.resemblance();
    return pb * (1.0 - pb) / (double(k) * (1.0 - c.c2b) * (1.0 - c.c2b));
}

double full_minima_variance(const PairProfile& profile, uint32_t k) {
    profile.validate();
    const double r = profile.resemblance();
    return r * (1.0 - r) / double(k);
}

double estimate_full(std::span<const uint64_t> min1, std::span<const uint64_t> min2) {
    if (min1.size() != min2.size() || min1.empty())
        fail(Errc::InvalidArgument, "minima vectors must have equal positive length");
    size_t matches = 0;
    for (size_t j = 0; j < min1.size(); ++j) matches += min1[j] == min2[j];
    return double(matches) / double(min1.size());
}

ResemblanceEstimate estimate_bbit(const uint8_t* codes1, const uint8_t* codes2, uint32_t k,
                                  uint32_t b, const PairProfile& profile) {
    const CorrectionTerms c = correction_terms(profile, b);
    size_t matches = 0;
    for (uint32_t j = 0; j < k; ++j) matches += get_code(codes1, j, b) == get_code(codes2, j, b);

    ResemblanceEstimate est;
    est.k = k;
    est.b = b;
    est.c1b = c.c1b;
    est.c2b = c.c2b;
    est.p_hat = double(matches) / double(k);
    est.r_raw = (est.p_hat - c.c1b) / (1.0 - c.c2b);
    est.r_hat = std::clamp(est.r_raw, 0.0, 1.0);
    est.var_theory = theoretical_variance(profile, b, k);
    return est;
}

namespace {

void check_headers(const SketchHeader& h1, const SketchHeader& h2, bool need_b) {
    if (h1.scheme != h2.scheme || h1.k != h2.k || h1.dim != h2.dim || h1.seed != h2.seed)
        fail(Errc::HeaderMismatch, "sketches come from different families");
    if (need_b && h1.b != h2.b) fail(Errc::HeaderMismatch, "sketches have different b");
}

void check_flags(const SketchRecord& r1, const SketchRecord& r2) {
    if (r1.empty_set() || r2.empty_set())
        fail(Errc::DegenerateProfile, "resemblance undefined for an empty set");
}

}  // namespace

double estimate_full(const SketchHeader& h1, const SketchRecord& r1, const SketchHeader& h2,
                     const SketchRecord& r2) {
    check_headers(h1, h2, false);
    check_flags(r1, r2);
    if (r1.minima.empty() || r2.minima.empty())
        fail(Errc::MissingMinima, "full minima not available (no .min64 file)");
    return estimate_full(std::span(r1.minima), std::span(r2.minima));
}

ResemblanceEstimate estimate_bbit(const SketchHeader& h1, const SketchRecord& r1,
                                  const SketchHeader& h2, const SketchRecord& r2,
                                  const PairProfile& profile) {
    check_headers(h1, h2, true);
    check_flags(r1, r2);
    return estimate_bbit(r1.codes.data(), r2.codes.data(), h1.k, h1.b, profile);
}

// ---- MSE simulation harness ----------------------------------------------

namespace {

// Uniform random injection union -> {0..dim-1} drawn element by element
// (virtual-urn Fisher-Yates); O(1) per draw independent of density.
class UrnSampler {
public:
    UrnSampler(uint64_t dim, uint64_t seed, size_t expect) : dim_(dim), rng_(seed) {
        urn_.reserve(expect * 2);
    }

    uint64_t draw() {
        uint64_t i = used_ + rng_.next_below(dim_ - used_);
        uint64_t vi = get(i);
        urn_[i] = get(used_);
        ++used_;
        return vi;
    }

private:
    uint64_t get(uint64_t i) const {
        auto it = urn_.find(i);
        return it == urn_.end() ? i : it->second;
    }

    uint64_t dim_;
    uint64_t used_ = 0;
    SplitMix64 rng_;
    std::unordered_map<uint64_t, uint64_t> urn_;
};

struct UnionLayout {
    std::vector<uint32_t> members;  // sorted union of S1 and S2
    std::vector<uint8_t> side;      // 1 = S1 only, 2 = S2 only, 3 = both
};

UnionLayout union_layout(const FeatureSet& s1, const FeatureSet& s2) {
    UnionLayout u;
    size_t i = 0, j = 0;
    while (i < s1.indices.size() || j < s2.indices.size()) {
        uint32_t v1 = i < s1.indices.size() ? s1.indices[i] : UINT32_MAX;
        uint32_t v2 = j < s2.indices.size() ? s2.indices[j] : UINT32_MAX;
        if (v1 < v2) {
            u.members.push_back(v1);
            u.side.push_back(1);
            ++i;
        } else if (v2 < v1) {
            u.members.push_back(v2);
            u.side.push_back(2);
            ++j;
        } else {
            u.members.push_back(v1);
            u.side.push_back(3);
            ++i;
            ++j;
        }
    }
    return u;
}

// minima of one mapping j over both sets
struct MinPair {
    uint64_t z1, z2;
};

MinPair perm_minima(const UnionLayout& u, uint64_t dim, uint64_t seed) {
    UrnSampler urn(dim, seed, u.members.size());
    uint64_t z1 = UINT64_MAX, z2 = UINT64_MAX;
    for (uint8_t side : u.side) {
        uint64_t v = urn.draw();
        if ((side & 1) && v < z1) z1 = v;
        if ((side & 2) && v < z2) z2 = v;
    }
    return {z1, z2};
}

MinPair family_minima(const HashFamily& fam, uint32_t j, const UnionLayout& u) {
    uint64_t z1 = UINT64_MAX, z2 = UINT64_MAX;
    for (size_t i = 0; i < u.members.size(); ++i) {
        const uint64_t v = fam.map(j, u.members[i]);
        const uint8_t side = u.side[i];
        if ((side & 1) && v < z1) z1 = v;
        if ((side & 2) && v < z2) z2 = v;
    }
    return {z1, z2};
}

}  // namespace

std::vector<MseRow> mse_experiment(const MseConfig& cfg) {
    PairProfile profile{cfg.f1, cfg.f2, cfg.a, cfg.dim};
    profile.validate();
    if (cfg.reps < 1) fail(Errc::InvalidArgument, "reps must be >= 1");
    if (cfg.b_list.empty() || cfg.k_list.empty())
        fail(Errc::InvalidArgument, "b and k lists must be non-empty");
    for (uint32_t k : cfg.k_list)
        if (k < 1) fail(Errc::InvalidArgument, "k must be >= 1");

    const auto [s1, s2] = synth_pair(cfg.f1, cfg.f2, cfg.a, cfg.dim, cfg.seed);
    const UnionLayout uni = union_layout(s1, s2);
    const uint32_t kmax = *std::max_element(cfg.k_list.begin(), cfg.k_list.end());
    const double R = profile.resemblance();

    const size_t cells = cfg.b_list.size() * cfg.k_list.size();
    std::vector<double> err(cfg.reps * cells);

    auto run_rep = [&](uint64_t rep) {
        const uint64_t rep_seed = keyed_u64(cfg.seed, rngtag::kMseRep, rep, 0);
        std::vector<MinPair> mins(kmax);
        if (cfg.scheme == HashScheme::Permutation) {
            // sampled directly on the union; a full table would not fit for
            // large dim and only the restriction to the union matters
            for (uint32_t j = 0; j < kmax; ++j)
                mins[j] = perm_minima(uni, cfg.dim, keyed_u64(rep_seed, rngtag::kPermutation, j, 1));
        } else {
            HashFamily fam = HashFamily::build(cfg.scheme, cfg.dim, kmax, rep_seed);
            for (uint32_t j = 0; j < kmax; ++j) mins[j] = family_minima(fam, j, uni);
        }

        size_t cell = 0;
        for (uint32_t b : cfg.b_list) {
            const uint64_t mask = b == 0 ? UINT64_MAX : ((1ull << b) - 1);
            const CorrectionTerms c = b == 0 ? CorrectionTerms{0.0, 0.0}
                                             : correction_terms(profile, b);
            uint32_t matches = 0;
            uint32_t done = 0;
            for (uint32_t k : cfg.k_list) {
                for (uint32_t j = done; j < k; ++j)
                    matches += (mins[j].z1 & mask) == (mins[j].z2 & mask);
                done = k;
                const double phat = double(matches) / double(k);
                const double rhat =
                    std::clamp((phat - c.c1b) / (1.0 - c.c2b), 0.0, 1.0);
                err[rep * cells + cell] = rhat - R;
                ++cell;
            }
        }
    };

    const unsigned threads = std::max(1u, cfg.threads);
    if (threads == 1) {
        for (uint64_t rep = 0; rep < cfg.reps; ++rep) run_rep(rep);
    } else {
        std::vector<std::thread> pool;
        std::atomic<uint64_t> next{0};
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (uint64_t rep; (rep = next.fetch_add(1)) < cfg.reps;) run_rep(rep);
            });
        }
        for (auto& t : pool) t.join();
    }

    // sequential reduction in rep order keeps results thread-count invariant
    std::vector<MseRow> rows(cells);
    size_t cell = 0;
    for (uint32_t b : cfg.b_list) {
        for (uint32_t k : cfg.k_list) {
            double sum = 0, sum2 = 0;
            for (uint64_t rep = 0; rep < cfg.reps; ++rep) {
                const double e = err[rep * cells + cell];
                sum += e;
                sum2 += e * e;
            }
            MseRow& row = rows[cell];
            row.b = b;
            row.k = k;
            row.reps = cfg.reps;
            row.mse = sum2 / double(cfg.reps);
            row.bias = sum / double(cfg.reps);
            row.var_theory = b == 0 ? full_minima_variance(profile, k)
                                    : theoretical_variance(profile, b, k);
            ++cell;
        }
    }
    return rows;
}

void write_mse_table(const std::vector<MseRow>& rows, const MseConfig& cfg, FILE* out) {
    std::fprintf(out, "# bbmh-mse v1\n");
    std::fprintf(out, "b\tk\treps\tmse\tbias\tvar_theory\tscheme\tD\n");
    for (const MseRow& r : rows) {
        std::fprintf(out, "%" PRIu32 "\t%" PRIu32 "\t%" PRIu64 "\t%.9e\t%.9e\t%.9e\t%s\t%" PRIu64
                          "\n",
                     r.b, r.k, r.reps, r.mse, r.bias, r.var_theory, scheme_name(cfg.scheme),
                     cfg.dim);
    }
}

std::span<const NamedProfile> word_pair_profiles() {
    static constexpr NamedProfile kProfiles[] = {
        {"kong-hong", 948, 940, 0.925},
        {"rights-reserved", 12234, 11272, 0.877},
        {"of-and", 37339, 36289, 0.771},
        {"gambia-kiribati", 206, 186, 0.712},
        {"san-francisco", 3194, 1651, 0.476},
        {"credit-card", 2999, 2697, 0.285},
        {"time-job", 37339, 36289, 0.128},
        {"low-pay", 2936, 2828, 0.112},
        {"a-test", 39063, 2278, 0.052},
    };
    return kProfiles;
}

const NamedProfile* find_word_pair_profile(const std::string& name) {
    for (const NamedProfile& p : word_pair_profiles())
        if (name == p.name) return &p;
    return nullptr;
}

}  // namespace bbmh
