// bbmh command-line tool: sketching, estimation, simulation, learning, and
// benchmarking over the shared-library C API.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbmh.h"

namespace {

int fail_status(const char* what, bbmh_status status) {
    const char* detail = bbmh_last_error();
    std::fprintf(stderr, "bbmh: %s: %s%s%s\n", what, bbmh_strerror(status),
                 detail && *detail ? ": " : "", detail ? detail : "");
    return 1;
}

int32_t scheme_tag(const std::string& name) {
    if (name == "perm" || name == "permutation") return BBMH_SCHEME_PERMUTATION;
    if (name == "2u") return BBMH_SCHEME_2U;
    if (name == "4u-mod") return BBMH_SCHEME_4U_MOD;
    if (name == "4u-bit" || name == "4u") return BBMH_SCHEME_4U_BIT;
    throw CLI::ValidationError("scheme", "expected one of perm, 2u, 4u-mod, 4u-bit");
}

// "a,b,c" or the 11-point sweep "a..b" (log-spaced, deduplicated)
std::vector<uint32_t> parse_k_list(const std::string& text) {
    std::vector<uint32_t> out;
    auto dots = text.find("..");
    if (dots != std::string::npos) {
        const double lo = std::stod(text.substr(0, dots));
        const double hi = std::stod(text.substr(dots + 2));
        if (lo < 1 || hi < lo) throw CLI::ValidationError("k", "bad sweep range");
        for (int i = 0; i < 11; ++i) {
            const double v = lo * std::pow(hi / lo, i / 10.0);
            const uint32_t k = uint32_t(std::llround(v));
            if (out.empty() || out.back() != k) out.push_back(k);
        }
        return out;
    }
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(uint32_t(std::stoul(text.substr(pos, comma - pos))));
        pos = comma + 1;
    }
    if (out.empty()) throw CLI::ValidationError("k", "empty list");
    return out;
}

// b tokens: integers 1..32, or M / 0 for the full-minima estimator
std::vector<uint32_t> parse_b_list(const std::string& text) {
    std::vector<uint32_t> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string tok = text.substr(pos, comma - pos);
        if (tok == "M" || tok == "m") {
            out.push_back(0);
        } else {
            const unsigned long v = std::stoul(tok);
            if (v > 32) throw CLI::ValidationError("b", "b must be in 1..32 (or M)");
            out.push_back(uint32_t(v));
        }
        pos = comma + 1;
    }
    if (out.empty()) throw CLI::ValidationError("b", "empty list");
    return out;
}

uint64_t intersection_from(double R, uint64_t f1, uint64_t f2) {
    return uint64_t(std::llround(R * double(f1 + f2) / (1.0 + R)));
}

struct ProfileArgs {
    std::string name;
    uint64_t f1 = 0, f2 = 0, a = 0;
    double R = -1;

    void add_to(CLI::App* cmd, bool with_name) {
        if (with_name)
            cmd->add_option("--profile", name,
                            "named word-pair profile (kong-hong, rights-reserved, of-and, "
                            "gambia-kiribati, san-francisco, credit-card, time-job, low-pay, "
                            "a-test)");
        cmd->add_option("--f1", f1, "size of the first set");
        cmd->add_option("--f2", f2, "size of the second set");
        cmd->add_option("--a", a, "intersection size");
        cmd->add_option("--R", R, "target resemblance (alternative to --a)");
    }

    // (f1, f2, a) after resolving --profile / --R
    void resolve() {
        static const struct {
            const char* name;
            uint64_t f1, f2;
            double R;
        } kNamed[] = {
            {"kong-hong", 948, 940, 0.925},       {"rights-reserved", 12234, 11272, 0.877},
            {"of-and", 37339, 36289, 0.771},      {"gambia-kiribati", 206, 186, 0.712},
            {"san-francisco", 3194, 1651, 0.476}, {"credit-card", 2999, 2697, 0.285},
            {"time-job", 37339, 36289, 0.128},    {"low-pay", 2936, 2828, 0.112},
            {"a-test", 39063, 2278, 0.052},
        };
        if (!name.empty()) {
            for (const auto& p : kNamed) {
                if (name == p.name) {
                    f1 = p.f1;
                    f2 = p.f2;
                    a = intersection_from(p.R, p.f1, p.f2);
                    return;
                }
            }
            throw CLI::ValidationError("--profile", "unknown profile name: " + name);
        }
        if (f1 == 0 || f2 == 0)
            throw CLI::ValidationError("--f1/--f2", "a pair profile is required");
        if (R >= 0) a = intersection_from(R, f1, f2);
    }
};

struct TrainArgs {
    std::string loss = "hinge";
    double lambda = 0;
    double C = 1;
    uint32_t epochs = 1;
    double eta0 = 0;
    bool averaging = false;
    uint32_t avg_start = 2;
    bool shuffle = false;
    uint64_t seed = 0;
    uint64_t dim = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--loss", loss, "hinge or logistic")->default_str("hinge");
        cmd->add_option("--lambda", lambda, "regularization (overrides --C)");
        cmd->add_option("--C", C, "SVM-style penalty; lambda = 1/(n*C)")->default_val(1.0);
        cmd->add_option("--epochs", epochs, "training passes")->default_val(1);
        cmd->add_option("--eta0", eta0, "initial learning rate (default: calibrate)");
        cmd->add_flag("--averaging", averaging, "averaged SGD");
        cmd->add_option("--avg-start-epoch", avg_start, "first averaged epoch")->default_val(2);
        cmd->add_flag("--shuffle", shuffle, "shuffle examples between epochs");
        cmd->add_option("--seed", seed, "random seed")->default_val(0);
        cmd->add_option("--dim", dim, "dimension override for headerless text inputs");
    }

    bbmh_train_config config() const {
        bbmh_train_config c{};
        if (loss == "hinge") {
            c.loss = BBMH_LOSS_HINGE;
        } else if (loss == "logistic") {
            c.loss = BBMH_LOSS_LOGISTIC;
        } else {
            throw CLI::ValidationError("--loss", "expected hinge or logistic");
        }
        c.lambda = lambda;
        c.C = C;
        c.epochs = epochs;
        c.eta0 = eta0;
        c.averaging = averaging ? 1 : 0;
        c.avg_start_epoch = avg_start;
        c.shuffle = shuffle ? 1 : 0;
        c.seed = seed;
        c.dim_override = dim;
        return c;
    }
};

uint64_t dim_from(uint64_t dim, uint32_t dim_log2) {
    if (dim != 0) return dim;
    if (dim_log2 > 0) return uint64_t(1) << dim_log2;
    throw CLI::ValidationError("--dim", "one of --dim or --dim-log2 is required");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"b-bit minwise hashing toolkit"};
    app.require_subcommand(1);

    // ---- sketch ----
    auto* sk = app.add_subcommand("sketch", "compute b-bit minwise sketches for a corpus");
    std::string sk_scheme = "2u", sk_in, sk_out;
    uint64_t sk_dim = 0, sk_seed = 0, sk_chunk = 10000, sk_perm_cap = 0;
    uint32_t sk_dim_log2 = 0, sk_k = 500, sk_b = 8, sk_threads = 0;
    bool sk_min64 = false, sk_stats = false;
    sk->add_option("--scheme", sk_scheme, "perm, 2u, 4u-mod, 4u-bit")->default_str("2u");
    sk->add_option("--k", sk_k, "number of hash functions")->default_val(500);
    sk->add_option("--b", sk_b, "bits kept per minimum (1..32)")->default_val(8);
    sk->add_option("--dim", sk_dim, "universe size");
    sk->add_option("--dim-log2", sk_dim_log2, "universe size as a power of two");
    sk->add_option("--seed", sk_seed, "family seed")->default_val(0);
    sk->add_option("--chunk-size", sk_chunk, "records per pipeline chunk")->default_val(10000);
    sk->add_option("--threads", sk_threads, "compute workers (0 = hardware)")->default_val(0);
    sk->add_option("--perm-cap-bytes", sk_perm_cap, "permutation table memory cap");
    sk->add_flag("--emit-min64", sk_min64, "write full minima to a .min64 sibling");
    sk->add_flag("--stats", sk_stats, "print pipeline phase timings");
    sk->add_option("input", sk_in, "corpus (LibSVM text or BBCV binary)")->required();
    sk->add_option("output", sk_out, "sketch file to write")->required();

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "estimate resemblance between two sketch records");
    std::string est_file;
    uint64_t est_i = 0, est_j = 1;
    bool est_full = false;
    ProfileArgs est_prof;
    est->add_option("sketch", est_file, "sketch file")->required();
    est->add_option("-i,--first", est_i, "first record index")->default_val(0);
    est->add_option("-j,--second", est_j, "second record index")->default_val(1);
    est_prof.add_to(est, false);
    est->add_flag("--full", est_full, "also report the full-minima estimate (.min64 required)");

    // ---- mse-sim ----
    auto* mse = app.add_subcommand("mse-sim", "simulated MSE of the estimator vs theory");
    ProfileArgs mse_prof;
    std::string mse_scheme = "2u", mse_b = "1,2,4", mse_k = "10..500", mse_out = "-";
    uint64_t mse_dim = 0, mse_reps = 1000, mse_seed = 0;
    uint32_t mse_dim_log2 = 0, mse_threads = 0;
    mse_prof.add_to(mse, true);
    mse->add_option("--scheme", mse_scheme)->default_str("2u");
    mse->add_option("--dim", mse_dim, "universe size");
    mse->add_option("--dim-log2", mse_dim_log2)->default_val(16);
    mse->add_option("--b", mse_b, "comma list; M for full minima")->default_str("1,2,4");
    mse->add_option("--k", mse_k, "comma list or a..b sweep")->default_str("10..500");
    mse->add_option("--reps", mse_reps, "repetitions")->default_val(1000);
    mse->add_option("--seed", mse_seed)->default_val(0);
    mse->add_option("--threads", mse_threads, "0 = hardware")->default_val(0);
    mse->add_option("-o,--output", mse_out, "table path (- for stdout)")->default_str("-");

    // ---- expand ----
    auto* exp = app.add_subcommand("expand", "expand a sketch file into learner rows");
    std::string exp_in, exp_out, exp_fmt = "libsvm";
    exp->add_option("--format", exp_fmt, "libsvm or binary")->default_str("libsvm");
    exp->add_option("input", exp_in, "sketch file")->required();
    exp->add_option("output", exp_out, "row file to write")->required();

    // ---- vw-project ----
    auto* vw = app.add_subcommand("vw-project", "signed feature-hashing projection");
    std::string vw_in, vw_out;
    uint32_t vw_bins = 256;
    uint64_t vw_seed = 0;
    vw->add_option("--bins", vw_bins, "hash bins (power of two)")->default_val(256);
    vw->add_option("--seed", vw_seed)->default_val(0);
    vw->add_option("input", vw_in, "corpus")->required();
    vw->add_option("output", vw_out, "LibSVM rows to write")->required();

    // ---- train ----
    auto* tr = app.add_subcommand("train", "SGD linear SVM / logistic regression");
    TrainArgs tr_args;
    std::string tr_data, tr_model, tr_test, tr_metrics;
    tr_args.add_to(tr);
    tr->add_option("--test", tr_test, "held-out rows for per-epoch accuracy");
    tr->add_option("--metrics", tr_metrics, "per-epoch metrics table path");
    tr->add_option("data", tr_data, "sketch file, BBCV corpus, or LibSVM text")->required();
    tr->add_option("model", tr_model, "model file to write")->required();

    // ---- predict ----
    auto* pr = app.add_subcommand("predict", "score rows with a trained model");
    std::string pr_model, pr_data, pr_scores;
    pr->add_option("--scores", pr_scores, "write class/score rows here");
    pr->add_option("model", pr_model)->required();
    pr->add_option("data", pr_data)->required();

    // ---- synth ----
    auto* sy = app.add_subcommand("synth", "generate synthetic corpora");
    sy->require_subcommand(1);
    auto* syp = sy->add_subcommand("pair", "two sets with an exact (f1, f2, a) profile");
    ProfileArgs syp_prof;
    std::string syp_out;
    uint64_t syp_dim = 0, syp_seed = 0;
    uint32_t syp_dim_log2 = 0;
    bool syp_binary = false;
    syp_prof.add_to(syp, true);
    syp->add_option("--dim", syp_dim);
    syp->add_option("--dim-log2", syp_dim_log2)->default_val(16);
    syp->add_option("--seed", syp_seed)->default_val(0);
    syp->add_flag("--binary", syp_binary, "write BBCV instead of LibSVM text");
    syp->add_option("output", syp_out)->required();

    auto* syc = sy->add_subcommand("classification", "two-prototype labeled corpus");
    std::string syc_out, syc_margin = "separable";
    uint64_t syc_n = 10000, syc_dim = 0, syc_seed = 0;
    uint32_t syc_dim_log2 = 0;
    double syc_density = 0.01, syc_fnoise = 0.3, syc_lnoise = -1;
    bool syc_binary = false;
    syc->add_option("--n", syc_n, "record count")->default_val(10000);
    syc->add_option("--dim", syc_dim);
    syc->add_option("--dim-log2", syc_dim_log2)->default_val(16);
    syc->add_option("--density", syc_density, "mean nonzeros / dim")->default_val(0.01);
    syc->add_option("--margin-model", syc_margin, "separable or noisy")->default_str("separable");
    syc->add_option("--feature-noise", syc_fnoise, "prototype resample fraction")
        ->default_val(0.3);
    syc->add_option("--label-noise", syc_lnoise, "label flip fraction (overrides margin model)");
    syc->add_option("--seed", syc_seed)->default_val(0);
    syc->add_flag("--binary", syc_binary, "write BBCV instead of LibSVM text");
    syc->add_option("output", syc_out)->required();

    // ---- convert ----
    auto* cv = app.add_subcommand("convert", "LibSVM text <-> BBCV binary rows");
    std::string cv_in, cv_out;
    uint64_t cv_dim = 0;
    bool cv_text = false;
    cv->add_option("--dim", cv_dim, "declared dimension (default: inferred)");
    cv->add_flag("--text", cv_text, "emit LibSVM text instead of BBCV");
    cv->add_option("input", cv_in)->required();
    cv->add_option("output", cv_out)->required();

    // ---- bench ----
    auto* be = app.add_subcommand("bench", "timing harnesses");
    be->require_subcommand(1);
    auto* bp = be->add_subcommand("preprocess", "sketching cost sweep");
    std::string bp_corpus, bp_schemes = "2u,4u-mod,4u-bit", bp_chunks = "10000",
                bp_threads = "1", bp_out = "-";
    uint32_t bp_k = 500, bp_b = 8, bp_repeats = 3;
    uint64_t bp_seed = 0;
    bp->add_option("--schemes", bp_schemes, "comma list")->default_str("2u,4u-mod,4u-bit");
    bp->add_option("--k", bp_k)->default_val(500);
    bp->add_option("--b", bp_b)->default_val(8);
    bp->add_option("--chunks", bp_chunks, "comma list of chunk sizes")->default_str("10000");
    bp->add_option("--threads", bp_threads, "comma list of worker counts")->default_str("1");
    bp->add_option("--repeats", bp_repeats, "runs per cell (median)")->default_val(3);
    bp->add_option("--seed", bp_seed)->default_val(0);
    bp->add_option("-o,--output", bp_out)->default_str("-");
    bp->add_option("corpus", bp_corpus)->required();

    auto* bep = be->add_subcommand("epochs", "per-epoch load/update split, raw vs hashed");
    TrainArgs bep_args;
    std::string bep_raw, bep_hashed, bep_out = "-";
    uint32_t bep_epochs = 10, bep_repeats = 1;
    bep_args.add_to(bep);
    bep->add_option("--bench-epochs", bep_epochs, "epochs per side")->default_val(10);
    bep->add_option("--repeats", bep_repeats)->default_val(1);
    bep->add_option("-o,--output", bep_out)->default_str("-");
    bep->add_option("raw", bep_raw, "original corpus")->required();
    bep->add_option("hashed", bep_hashed, "sketch file over the same records")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*sk) {
        uint64_t dim = dim_from(sk_dim, sk_dim_log2);
        bbmh_family* fam = nullptr;
        bbmh_status st =
            bbmh_family_create(scheme_tag(sk_scheme), dim, sk_k, sk_seed, 0, sk_perm_cap, &fam);
        if (st != BBMH_OK) return fail_status("family", st);
        bbmh_pipeline_stats stats{};
        st = bbmh_sketch_file(fam, sk_in.c_str(), sk_out.c_str(), sk_b, sk_chunk, sk_threads,
                              sk_min64 ? 1 : 0, &stats);
        bbmh_family_destroy(fam);
        if (st != BBMH_OK) return fail_status("sketch", st);
        if (sk_stats)
            std::printf("records=%" PRIu64 " chunks=%" PRIu64
                        " read_s=%.3f compute_s=%.3f write_s=%.3f wall_s=%.3f\n",
                        stats.records, stats.chunks, stats.read_seconds, stats.compute_seconds,
                        stats.write_seconds, stats.wall_seconds);
        return 0;
    }

    if (*est) {
        est_prof.resolve();
        bbmh_estimate out{};
        double r_full = 0;
        bbmh_status st =
            bbmh_estimate_file(est_file.c_str(), est_i, est_j, est_prof.f1, est_prof.f2,
                               est_prof.a, est_full ? 1 : 0, &out,
                               est_full ? &r_full : nullptr);
        if (st != BBMH_OK) return fail_status("estimate", st);
        std::printf("r_hat\t%.6f\nr_raw\t%.6f\np_hat\t%.6f\nc1b\t%.6f\nc2b\t%.6f\nvar_theory\t%.3e\n",
                    out.r_hat, out.r_raw, out.p_hat, out.c1b, out.c2b, out.var_theory);
        if (est_full) std::printf("r_full\t%.6f\n", r_full);
        return 0;
    }

    if (*mse) {
        mse_prof.resolve();
        auto bs = parse_b_list(mse_b);
        auto ks = parse_k_list(mse_k);
        bbmh_status st = bbmh_mse_experiment(
            scheme_tag(mse_scheme), dim_from(mse_dim, mse_dim_log2), mse_prof.f1, mse_prof.f2,
            mse_prof.a, bs.data(), bs.size(), ks.data(), ks.size(), mse_reps, mse_seed,
            mse_threads, mse_out.c_str());
        if (st != BBMH_OK) return fail_status("mse-sim", st);
        return 0;
    }

    if (*exp) {
        int32_t fmt;
        if (exp_fmt == "libsvm") {
            fmt = BBMH_ROWS_LIBSVM;
        } else if (exp_fmt == "binary") {
            fmt = BBMH_ROWS_BINARY;
        } else {
            std::fprintf(stderr, "bbmh: --format must be libsvm or binary\n");
            return 2;
        }
        bbmh_status st = bbmh_expand_file(exp_in.c_str(), exp_out.c_str(), fmt);
        if (st != BBMH_OK) return fail_status("expand", st);
        return 0;
    }

    if (*vw) {
        bbmh_status st = bbmh_vw_project_file(vw_in.c_str(), vw_out.c_str(), vw_bins, vw_seed);
        if (st != BBMH_OK) return fail_status("vw-project", st);
        return 0;
    }

    if (*tr) {
        bbmh_train_config cfg = tr_args.config();
        bbmh_status st = bbmh_train(tr_data.c_str(), tr_model.c_str(),
                                    tr_test.empty() ? nullptr : tr_test.c_str(),
                                    tr_metrics.empty() ? nullptr : tr_metrics.c_str(), &cfg);
        if (st != BBMH_OK) return fail_status("train", st);
        return 0;
    }

    if (*pr) {
        double acc = 0;
        bbmh_status st = bbmh_predict(pr_model.c_str(), pr_data.c_str(),
                                      pr_scores.empty() ? nullptr : pr_scores.c_str(), &acc);
        if (st != BBMH_OK) return fail_status("predict", st);
        std::printf("accuracy\t%.6f\n", acc);
        return 0;
    }

    if (*syp) {
        syp_prof.resolve();
        bbmh_status st = bbmh_synth_pair(syp_prof.f1, syp_prof.f2, syp_prof.a,
                                         dim_from(syp_dim, syp_dim_log2), syp_seed,
                                         syp_out.c_str(), syp_binary ? 1 : 0);
        if (st != BBMH_OK) return fail_status("synth pair", st);
        return 0;
    }

    if (*syc) {
        double lnoise = syc_lnoise;
        if (lnoise < 0) {
            if (syc_margin == "separable") {
                lnoise = 0;
            } else if (syc_margin == "noisy") {
                lnoise = 0.02;
            } else {
                std::fprintf(stderr, "bbmh: --margin-model must be separable or noisy\n");
                return 2;
            }
        }
        bbmh_status st = bbmh_synth_classification(syc_out.c_str(), syc_n,
                                                   dim_from(syc_dim, syc_dim_log2), syc_density,
                                                   syc_fnoise, lnoise, syc_seed,
                                                   syc_binary ? 1 : 0);
        if (st != BBMH_OK) return fail_status("synth classification", st);
        return 0;
    }

    if (*cv) {
        bbmh_status st = bbmh_corpus_convert(cv_in.c_str(), cv_out.c_str(), cv_text ? 0 : 1,
                                             cv_dim);
        if (st != BBMH_OK) return fail_status("convert", st);
        return 0;
    }

    if (*bp) {
        std::vector<int32_t> schemes;
        size_t pos = 0;
        while (pos < bp_schemes.size()) {
            size_t comma = bp_schemes.find(',', pos);
            if (comma == std::string::npos) comma = bp_schemes.size();
            schemes.push_back(scheme_tag(bp_schemes.substr(pos, comma - pos)));
            pos = comma + 1;
        }
        std::vector<uint64_t> chunks;
        for (uint32_t v : parse_k_list(bp_chunks)) chunks.push_back(v);
        std::vector<uint32_t> threads = parse_k_list(bp_threads);
        bbmh_status st = bbmh_bench_preprocess(bp_corpus.c_str(), schemes.data(), schemes.size(),
                                               bp_k, bp_b, chunks.data(), chunks.size(),
                                               threads.data(), threads.size(), bp_repeats,
                                               bp_seed, bp_out.c_str());
        if (st != BBMH_OK) return fail_status("bench preprocess", st);
        return 0;
    }

    if (*bep) {
        bbmh_train_config cfg = bep_args.config();
        bbmh_status st = bbmh_bench_epochs(bep_raw.c_str(), bep_hashed.c_str(), bep_epochs,
                                           bep_repeats, &cfg, bep_out.c_str());
        if (st != BBMH_OK) return fail_status("bench epochs", st);
        return 0;
    }

    return 2;
}
