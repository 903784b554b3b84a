#include "bbmh.h"

#include <cstring>
#include <exception>
#include <string>

#include "bench.hpp"
#include "dataio.hpp"
#include "estimator.hpp"
#include "expansion.hpp"
#include "hash_family.hpp"
#include "learner.hpp"
#include "pipeline.hpp"
#include "sketch.hpp"
#include "vw.hpp"

using namespace bbmh;

namespace {

thread_local std::string t_last_error;

bbmh_status status_of(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return BBMH_E_INVALID_ARGUMENT;
        case Errc::UnsupportedUniverse: return BBMH_E_UNSUPPORTED_UNIVERSE;
        case Errc::PermutationTooLarge: return BBMH_E_PERMUTATION_TOO_LARGE;
        case Errc::HeaderMismatch: return BBMH_E_HEADER_MISMATCH;
        case Errc::MissingMinima: return BBMH_E_MISSING_MINIMA;
        case Errc::DegenerateProfile: return BBMH_E_DEGENERATE_PROFILE;
        case Errc::EmptySketch: return BBMH_E_EMPTY_SKETCH;
        case Errc::DimensionExceeded: return BBMH_E_DIMENSION_EXCEEDED;
        case Errc::NonBinaryLabel: return BBMH_E_NON_BINARY_LABEL;
        case Errc::MalformedLine:
        case Errc::NonBinaryValue:
        case Errc::NonAscendingIndex: return BBMH_E_PARSE;
        case Errc::InfeasibleProfile: return BBMH_E_INFEASIBLE_PROFILE;
        case Errc::Io: return BBMH_E_IO;
    }
    return BBMH_E_INTERNAL;
}

template <typename Fn>
bbmh_status guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        fn();
        return BBMH_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return BBMH_E_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return BBMH_E_INTERNAL;
    }
}

HashScheme scheme_of(int32_t tag) {
    if (tag < BBMH_SCHEME_PERMUTATION || tag > BBMH_SCHEME_4U_BIT)
        fail(Errc::InvalidArgument, "unknown scheme tag " + std::to_string(tag));
    return HashScheme(uint8_t(tag));
}

const char* require(const char* p, const char* what) {
    if (!p) fail(Errc::InvalidArgument, std::string(what) + " must not be NULL");
    return p;
}

FILE* open_table(const std::string& path) {
    if (path == "-") return stdout;
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) fail(Errc::Io, path + ": cannot open for writing");
    return f;
}

void close_table(FILE* f) {
    if (f && f != stdout) std::fclose(f);
}

TrainConfig train_config_of(const bbmh_train_config* c) {
    if (!c) fail(Errc::InvalidArgument, "config must not be NULL");
    if (c->loss != BBMH_LOSS_HINGE && c->loss != BBMH_LOSS_LOGISTIC)
        fail(Errc::InvalidArgument, "unknown loss tag");
    TrainConfig tc;
    tc.loss = Loss(uint8_t(c->loss));
    if (c->lambda > 0) tc.lambda = c->lambda;
    tc.C = c->C > 0 ? c->C : 1.0;
    tc.epochs = c->epochs;
    tc.eta0 = c->eta0 > 0 ? c->eta0 : 0;
    tc.averaging = c->averaging != 0;
    if (c->avg_start_epoch > 0) tc.avg_start_epoch = c->avg_start_epoch;
    tc.shuffle = c->shuffle != 0;
    tc.seed = c->seed;
    if (c->dim_override > 0) tc.dim_override = c->dim_override;
    return tc;
}

}  // namespace

struct bbmh_family {
    HashFamily impl;
};

extern "C" {

uint32_t bbmh_version(void) { return 10000; }  // 1.0.0

const char* bbmh_strerror(bbmh_status status) {
    switch (status) {
        case BBMH_OK: return "ok";
        case BBMH_E_INVALID_ARGUMENT: return "invalid argument";
        case BBMH_E_UNSUPPORTED_UNIVERSE: return "unsupported universe";
        case BBMH_E_PERMUTATION_TOO_LARGE: return "permutation tables exceed the memory cap";
        case BBMH_E_HEADER_MISMATCH: return "sketch header mismatch";
        case BBMH_E_MISSING_MINIMA: return "full minima not available";
        case BBMH_E_DEGENERATE_PROFILE: return "degenerate pair profile";
        case BBMH_E_EMPTY_SKETCH: return "flagged empty-set sketch";
        case BBMH_E_DIMENSION_EXCEEDED: return "dimension exceeded";
        case BBMH_E_NON_BINARY_LABEL: return "label is not +-1";
        case BBMH_E_PARSE: return "parse error";
        case BBMH_E_INFEASIBLE_PROFILE: return "infeasible pair profile";
        case BBMH_E_IO: return "i/o error";
        default: return "internal error";
    }
}

const char* bbmh_last_error(void) { return t_last_error.c_str(); }

bbmh_status bbmh_family_create(int32_t scheme, uint64_t dim, uint32_t k, uint64_t seed,
                               uint64_t prime, uint64_t perm_cap_bytes, bbmh_family** out) {
    return guarded([&] {
        if (!out) fail(Errc::InvalidArgument, "out must not be NULL");
        *out = new bbmh_family{HashFamily::build(
            scheme_of(scheme), dim, k, seed, prime ? prime : kMersenne31,
            perm_cap_bytes ? perm_cap_bytes : HashFamily::kDefaultPermCapBytes)};
    });
}

void bbmh_family_destroy(bbmh_family* family) { delete family; }

bbmh_status bbmh_family_map(const bbmh_family* family, uint32_t j, uint32_t t, uint32_t* out) {
    return guarded([&] {
        if (!family || !out) fail(Errc::InvalidArgument, "family and out must not be NULL");
        if (j >= family->impl.k()) fail(Errc::InvalidArgument, "j out of range");
        if (uint64_t(t) >= family->impl.dim()) fail(Errc::InvalidArgument, "t out of range");
        *out = family->impl.map(j, t);
    });
}

uint64_t bbmh_mod_mersenne31(uint64_t v) { return mod_mersenne31(v); }

bbmh_status bbmh_sketch_set(const bbmh_family* family, const uint32_t* indices, size_t count,
                            uint32_t b, uint64_t* minima_out, uint8_t* codes_out,
                            int32_t* empty_out) {
    return guarded([&] {
        if (!family || !codes_out) fail(Errc::InvalidArgument, "family and codes_out required");
        if (count > 0 && !indices) fail(Errc::InvalidArgument, "indices must not be NULL");
        FeatureSet fs;
        fs.indices.assign(indices, indices + count);
        SketchRecord rec = sketch_one(family->impl, fs, uint8_t(b), minima_out != nullptr);
        std::memcpy(codes_out, rec.codes.data(), rec.codes.size());
        if (minima_out)
            std::memcpy(minima_out, rec.minima.data(), rec.minima.size() * sizeof(uint64_t));
        if (empty_out) *empty_out = rec.empty_set() ? 1 : 0;
    });
}

bbmh_status bbmh_sketch_file(const bbmh_family* family, const char* input_path,
                             const char* output_path, uint32_t b, uint64_t chunk_size,
                             uint32_t workers, int32_t emit_minima,
                             bbmh_pipeline_stats* stats_out) {
    return guarded([&] {
        if (!family) fail(Errc::InvalidArgument, "family must not be NULL");
        PipelineStats st =
            sketch_file(family->impl, require(input_path, "input_path"),
                        require(output_path, "output_path"), uint8_t(b), size_t(chunk_size),
                        workers, emit_minima != 0);
        if (stats_out)
            *stats_out = {st.records,         st.chunks,        st.read_seconds,
                          st.compute_seconds, st.write_seconds, st.wall_seconds};
    });
}

bbmh_status bbmh_correction_terms(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim, uint32_t b,
                                  double* c1b_out, double* c2b_out) {
    return guarded([&] {
        if (!c1b_out || !c2b_out) fail(Errc::InvalidArgument, "outputs must not be NULL");
        CorrectionTerms c = correction_terms(PairProfile{f1, f2, a, dim}, b);
        *c1b_out = c.c1b;
        *c2b_out = c.c2b;
    });
}

bbmh_status bbmh_theoretical_variance(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                      uint32_t b, uint32_t k, double* out) {
    return guarded([&] {
        if (!out) fail(Errc::InvalidArgument, "out must not be NULL");
        *out = theoretical_variance(PairProfile{f1, f2, a, dim}, b, k);
    });
}

bbmh_status bbmh_estimate_codes(const uint8_t* codes1, const uint8_t* codes2, uint32_t k,
                                uint32_t b, uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                bbmh_estimate* out) {
    return guarded([&] {
        if (!codes1 || !codes2 || !out) fail(Errc::InvalidArgument, "codes and out required");
        if (k < 1) fail(Errc::InvalidArgument, "k must be >= 1");
        ResemblanceEstimate est = estimate_bbit(codes1, codes2, k, b, PairProfile{f1, f2, a, dim});
        *out = {est.r_hat, est.r_raw, est.p_hat, est.c1b, est.c2b, est.var_theory};
    });
}

bbmh_status bbmh_estimate_minima(const uint64_t* minima1, const uint64_t* minima2, uint32_t k,
                                 double* r_hat_out) {
    return guarded([&] {
        if (!minima1 || !minima2 || !r_hat_out)
            fail(Errc::InvalidArgument, "minima and out required");
        *r_hat_out = estimate_full(std::span(minima1, k), std::span(minima2, k));
    });
}

bbmh_status bbmh_estimate_file(const char* sketch_path, uint64_t record1, uint64_t record2,
                               uint64_t f1, uint64_t f2, uint64_t a, int32_t use_minima,
                               bbmh_estimate* out, double* r_full_out) {
    return guarded([&] {
        if (!out) fail(Errc::InvalidArgument, "out must not be NULL");
        SketchReader reader(require(sketch_path, "sketch_path"));
        SketchRecord r1 = reader.record(record1);
        SketchRecord r2 = reader.record(record2);
        const SketchHeader& h = reader.header();
        PairProfile profile{f1, f2, a, h.dim};
        ResemblanceEstimate est = estimate_bbit(h, r1, h, r2, profile);
        *out = {est.r_hat, est.r_raw, est.p_hat, est.c1b, est.c2b, est.var_theory};
        if (use_minima || r_full_out) {
            const double full = estimate_full(h, r1, h, r2);
            if (r_full_out) *r_full_out = full;
        }
    });
}

bbmh_status bbmh_mse_experiment(int32_t scheme, uint64_t dim, uint64_t f1, uint64_t f2,
                                uint64_t a, const uint32_t* b_list, size_t b_count,
                                const uint32_t* k_list, size_t k_count, uint64_t reps,
                                uint64_t seed, uint32_t threads, const char* out_path) {
    return guarded([&] {
        if (!b_list || !k_list) fail(Errc::InvalidArgument, "b_list and k_list required");
        MseConfig cfg;
        cfg.scheme = scheme_of(scheme);
        cfg.dim = dim;
        cfg.f1 = f1;
        cfg.f2 = f2;
        cfg.a = a;
        cfg.b_list.assign(b_list, b_list + b_count);
        cfg.k_list.assign(k_list, k_list + k_count);
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.threads = threads ? threads : 1;
        std::vector<MseRow> rows = mse_experiment(cfg);
        FILE* f = open_table(require(out_path, "out_path"));
        write_mse_table(rows, cfg, f);
        close_table(f);
    });
}

bbmh_status bbmh_expand_file(const char* sketch_path, const char* out_path, int32_t row_format) {
    return guarded([&] {
        if (row_format != BBMH_ROWS_LIBSVM && row_format != BBMH_ROWS_BINARY)
            fail(Errc::InvalidArgument, "unknown row format");
        expand_stream(require(sketch_path, "sketch_path"), require(out_path, "out_path"),
                      row_format == BBMH_ROWS_BINARY ? RowFormat::Binary : RowFormat::LibsvmText);
    });
}

bbmh_status bbmh_vw_project_file(const char* corpus_path, const char* out_path, uint32_t bins,
                                 uint64_t seed) {
    return guarded([&] {
        vw_project_file(require(corpus_path, "corpus_path"), require(out_path, "out_path"), bins,
                        seed);
    });
}

bbmh_status bbmh_train(const char* data_path, const char* model_path, const char* test_path,
                       const char* metrics_path, const bbmh_train_config* config) {
    return guarded([&] {
        TrainConfig tc = train_config_of(config);
        auto data = open_rows(require(data_path, "data_path"));
        std::unique_ptr<RowSource> test;
        if (test_path && *test_path) test = open_rows(test_path);
        TrainResult result = train(*data, tc, test.get());
        save_model(result.model, require(model_path, "model_path"));
        if (metrics_path && *metrics_path) {
            FILE* f = open_table(metrics_path);
            std::fprintf(f, "# bbmh-train v1 lambda=%.9g eta0=%.9g n=%llu\n", result.lambda,
                         result.eta0, (unsigned long long)result.n);
            std::fprintf(f, "epoch\ttrain_obj\ttest_acc\tload_seconds\tupdate_seconds\n");
            for (const EpochMetrics& em : result.metrics)
                std::fprintf(f, "%u\t%.9g\t%.9g\t%.6f\t%.6f\n", em.epoch, em.train_obj,
                             em.test_acc, em.load_seconds, em.update_seconds);
            close_table(f);
        }
    });
}

bbmh_status bbmh_predict(const char* model_path, const char* data_path, const char* scores_path,
                         double* accuracy_out) {
    return guarded([&] {
        LinearModel model = load_model(require(model_path, "model_path"));
        auto data = open_rows(require(data_path, "data_path"));
        FILE* f = scores_path && *scores_path ? open_table(scores_path) : nullptr;
        PredictStats stats = predict_file(model, *data, f);
        close_table(f);
        if (accuracy_out) *accuracy_out = stats.accuracy();
    });
}

bbmh_status bbmh_synth_pair(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim, uint64_t seed,
                            const char* out_path, int32_t binary_format) {
    return guarded([&] {
        auto [s1, s2] = synth_pair(f1, f2, a, dim, seed);
        class PairSource : public RecordSource {
        public:
            PairSource(FeatureSet a, FeatureSet b, uint64_t dim)
                : a_(std::move(a)), b_(std::move(b)), dim_(dim) {}
            bool next(FeatureSet& out) override {
                if (i_ >= 2) return false;
                out = i_ == 0 ? a_ : b_;
                ++i_;
                return true;
            }
            void reset() override { i_ = 0; }
            uint64_t dim() const override { return dim_; }

        private:
            FeatureSet a_, b_;
            uint64_t dim_;
            int i_ = 0;
        } src(std::move(s1), std::move(s2), dim);
        write_corpus(src, require(out_path, "out_path"), binary_format != 0, dim);
    });
}

bbmh_status bbmh_synth_classification(const char* out_path, uint64_t n, uint64_t dim,
                                      double density, double feature_noise, double label_noise,
                                      uint64_t seed, int32_t binary_format) {
    return guarded([&] {
        SynthConfig cfg;
        cfg.n = n;
        cfg.dim = dim;
        cfg.density = density;
        cfg.feature_noise = feature_noise;
        cfg.label_noise = label_noise;
        cfg.seed = seed;
        SynthCorpus src(cfg);
        write_corpus(src, require(out_path, "out_path"), binary_format != 0, dim);
    });
}

bbmh_status bbmh_corpus_convert(const char* input_path, const char* output_path,
                                int32_t to_binary, uint64_t dim) {
    return guarded([&] {
        auto src = open_corpus(require(input_path, "input_path"));
        uint64_t out_dim = dim ? dim : src->dim();
        if (to_binary && out_dim == 0) {
            FeatureSet fs;
            while (src->next(fs))
                if (!fs.indices.empty()) out_dim = std::max(out_dim, uint64_t(fs.indices.back()) + 1);
            src->reset();
            if (out_dim == 0) out_dim = 1;
        }
        write_corpus(*src, require(output_path, "output_path"), to_binary != 0, out_dim);
    });
}

bbmh_status bbmh_bench_preprocess(const char* corpus_path, const int32_t* schemes,
                                  size_t scheme_count, uint32_t k, uint32_t b,
                                  const uint64_t* chunk_sizes, size_t chunk_count,
                                  const uint32_t* thread_counts, size_t thread_count,
                                  uint32_t repeats, uint64_t seed, const char* out_path) {
    return guarded([&] {
        if (!schemes || !chunk_sizes || !thread_counts)
            fail(Errc::InvalidArgument, "schemes, chunk_sizes, thread_counts required");
        PreprocessBenchConfig cfg;
        cfg.corpus_path = require(corpus_path, "corpus_path");
        for (size_t i = 0; i < scheme_count; ++i) cfg.schemes.push_back(scheme_of(schemes[i]));
        cfg.k = k;
        cfg.b = uint8_t(b);
        cfg.chunk_sizes.assign(chunk_sizes, chunk_sizes + chunk_count);
        cfg.thread_counts.assign(thread_counts, thread_counts + thread_count);
        cfg.repeats = repeats;
        cfg.seed = seed;
        auto rows = bench_preprocess(cfg);
        FILE* f = open_table(require(out_path, "out_path"));
        write_preprocess_table(rows, f);
        close_table(f);
    });
}

bbmh_status bbmh_bench_epochs(const char* raw_path, const char* hashed_path, uint32_t epochs,
                              uint32_t repeats, const bbmh_train_config* config,
                              const char* out_path) {
    return guarded([&] {
        EpochBenchConfig cfg;
        cfg.raw_path = require(raw_path, "raw_path");
        cfg.hashed_path = require(hashed_path, "hashed_path");
        cfg.train = train_config_of(config);
        cfg.epochs = epochs ? epochs : 10;
        cfg.repeats = repeats ? repeats : 1;
        EpochBenchResult result = bench_epochs(cfg);
        FILE* f = open_table(require(out_path, "out_path"));
        write_epoch_table(result, f);
        close_table(f);
    });
}

}  // extern "C"
