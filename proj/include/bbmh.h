/* bbmh - b-bit minwise hashing: sketching, resemblance estimation, and
 * online linear learning on hashed features.
 *
 * C API over the C++ core. All functions return BBMH_OK (0) on success or a
 * negative status; bbmh_last_error() carries a human-readable detail message
 * for the calling thread. Handles are opaque and must be released with their
 * destroy function.
 */
#ifndef BBMH_H
#define BBMH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BBMH_API __declspec(dllexport)
#else
#define BBMH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t bbmh_status;

enum {
    BBMH_OK = 0,
    BBMH_E_INVALID_ARGUMENT = -1,
    BBMH_E_UNSUPPORTED_UNIVERSE = -2,
    BBMH_E_PERMUTATION_TOO_LARGE = -3,
    BBMH_E_HEADER_MISMATCH = -4,
    BBMH_E_MISSING_MINIMA = -5,
    BBMH_E_DEGENERATE_PROFILE = -6,
    BBMH_E_EMPTY_SKETCH = -7,
    BBMH_E_DIMENSION_EXCEEDED = -8,
    BBMH_E_NON_BINARY_LABEL = -9,
    BBMH_E_PARSE = -10,
    BBMH_E_INFEASIBLE_PROFILE = -11,
    BBMH_E_IO = -12,
    BBMH_E_INTERNAL = -13
};

/* hash scheme tags */
enum {
    BBMH_SCHEME_PERMUTATION = 0,
    BBMH_SCHEME_2U = 1,
    BBMH_SCHEME_4U_MOD = 2,
    BBMH_SCHEME_4U_BIT = 3
};

enum { BBMH_LOSS_HINGE = 0, BBMH_LOSS_LOGISTIC = 1 };
enum { BBMH_ROWS_LIBSVM = 0, BBMH_ROWS_BINARY = 1 };

BBMH_API uint32_t bbmh_version(void);
BBMH_API const char* bbmh_strerror(bbmh_status status);
BBMH_API const char* bbmh_last_error(void); /* thread-local detail, may be "" */

/* ---- hash families ---------------------------------------------------- */

typedef struct bbmh_family bbmh_family;

/* Builds the k index mappings for one scheme. `prime` is honored by
 * BBMH_SCHEME_4U_MOD (0 selects 2^31-1); `perm_cap_bytes` bounds permutation
 * table storage (0 selects the 1 GiB default). */
BBMH_API bbmh_status bbmh_family_create(int32_t scheme, uint64_t dim, uint32_t k, uint64_t seed,
                                        uint64_t prime, uint64_t perm_cap_bytes,
                                        bbmh_family** out);
BBMH_API void bbmh_family_destroy(bbmh_family* family);
BBMH_API bbmh_status bbmh_family_map(const bbmh_family* family, uint32_t j, uint32_t t,
                                     uint32_t* out);

/* v mod (2^31-1) via shifts and masks; requires v < 2^62 */
BBMH_API uint64_t bbmh_mod_mersenne31(uint64_t v);

/* ---- sketching -------------------------------------------------------- */

/* Sketch one sorted feature-id set: k minima (full width) and packed b-bit
 * codes. minima_out may be NULL; codes_out needs ceil(k*b/8) bytes;
 * empty_out is set to 1 for an empty input (minima become the all-ones
 * sentinel). */
BBMH_API bbmh_status bbmh_sketch_set(const bbmh_family* family, const uint32_t* indices,
                                     size_t count, uint32_t b, uint64_t* minima_out,
                                     uint8_t* codes_out, int32_t* empty_out);

typedef struct {
    uint64_t records;
    uint64_t chunks;
    double read_seconds;
    double compute_seconds;
    double write_seconds;
    double wall_seconds;
} bbmh_pipeline_stats;

/* Chunked parallel sketching: corpus file (LibSVM text or BBCV binary) to a
 * BBMH sketch file, plus a .min64 sibling when emit_minima is nonzero. */
BBMH_API bbmh_status bbmh_sketch_file(const bbmh_family* family, const char* input_path,
                                      const char* output_path, uint32_t b, uint64_t chunk_size,
                                      uint32_t workers, int32_t emit_minima,
                                      bbmh_pipeline_stats* stats_out /* nullable */);

/* ---- resemblance estimation ------------------------------------------- */

typedef struct {
    double r_hat;      /* clamped to [0,1] */
    double r_raw;      /* before clamping */
    double p_hat;      /* matching-codes fraction */
    double c1b, c2b;   /* bias-correction terms */
    double var_theory; /* theoretical variance of r_hat */
} bbmh_estimate;

BBMH_API bbmh_status bbmh_correction_terms(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                           uint32_t b, double* c1b_out, double* c2b_out);
BBMH_API bbmh_status bbmh_theoretical_variance(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                               uint32_t b, uint32_t k, double* out);

/* packed-code estimate with the Theorem-1 correction for profile (f1,f2,a) */
BBMH_API bbmh_status bbmh_estimate_codes(const uint8_t* codes1, const uint8_t* codes2, uint32_t k,
                                         uint32_t b, uint64_t f1, uint64_t f2, uint64_t a,
                                         uint64_t dim, bbmh_estimate* out);
/* unbiased matching fraction over full-width minima */
BBMH_API bbmh_status bbmh_estimate_minima(const uint64_t* minima1, const uint64_t* minima2,
                                          uint32_t k, double* r_hat_out);

/* Estimate between two records of a sketch file. Uses the .min64 sibling
 * when use_minima is nonzero (r_hat is then the unbiased full estimate and
 * the b-bit fields are still filled from the codes). */
BBMH_API bbmh_status bbmh_estimate_file(const char* sketch_path, uint64_t record1,
                                        uint64_t record2, uint64_t f1, uint64_t f2, uint64_t a,
                                        int32_t use_minima, bbmh_estimate* out,
                                        double* r_full_out /* nullable */);

/* ---- MSE simulation ---------------------------------------------------- */

/* One synthetic pair with the exact (f1, f2, a) profile, `reps` independent
 * families; writes the per-(b,k) table (b = 0 rows are the full-minima
 * estimator) to out_path, or stdout when out_path is "-". */
BBMH_API bbmh_status bbmh_mse_experiment(int32_t scheme, uint64_t dim, uint64_t f1, uint64_t f2,
                                         uint64_t a, const uint32_t* b_list, size_t b_count,
                                         const uint32_t* k_list, size_t k_count, uint64_t reps,
                                         uint64_t seed, uint32_t threads, const char* out_path);

/* ---- expansion and VW projection ---------------------------------------- */

/* Sketch file -> 2^b*k-dimensional rows with exactly k ones per record. */
BBMH_API bbmh_status bbmh_expand_file(const char* sketch_path, const char* out_path,
                                      int32_t row_format);

/* Signed random bin projection into `bins` buckets (power of two);
 * emits LibSVM text rows. */
BBMH_API bbmh_status bbmh_vw_project_file(const char* corpus_path, const char* out_path,
                                          uint32_t bins, uint64_t seed);

/* ---- online linear learning --------------------------------------------- */

typedef struct {
    int32_t loss;            /* BBMH_LOSS_* */
    double lambda;           /* <= 0 selects 1/(n*C) */
    double C;                /* used when lambda <= 0 */
    uint32_t epochs;
    double eta0;             /* <= 0 calibrates on a subset */
    int32_t averaging;       /* nonzero enables ASGD */
    uint32_t avg_start_epoch;
    int32_t shuffle;
    uint64_t seed;
    uint64_t dim_override;   /* 0 = take from the data */
} bbmh_train_config;

/* data_path may be a BBMH sketch (rows are runtime expansions), a BBCV
 * corpus, or LibSVM text. metrics_path (nullable) receives per-epoch rows
 * "epoch, train_obj, test_acc, load_seconds, update_seconds". */
BBMH_API bbmh_status bbmh_train(const char* data_path, const char* model_path,
                                const char* test_path /* nullable */,
                                const char* metrics_path /* nullable */,
                                const bbmh_train_config* config);

/* scores_path (nullable) receives "class<TAB>score" rows */
BBMH_API bbmh_status bbmh_predict(const char* model_path, const char* data_path,
                                  const char* scores_path, double* accuracy_out /* nullable */);

/* ---- synthetic data ------------------------------------------------------ */

/* Two-record corpus with |S1| = f1, |S2| = f2, |S1 & S2| = a exactly. */
BBMH_API bbmh_status bbmh_synth_pair(uint64_t f1, uint64_t f2, uint64_t a, uint64_t dim,
                                     uint64_t seed, const char* out_path, int32_t binary_format);

/* Two-prototype labeled corpus with tunable separability. */
BBMH_API bbmh_status bbmh_synth_classification(const char* out_path, uint64_t n, uint64_t dim,
                                               double density, double feature_noise,
                                               double label_noise, uint64_t seed,
                                               int32_t binary_format);

/* LibSVM text <-> BBCV binary; dim 0 infers max index + 1 for text inputs */
BBMH_API bbmh_status bbmh_corpus_convert(const char* input_path, const char* output_path,
                                         int32_t to_binary, uint64_t dim);

/* ---- benchmarks ----------------------------------------------------------- */

/* Chunk-size / thread-count / scheme sweep over one corpus; medians of
 * `repeats` runs, written as a table to out_path ("-" = stdout). */
BBMH_API bbmh_status bbmh_bench_preprocess(const char* corpus_path, const int32_t* schemes,
                                           size_t scheme_count, uint32_t k, uint32_t b,
                                           const uint64_t* chunk_sizes, size_t chunk_count,
                                           const uint32_t* thread_counts, size_t thread_count,
                                           uint32_t repeats, uint64_t seed, const char* out_path);

/* Per-epoch load/update split for raw vs sketched input over the same
 * records, plus raw/hashed ratios. */
BBMH_API bbmh_status bbmh_bench_epochs(const char* raw_path, const char* hashed_path,
                                       uint32_t epochs, uint32_t repeats,
                                       const bbmh_train_config* config, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BBMH_H */
