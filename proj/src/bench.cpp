#include "bench.hpp"

#include <algorithm>
#include <sys/stat.h>

#include "prng.hpp"
#include "sketch.hpp"

namespace bbmh {

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

uint64_t file_bytes(const std::string& path) {
    struct stat st{};
    if (::stat(path.c_str(), &st) != 0) fail(Errc::Io, path + ": stat failed");
    return uint64_t(st.st_size);
}

class NullSink {
public:
    void operator()(const SketchRecord&) const {}
};

}  // namespace

std::vector<PreprocessBenchRow> bench_preprocess(const PreprocessBenchConfig& cfg) {
    if (cfg.repeats < 1) fail(Errc::InvalidArgument, "repeats must be >= 1");
    std::vector<PreprocessBenchRow> rows;
    for (HashScheme scheme : cfg.schemes) {
        uint64_t dim = 0;
        {
            // probe the corpus for its universe; text corpora get max index + 1
            auto src = open_corpus(cfg.corpus_path);
            dim = src->dim();
            if (dim == 0) {
                FeatureSet fs;
                while (src->next(fs))
                    if (!fs.indices.empty()) dim = std::max(dim, uint64_t(fs.indices.back()) + 1);
                if (dim == 0) dim = 1;
            }
        }
        if (scheme == HashScheme::TwoU) dim = std::bit_ceil(dim);
        HashFamily family =
            HashFamily::build(scheme, dim, cfg.k, cfg.seed, kMersenne31, cfg.perm_cap_bytes);
        for (uint64_t chunk : cfg.chunk_sizes) {
            for (unsigned threads : cfg.thread_counts) {
                std::vector<double> load, compute, write, wall;
                uint64_t records = 0;
                for (uint32_t r = 0; r < cfg.repeats; ++r) {
                    auto src = open_corpus(cfg.corpus_path);
                    PipelineStats st = sketch_stream(family, *src, NullSink{}, cfg.b,
                                                     size_t(chunk), threads, false);
                    load.push_back(st.read_seconds);
                    compute.push_back(st.compute_seconds);
                    write.push_back(st.write_seconds);
                    wall.push_back(st.wall_seconds);
                    records = st.records;
                }
                rows.push_back({scheme, chunk, threads, records, median(load), median(compute),
                                median(write), median(wall)});
            }
        }
    }
    return rows;
}

void write_preprocess_table(const std::vector<PreprocessBenchRow>& rows, FILE* out) {
    std::fprintf(out, "# bbmh-bench-preprocess v1\n");
    std::fprintf(out, "scheme\tchunk\tthreads\trecords\tload_s\tcompute_s\twrite_s\twall_s\n");
    for (const auto& r : rows) {
        std::fprintf(out, "%s\t%llu\t%u\t%llu\t%.6f\t%.6f\t%.6f\t%.6f\n", scheme_name(r.scheme),
                     (unsigned long long)r.chunk_size, r.threads,
                     (unsigned long long)r.records, r.load_s, r.compute_s, r.write_s, r.wall_s);
    }
}

EpochBenchResult bench_epochs(const EpochBenchConfig& cfg) {
    EpochBenchResult result;
    TrainConfig tc = cfg.train;
    tc.epochs = cfg.epochs;

    auto run_side = [&](const std::string& path, const char* name) {
        double load = 0, update = 0;
        for (uint32_t r = 0; r < std::max(1u, cfg.repeats); ++r) {
            auto rows = open_rows(path);
            TrainResult tr = train(*rows, tc, nullptr);
            double l = 0, u = 0;
            for (const EpochMetrics& em : tr.metrics) {
                l += em.load_seconds;
                u += em.update_seconds;
            }
            load += l / double(tr.metrics.size());
            update += u / double(tr.metrics.size());
        }
        load /= std::max(1u, cfg.repeats);
        update /= std::max(1u, cfg.repeats);
        result.rows.push_back({name, file_bytes(path), load, update});
    };

    run_side(cfg.raw_path, "raw");
    run_side(cfg.hashed_path, "hashed");

    const auto& raw = result.rows[0];
    const auto& hashed = result.rows[1];
    result.load_ratio = hashed.load_s_per_epoch > 0 ? raw.load_s_per_epoch / hashed.load_s_per_epoch : 0;
    result.update_ratio =
        hashed.update_s_per_epoch > 0 ? raw.update_s_per_epoch / hashed.update_s_per_epoch : 0;
    result.bytes_ratio = hashed.bytes_on_disk > 0
                             ? double(raw.bytes_on_disk) / double(hashed.bytes_on_disk)
                             : 0;
    return result;
}

void write_epoch_table(const EpochBenchResult& result, FILE* out) {
    std::fprintf(out, "# bbmh-bench-epochs v1\n");
    std::fprintf(out, "input\tbytes\tload_s_per_epoch\tupdate_s_per_epoch\n");
    for (const auto& r : result.rows) {
        std::fprintf(out, "%s\t%llu\t%.6f\t%.6f\n", r.input.c_str(),
                     (unsigned long long)r.bytes_on_disk, r.load_s_per_epoch,
                     r.update_s_per_epoch);
    }
    std::fprintf(out, "# ratios raw/hashed: load=%.3f update=%.3f bytes=%.3f\n",
                 result.load_ratio, result.update_ratio, result.bytes_ratio);
}

}  // namespace bbmh
