#ifndef BBMH_PIPELINE_HPP
#define BBMH_PIPELINE_HPP

#include <cstdint>
#include <functional>

#include "dataio.hpp"
#include "hash_family.hpp"
#include "sketch.hpp"

namespace bbmh {

struct PipelineStats {
    uint64_t records = 0;
    uint64_t chunks = 0;
    double read_seconds = 0;     // reader thread time in parse/read
    double compute_seconds = 0;  // summed worker busy time
    double write_seconds = 0;    // writer time in serialization
    double wall_seconds = 0;
};

using SketchSink = std::function<void(const SketchRecord&)>;

// Three-phase chunked sketching: one reader filling chunk_size batches, a
// pool of workers computing minima over the shared immutable family, and an
// order-restoring writer. Output bytes are identical for any
// (chunk_size, workers) combination.
PipelineStats sketch_stream(const HashFamily& family, RecordSource& input, const SketchSink& sink,
                            uint8_t b, size_t chunk_size, unsigned workers, bool keep_minima);

// Convenience wrapper: corpus file in, sketch file (+ optional .min64) out.
PipelineStats sketch_file(const HashFamily& family, const std::string& input_path,
                          const std::string& output_path, uint8_t b, size_t chunk_size,
                          unsigned workers, bool emit_minima);

}  // namespace bbmh

#endif
