#include "pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace bbmh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct InChunk {
    uint64_t index = 0;
    std::vector<FeatureSet> sets;
};

struct OutChunk {
    std::vector<SketchRecord> recs;
};

class ChunkQueue {
public:
    explicit ChunkQueue(size_t capacity) : capacity_(capacity) {}

    bool push(InChunk&& c) {
        std::unique_lock lk(m_);
        cv_room_.wait(lk, [&] { return q_.size() < capacity_ || aborted_; });
        if (aborted_) return false;
        q_.push_back(std::move(c));
        cv_data_.notify_one();
        return true;
    }

    bool pop(InChunk& out) {
        std::unique_lock lk(m_);
        cv_data_.wait(lk, [&] { return !q_.empty() || closed_ || aborted_; });
        if (aborted_ || q_.empty()) return false;
        out = std::move(q_.front());
        q_.pop_front();
        cv_room_.notify_one();
        return true;
    }

    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_data_.notify_all();
    }

    void abort() {
        std::lock_guard lk(m_);
        aborted_ = true;
        cv_data_.notify_all();
        cv_room_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_data_, cv_room_;
    std::deque<InChunk> q_;
    size_t capacity_;
    bool closed_ = false;
    bool aborted_ = false;
};

// chunks arrive out of order from the pool; the writer drains them in order
class ReorderBuffer {
public:
    void put(uint64_t index, OutChunk&& c) {
        std::lock_guard lk(m_);
        done_[index] = std::move(c);
        cv_.notify_all();
    }

    // false once `total` is known and all chunks below it were consumed
    bool take(uint64_t index, OutChunk& out) {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] {
            return done_.count(index) || (total_known_ && index >= total_) || aborted_;
        });
        if (aborted_) return false;
        auto it = done_.find(index);
        if (it == done_.end()) return false;
        out = std::move(it->second);
        done_.erase(it);
        return true;
    }

    void set_total(uint64_t total) {
        std::lock_guard lk(m_);
        total_ = total;
        total_known_ = true;
        cv_.notify_all();
    }

    void abort() {
        std::lock_guard lk(m_);
        aborted_ = true;
        cv_.notify_all();
    }

private:
    std::mutex m_;
    std::condition_variable cv_;
    std::map<uint64_t, OutChunk> done_;
    uint64_t total_ = 0;
    bool total_known_ = false;
    bool aborted_ = false;
};

}  // namespace

PipelineStats sketch_stream(const HashFamily& family, RecordSource& input, const SketchSink& sink,
                            uint8_t b, size_t chunk_size, unsigned workers, bool keep_minima) {
    if (chunk_size < 1) fail(Errc::InvalidArgument, "chunk_size must be >= 1");
    if (workers < 1) fail(Errc::InvalidArgument, "workers must be >= 1");

    PipelineStats stats;
    const auto wall0 = Clock::now();

    ChunkQueue in_q(size_t(workers) * 2 + 1);
    ReorderBuffer done;
    std::mutex err_m;
    std::exception_ptr error;
    auto record_error = [&](std::exception_ptr e) {
        {
            std::lock_guard lk(err_m);
            if (!error) error = e;
        }
        in_q.abort();
        done.abort();
    };

    std::thread reader([&] {
        try {
            uint64_t index = 0;
            bool more = true;
            double read_s = 0;
            while (more) {
                InChunk chunk;
                chunk.index = index;
                chunk.sets.reserve(chunk_size);
                const auto t0 = Clock::now();
                FeatureSet fs;
                while (chunk.sets.size() < chunk_size && (more = input.next(fs)))
                    chunk.sets.push_back(std::move(fs));
                read_s += seconds_since(t0);
                if (chunk.sets.empty()) break;
                ++index;
                if (!in_q.push(std::move(chunk))) return;
            }
            stats.read_seconds = read_s;
            stats.chunks = index;
            in_q.close();
            done.set_total(index);
        } catch (...) {
            record_error(std::current_exception());
        }
    });

    std::vector<double> busy(workers, 0.0);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                InChunk chunk;
                while (in_q.pop(chunk)) {
                    const auto t0 = Clock::now();
                    OutChunk out;
                    out.recs.reserve(chunk.sets.size());
                    for (const FeatureSet& fs : chunk.sets)
                        out.recs.push_back(sketch_one(family, fs, b, keep_minima));
                    busy[w] += seconds_since(t0);
                    done.put(chunk.index, std::move(out));
                }
            } catch (...) {
                record_error(std::current_exception());
            }
        });
    }

    // caller thread is the order-restoring writer
    try {
        OutChunk out;
        for (uint64_t next = 0; done.take(next, out); ++next) {
            const auto t0 = Clock::now();
            for (const SketchRecord& rec : out.recs) sink(rec);
            stats.write_seconds += seconds_since(t0);
            stats.records += out.recs.size();
        }
    } catch (...) {
        record_error(std::current_exception());
    }

    reader.join();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    for (double s : busy) stats.compute_seconds += s;
    stats.wall_seconds = seconds_since(wall0);
    return stats;
}

PipelineStats sketch_file(const HashFamily& family, const std::string& input_path,
                          const std::string& output_path, uint8_t b, size_t chunk_size,
                          unsigned workers, bool emit_minima) {
    auto src = open_corpus(input_path);
    SketchHeader header{family.scheme(), b, family.k(), family.dim(), family.seed()};
    SketchWriter writer(output_path, header, emit_minima);
    PipelineStats stats =
        sketch_stream(family, *src, [&](const SketchRecord& r) { writer.append(r); }, b,
                      chunk_size, workers, emit_minima);
    writer.close();
    return stats;
}

}  // namespace bbmh
