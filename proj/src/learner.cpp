#include "learner.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "expansion.hpp"
#include "prng.hpp"
#include "sketch.hpp"

namespace bbmh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^-m) without overflow at either tail
double softplus_neg(double m) {
    if (m < -30) return -m;
    if (m > 30) return std::exp(-m);
    return std::log1p(std::exp(-m));
}

double row_loss(Loss loss, double margin) {
    return loss == Loss::Hinge ? std::max(0.0, 1.0 - margin) : softplus_neg(margin);
}

}  // namespace

double dot(const std::vector<double>& w, const SparseRow& row) {
    double s = 0;
    for (size_t i = 0; i < row.indices.size(); ++i) {
        const double v = row.values.empty() ? 1.0 : row.values[i];
        s += w[row.indices[i]] * v;
    }
    return s;
}

SgdTrainer::SgdTrainer(uint64_t dim, Loss loss, double lambda, double eta0)
    : dim_(dim), loss_(loss), lambda_(lambda), eta0_(eta0), u_(dim, 0.0) {
    if (dim < 1) fail(Errc::InvalidArgument, "model dimension must be >= 1");
    if (lambda < 0) fail(Errc::InvalidArgument, "lambda must be >= 0");
    if (eta0 <= 0) fail(Errc::InvalidArgument, "eta0 must be > 0");
}

double SgdTrainer::eta_now() const { return eta0_ / (1.0 + lambda_ * eta0_ * double(t_)); }

double SgdTrainer::step(const SparseRow& row) {
    const double y = row.label;
    const double eta = eta_now();

    double m = 0;
    for (size_t i = 0; i < row.indices.size(); ++i) {
        const uint32_t idx = row.indices[i];
        if (idx >= dim_)
            fail(Errc::DimensionExceeded,
                 "feature " + std::to_string(idx) + " >= dim " + std::to_string(dim_));
        m += u_[idx] * (row.values.empty() ? 1.0 : row.values[i]);
    }
    m *= s_ * y;

    // margin > 1 leaves only the regularizer term
    double g = 0;
    if (loss_ == Loss::Hinge) {
        g = m > 1.0 ? 0.0 : y;
    } else {
        g = y * sigmoid(-m);
    }

    s_ *= 1.0 - eta * lambda_;
    if (s_ == 0.0) {  // eta*lambda hit exactly 1; weights are all zero now
        std::fill(u_.begin(), u_.end(), 0.0);
        s_ = 1.0;
        if (avg_on_ && avg_n_ > 0) q_ = 0.0;
    }

    const double add = eta * g / s_;
    if (g != 0.0) {
        for (size_t i = 0; i < row.indices.size(); ++i)
            u_[row.indices[i]] += add * (row.values.empty() ? 1.0 : row.values[i]);
    }

    if (avg_on_) {
        ++avg_n_;
        if (avg_n_ == 1) {
            // seed the average at the current iterate: w_avg = q * u
            std::fill(ubar_.begin(), ubar_.end(), 0.0);
            p_ = 1.0;
            q_ = s_;
        } else {
            const double mu = 1.0 / double(avg_n_);
            if (g != 0.0) {
                const double fold = -q_ / p_ * add;
                for (size_t i = 0; i < row.indices.size(); ++i)
                    ubar_[row.indices[i]] += fold * (row.values.empty() ? 1.0 : row.values[i]);
            }
            p_ *= 1.0 - mu;
            q_ = (1.0 - mu) * q_ + mu * s_;
        }
    }

    ++t_;
    renormalize();
    return m;
}

void SgdTrainer::start_averaging() {
    if (avg_on_) return;
    avg_on_ = true;
    avg_n_ = 0;
    ubar_.assign(dim_, 0.0);
}

void SgdTrainer::renormalize() {
    if (std::abs(s_) < 1e-9) {
        for (double& v : u_) v *= s_;
        if (avg_on_ && avg_n_ > 0) q_ /= s_;
        s_ = 1.0;
    }
    if (avg_on_ && avg_n_ > 0 && p_ < 1e-9) {
        for (double& v : ubar_) v *= p_;
        p_ = 1.0;
    }
}

std::vector<double> SgdTrainer::weights() const {
    std::vector<double> w(u_);
    for (double& v : w) v *= s_;
    return w;
}

std::vector<double> SgdTrainer::averaged_weights() const {
    if (!avg_on_ || avg_n_ == 0) return weights();
    std::vector<double> w(dim_);
    for (uint64_t i = 0; i < dim_; ++i) w[i] = p_ * ubar_[i] + q_ * u_[i];
    return w;
}

LinearModel SgdTrainer::finish(bool averaging) const {
    LinearModel model;
    model.dim = dim_;
    model.loss = loss_;
    model.averaging = averaging;
    model.updates = t_;
    model.w = weights();
    if (averaging) model.w_avg = averaged_weights();
    return model;
}

double objective(const std::vector<double>& w, const std::vector<SparseRow>& rows, Loss loss,
                 double lambda) {
    double norm2 = 0;
    for (double v : w) norm2 += v * v;
    double sum = 0;
    for (const SparseRow& row : rows) sum += row_loss(loss, double(row.label) * dot(w, row));
    return 0.5 * lambda * norm2 + (rows.empty() ? 0.0 : sum / double(rows.size()));
}

void loss_gradient(const std::vector<double>& w, const SparseRow& row, Loss loss,
                   std::vector<double>& grad_out) {
    grad_out.assign(row.indices.size(), 0.0);
    const double y = row.label;
    const double m = y * dot(w, row);
    double g;
    if (loss == Loss::Hinge) {
        g = m > 1.0 ? 0.0 : -y;
    } else {
        g = -y * sigmoid(-m);
    }
    for (size_t i = 0; i < row.indices.size(); ++i)
        grad_out[i] = g * (row.values.empty() ? 1.0 : row.values[i]);
}

double calibrate_eta0(const std::vector<SparseRow>& rows, uint64_t dim, Loss loss, double lambda,
                      uint64_t /*seed*/) {
    double best_eta = 0.01, best_obj = std::numeric_limits<double>::infinity();
    if (rows.empty()) return best_eta;
    for (int e = -7; e <= 3; ++e) {
        const double cand = std::pow(10.0, e);
        SgdTrainer trainer(dim, loss, lambda, cand);
        bool blew_up = false;
        for (const SparseRow& row : rows) {
            trainer.step(row);
            if (!std::isfinite(trainer.eta_now())) {
                blew_up = true;
                break;
            }
        }
        if (blew_up) continue;
        const double obj = objective(trainer.weights(), rows, loss, lambda);
        if (std::isfinite(obj) && obj < best_obj) {
            best_obj = obj;
            best_eta = cand;
        }
    }
    return best_eta;
}

// ---- row sources -----------------------------------------------------------

namespace {

class BinaryRowSource : public RowSource {
public:
    explicit BinaryRowSource(const std::string& path)
        : src_(open_binary_corpus(path)), header_(read_corpus_header(path)) {}

    bool next(SparseRow& out) override {
        FeatureSet fs;
        if (!src_->next(fs)) return false;
        out.indices = std::move(fs.indices);
        out.values.clear();
        out.label = fs.label;
        return true;
    }
    void reset() override { src_->reset(); }
    uint64_t dim() const override { return header_.dim; }
    uint64_t count() const override { return header_.count; }

private:
    std::unique_ptr<RecordSource> src_;
    CorpusHeader header_;
};

class LibsvmRowSource : public RowSource {
public:
    explicit LibsvmRowSource(const std::string& path) : path_(path) {
        f_ = std::fopen(path.c_str(), "rb");
        if (!f_) fail(Errc::Io, path + ": " + std::strerror(errno));
    }
    ~LibsvmRowSource() override {
        if (f_) std::fclose(f_);
    }

    bool next(SparseRow& out) override {
        std::string line;
        int c;
        while ((c = std::fgetc(f_)) != EOF && c != '\n') line.push_back(char(c));
        if (line.empty() && c == EOF) return false;
        ++line_no_;
        if (line.empty()) return next(out);
        out = parse_libsvm(line, line_no_, LibsvmOptions{.binary = false, .accept01 = true});
        return true;
    }
    void reset() override {
        std::rewind(f_);
        line_no_ = 0;
    }
    uint64_t dim() const override { return 0; }
    uint64_t count() const override { return 0; }

private:
    std::string path_;
    FILE* f_ = nullptr;
    uint64_t line_no_ = 0;
};

// runtime Eq-5 expansion of a sketch file; flagged records become empty rows
class SketchRowSource : public RowSource {
public:
    explicit SketchRowSource(const std::string& path) : reader_(path) {
        dim_ = expanded_dim(reader_.header().k, reader_.header().b);
    }

    bool next(SparseRow& out) override {
        SketchRecord rec;
        if (!reader_.next(rec)) return false;
        out.label = rec.label;
        out.values.clear();
        if (rec.empty_set()) {
            out.indices.clear();
        } else {
            ExpandedVector ev = expand(rec, reader_.header().k, reader_.header().b);
            out.indices = std::move(ev.ones);
        }
        return true;
    }
    void reset() override { reader_.reset(); }
    uint64_t dim() const override { return dim_; }
    uint64_t count() const override { return reader_.count(); }

private:
    SketchReader reader_;
    uint64_t dim_ = 0;
};

}  // namespace

std::unique_ptr<RowSource> open_rows(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) fail(Errc::Io, path + ": " + std::strerror(errno));
    char magic[4] = {0};
    size_t got = std::fread(magic, 1, 4, f);
    std::fclose(f);
    if (got == 4 && std::memcmp(magic, "BBMH", 4) == 0)
        return std::make_unique<SketchRowSource>(path);
    if (got == 4 && std::memcmp(magic, "BBCV", 4) == 0)
        return std::make_unique<BinaryRowSource>(path);
    return std::make_unique<LibsvmRowSource>(path);
}

// ---- training loop ---------------------------------------------------------

namespace {

struct LoadedData {
    uint64_t n = 0;
    uint64_t dim = 0;
    std::vector<SparseRow> calibration;
};

LoadedData prescan(RowSource& data, uint64_t calibration_size, bool need_full_scan) {
    LoadedData out;
    out.dim = data.dim();
    out.n = data.count();
    SparseRow row;
    uint64_t max_idx = 0;
    bool saw_idx = false;
    uint64_t seen = 0;
    data.reset();
    while ((need_full_scan || seen < calibration_size) && data.next(row)) {
        ++seen;
        if (seen <= calibration_size && !row.indices.empty()) out.calibration.push_back(row);
        if (!row.indices.empty()) {
            max_idx = std::max(max_idx, uint64_t(row.indices.back()));
            saw_idx = true;
        }
    }
    if (out.n == 0) {
        if (!need_full_scan)
            while (data.next(row)) ++seen;
        out.n = seen;
    }
    if (out.dim == 0) out.dim = saw_idx ? max_idx + 1 : 1;
    data.reset();
    return out;
}

// bounded row buffer between the loader thread and the updater
class RowQueue {
public:
    explicit RowQueue(size_t capacity) : capacity_(capacity) {}

    void push(std::vector<SparseRow>&& batch) {
        std::unique_lock lk(m_);
        cv_room_.wait(lk, [&] { return q_.size() < capacity_; });
        q_.push_back(std::move(batch));
        cv_data_.notify_one();
    }
    void close() {
        std::lock_guard lk(m_);
        closed_ = true;
        cv_data_.notify_all();
    }
    bool pop(std::vector<SparseRow>& out) {
        std::unique_lock lk(m_);
        cv_data_.wait(lk, [&] { return !q_.empty() || closed_; });
        if (q_.empty()) return false;
        out = std::move(q_.front());
        q_.pop_front();
        cv_room_.notify_one();
        return true;
    }

private:
    std::mutex m_;
    std::condition_variable cv_data_, cv_room_;
    std::deque<std::vector<SparseRow>> q_;
    size_t capacity_;
    bool closed_ = false;
};

constexpr size_t kRowBatch = 256;

double accuracy_on(const LinearModel& model, const std::vector<SparseRow>& rows) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    uint64_t correct = 0;
    for (const SparseRow& row : rows) correct += predict_class(model, row) == row.label;
    return double(correct) / double(rows.size());
}

}  // namespace

TrainResult train(RowSource& data, const TrainConfig& cfg, RowSource* test_data) {
    if (cfg.epochs < 1) fail(Errc::InvalidArgument, "epochs must be >= 1");
    if (cfg.C <= 0 && !cfg.lambda) fail(Errc::InvalidArgument, "C must be > 0");

    // formats without a header need a full pass for dim and n
    const bool header_known = (data.dim() != 0 || cfg.dim_override) && data.count() != 0;
    LoadedData scan = prescan(data, std::max<uint64_t>(1, cfg.calibration_size), !header_known);
    if (cfg.dim_override) scan.dim = *cfg.dim_override;
    if (scan.n == 0) fail(Errc::InvalidArgument, "training set is empty");
    if (scan.dim > cfg.max_dim)
        fail(Errc::DimensionExceeded, "dim " + std::to_string(scan.dim) + " exceeds the " +
                                          std::to_string(cfg.max_dim) + " weight cap");

    TrainResult result;
    result.n = scan.n;
    result.lambda = cfg.lambda ? *cfg.lambda : 1.0 / (double(scan.n) * cfg.C);
    result.eta0 = cfg.eta0 > 0 ? cfg.eta0
                               : calibrate_eta0(scan.calibration, scan.dim, cfg.loss,
                                                result.lambda, cfg.seed);

    std::vector<SparseRow> test_rows;
    if (test_data) {
        SparseRow row;
        test_data->reset();
        while (test_data->next(row)) test_rows.push_back(row);
    }

    // in-memory replay only when shuffling is requested
    std::vector<SparseRow> memory;
    std::vector<uint32_t> order;
    if (cfg.shuffle) {
        SparseRow row;
        data.reset();
        while (data.next(row)) memory.push_back(std::move(row));
        order.resize(memory.size());
        for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    }

    SgdTrainer trainer(scan.dim, cfg.loss, result.lambda, result.eta0);

    for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.averaging && epoch == cfg.avg_start_epoch) trainer.start_averaging();

        EpochMetrics em;
        em.epoch = epoch;
        double loss_sum = 0;
        uint64_t trained = 0;

        auto update_row = [&](const SparseRow& row) {
            if (row.label != 1 && row.label != -1)
                fail(Errc::NonBinaryLabel, "label must be +-1");
            if (row.indices.empty()) return;  // flagged/empty records are skipped
            loss_sum += row_loss(cfg.loss, trainer.step(row));
            ++trained;
        };

        if (cfg.shuffle) {
            SplitMix64 rng(keyed_u64(cfg.seed, rngtag::kShuffle, epoch, 0));
            for (size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
            const auto t0 = Clock::now();
            for (uint32_t i : order) update_row(memory[i]);
            em.update_seconds = seconds_since(t0);
        } else {
            RowQueue queue(8);
            std::exception_ptr load_error;
            std::thread loader([&] {
                try {
                    double load_s = 0;
                    data.reset();
                    bool more = true;
                    while (more) {
                        std::vector<SparseRow> batch;
                        batch.reserve(kRowBatch);
                        const auto t0 = Clock::now();
                        SparseRow row;
                        while (batch.size() < kRowBatch && (more = data.next(row)))
                            batch.push_back(std::move(row));
                        load_s += seconds_since(t0);
                        if (!batch.empty()) queue.push(std::move(batch));
                    }
                    em.load_seconds = load_s;
                } catch (...) {
                    load_error = std::current_exception();
                }
                queue.close();
            });
            std::vector<SparseRow> batch;
            while (queue.pop(batch)) {
                const auto t0 = Clock::now();
                for (const SparseRow& row : batch) update_row(row);
                em.update_seconds += seconds_since(t0);
            }
            loader.join();
            if (load_error) std::rethrow_exception(load_error);
        }

        // objective: running mean loss of the epoch plus the final regularizer
        std::vector<double> w = trainer.weights();
        double norm2 = 0;
        for (double v : w) norm2 += v * v;
        em.train_obj = 0.5 * result.lambda * norm2 +
                       (trained ? loss_sum / double(trained) : 0.0);
        if (!test_rows.empty()) {
            LinearModel snap = trainer.finish(cfg.averaging && trainer.averaging());
            em.test_acc = accuracy_on(snap, test_rows);
        }
        result.metrics.push_back(em);
    }

    result.model = trainer.finish(cfg.averaging);
    return result;
}

double predict_score(const LinearModel& model, const SparseRow& row) {
    const std::vector<double>& w = model.decision_weights();
    double s = 0;
    for (size_t i = 0; i < row.indices.size(); ++i) {
        const uint32_t idx = row.indices[i];
        if (idx >= model.dim)
            fail(Errc::DimensionExceeded,
                 "feature " + std::to_string(idx) + " >= dim " + std::to_string(model.dim));
        s += w[idx] * (row.values.empty() ? 1.0 : row.values[i]);
    }
    return s;
}

int predict_class(const LinearModel& model, const SparseRow& row) {
    return predict_score(model, row) >= 0 ? 1 : -1;
}

PredictStats predict_file(const LinearModel& model, RowSource& data, FILE* scores_out) {
    PredictStats stats;
    SparseRow row;
    data.reset();
    while (data.next(row)) {
        const double score = row.indices.empty() ? 0.0 : predict_score(model, row);
        const int cls = score >= 0 ? 1 : -1;
        if (scores_out) std::fprintf(scores_out, "%d\t%.9g\n", cls, score);
        ++stats.n;
        stats.correct += cls == row.label;
    }
    return stats;
}

// ---- model file ------------------------------------------------------------

namespace {

void put_u64f(FILE* f, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
    if (std::fwrite(b, 1, 8, f) != 8) fail(Errc::Io, "short write");
}

uint64_t get_u64f(FILE* f) {
    uint8_t b[8];
    if (std::fread(b, 1, 8, f) != 8) fail(Errc::Io, "short read");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

void put_f64(FILE* f, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64f(f, v);
}

double get_f64(FILE* f) {
    uint64_t v = get_u64f(f);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

void save_model(const LinearModel& model, const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) fail(Errc::Io, path + ": " + std::strerror(errno));
    std::fwrite("BBLM", 1, 4, f);
    put_u64f(f, model.dim);
    uint8_t tags[2] = {uint8_t(model.loss), uint8_t(model.averaging ? 1 : 0)};
    std::fwrite(tags, 1, 2, f);
    for (double v : model.w) put_f64(f, v);
    if (model.averaging)
        for (double v : model.w_avg) put_f64(f, v);
    std::fclose(f);
}

LinearModel load_model(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) fail(Errc::Io, path + ": " + std::strerror(errno));
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "BBLM", 4) != 0) {
        std::fclose(f);
        fail(Errc::MalformedLine, path + ": not a BBLM model file");
    }
    LinearModel model;
    model.dim = get_u64f(f);
    uint8_t tags[2];
    if (std::fread(tags, 1, 2, f) != 2 || tags[0] > 1 || tags[1] > 1) {
        std::fclose(f);
        fail(Errc::MalformedLine, path + ": bad loss/averaging tags");
    }
    model.loss = Loss(tags[0]);
    model.averaging = tags[1] != 0;
    model.w.resize(model.dim);
    for (uint64_t i = 0; i < model.dim; ++i) model.w[i] = get_f64(f);
    if (model.averaging) {
        model.w_avg.resize(model.dim);
        for (uint64_t i = 0; i < model.dim; ++i) model.w_avg[i] = get_f64(f);
    }
    std::fclose(f);
    return model;
}

}  // namespace bbmh
